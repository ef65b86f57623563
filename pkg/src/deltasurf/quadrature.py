"""Quadrature rules on intervals and on the reference triangle.

The reference triangle has vertices (0, 0), (1, 0), (0, 1); weights sum to
its area 1/2.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def graded_rule(n, power):
    """Gauss rule on [0, 1] clustered at 0 through the substitution x = u**power.

    Removes endpoint singularities of type log(x) or x**alpha for
    power large enough.
    """
    u, w = gauss_legendre(n)
    return u**power, w * power * u ** (power - 1)


# degree-4 symmetric rule (6 points)
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322


def _orbit(a):
    b = 1.0 - 2.0 * a
    return [(a, a), (b, a), (a, b)]


@lru_cache(maxsize=None)
def triangle_rule(degree=4):
    """Symmetric triangle rule of the given polynomial degree.

    Degrees 1, 2 and 4 use classical symmetric rules; higher degrees fall
    back to a collapsed (Duffy) Gauss product rule, exact for polynomials of
    the requested degree.
    """
    if degree <= 1:
        pts = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        wts = np.array([0.5])
    elif degree == 2:
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        wts = np.full(3, 1.0 / 6.0)
    elif degree <= 4:
        pts = np.array(_orbit(_A1) + _orbit(_A2))
        wts = 0.5 * np.array([_W1] * 3 + [_W2] * 3)
    else:
        pts, wts = collapsed_rule(degree // 2 + 1)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@lru_cache(maxsize=None)
def collapsed_rule(n):
    """n*n point conical product rule on the reference triangle."""
    u, wu = gauss_legendre(n)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu)
    pts = np.stack([U.ravel() * (1.0 - V.ravel()), U.ravel() * V.ravel()], axis=1)
    wts = (W * U).ravel()
    return pts, wts


def duffy_split_rule(center, n):
    """Rule on the reference triangle resolving a 1/r singularity at ``center``.

    The triangle is split into three subtriangles with apex ``center``;
    each is collapsed onto the apex so the radial Jacobian cancels the
    singularity.  ``center`` has shape (..., 2); returns points of shape
    (..., 3*n*n, 2) and weights of shape (..., 3*n*n).  Subtriangles of
    zero area (apex on an edge or vertex) get zero weight.
    """
    center = np.asarray(center, dtype=float)
    u, wu = gauss_legendre(n)
    U, V = np.meshgrid(u, u, indexing="ij")
    U = U.ravel()
    V = V.ravel()
    W = np.outer(wu, wu).ravel() * U
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pts = []
    wts = []
    for k in range(3):
        p1 = corners[k]
        p2 = corners[(k + 1) % 3]
        e1 = p1 - center
        e2 = p2 - center
        det = np.abs(e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0])
        # apex + u * ((1 - v) e1 + v e2)
        d = (1.0 - V)[:, None] * e1[..., None, :] + V[:, None] * e2[..., None, :]
        pts.append(center[..., None, :] + U[:, None] * d)
        wts.append(det[..., None] * W)
    return np.concatenate(pts, axis=-2), np.concatenate(wts, axis=-1)


def _to_ref(p):
    # {0 <= x2 <= x1 <= 1} -> reference triangle (0,0), (1,0), (0,1)
    return np.stack([p[..., 0] - p[..., 1], p[..., 1]], axis=-1)


@lru_cache(maxsize=None)
def sauter_schwab_rule(case, n):
    """Rule for ∫_T ∫_T f(x, y) dy dx with a 1/|x - y| singularity.

    ``case`` is "identical", "edge" (the two panels share the edge from
    vertex 0 to vertex 1, traversed in the same direction) or "vertex"
    (they share vertex 0).  The four-dimensional product domain is split
    into simplices on which relative coordinates collapse the singular set;
    the resulting Jacobian cancels the singularity.  Returns reference points
    for x and y, shape (N, 2) each, and weights (N,), all read-only.
    """
    g, w = gauss_legendre(n)
    E1, E2, E3, XI = (a.ravel() for a in np.meshgrid(g, g, g, g, indexing="ij"))
    W = np.einsum("i,j,k,l->ijkl", w, w, w, w).ravel()
    if case == "identical":
        jac = XI**3 * E1**2 * E2
        maps = [
            ((XI, XI * (1 - E1 + E1 * E2)), (XI * (1 - E1 * E2 * E3), XI * (1 - E1))),
            ((XI * (1 - E1 * E2 * E3), XI * (1 - E1)), (XI, XI * (1 - E1 + E1 * E2))),
            ((XI, XI * E1 * (1 - E2 + E2 * E3)), (XI * (1 - E1 * E2), XI * E1 * (1 - E2))),
            ((XI * (1 - E1 * E2), XI * E1 * (1 - E2)), (XI, XI * E1 * (1 - E2 + E2 * E3))),
            ((XI * (1 - E1 * E2 * E3), XI * E1 * (1 - E2 * E3)), (XI, XI * E1 * (1 - E2))),
            ((XI, XI * E1 * (1 - E2)), (XI * (1 - E1 * E2 * E3), XI * E1 * (1 - E2 * E3))),
        ]
        jacs = [jac] * 6
    elif case == "edge":
        maps = [
            ((XI, XI * E1 * E3), (XI * (1 - E1 * E2), XI * E1 * (1 - E2))),
            ((XI, XI * E1), (XI * (1 - E1 * E2 * E3), XI * E1 * E2 * (1 - E3))),
            ((XI * (1 - E1 * E2), XI * E1 * (1 - E2)), (XI, XI * E1 * E2 * E3)),
            ((XI * (1 - E1 * E2 * E3), XI * E1 * E2 * (1 - E3)), (XI, XI * E1)),
            ((XI * (1 - E1 * E2 * E3), XI * E1 * (1 - E2 * E3)), (XI, XI * E1 * E2)),
        ]
        jacs = [XI**3 * E1**2] + [XI**3 * E1**2 * E2] * 4
    elif case == "vertex":
        maps = [
            ((XI, XI * E1), (XI * E2, XI * E2 * E3)),
            ((XI * E2, XI * E2 * E3), (XI, XI * E1)),
        ]
        jacs = [XI**3 * E2] * 2
    else:
        raise ValueError(f"unknown case {case!r}")
    xs = np.concatenate([_to_ref(np.stack(m[0], -1)) for m in maps])
    ys = np.concatenate([_to_ref(np.stack(m[1], -1)) for m in maps])
    ws = np.concatenate([j * W for j in jacs])
    for a in (xs, ys, ws):
        a.setflags(write=False)
    return xs, ys, ws
