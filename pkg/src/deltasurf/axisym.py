"""Yukawa single layer on surfaces of revolution, one Fourier mode at a time.

A surface of revolution about the z axis is described by its generating
curve s -> (r(s), z(s)), s in [0, L], parametrized by arc length.  A density
f(s) cos(mφ) is mapped by the single layer to g(t) cos(mφ) with

    g(t) = ∫ G_m(t, s) f(s) r(s) ds,
    G_m(t, s) = ∫_0^{2π} e^{-κ d}/(4π d) cos(mφ) dφ,
    d² = (r_t - r_s)² + (z_t - z_s)² + 4 r_t r_s sin²(φ/2).

Galerkin discretization with discontinuous Legendre polynomials on panels
of the curve gives a symmetric pencil (A, M) per mode whose eigenvalues are
those of the layer operator with the matching angular dependence.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import legvander

from .quadrature import gauss_legendre

_TINY = 1e-300


@dataclass(frozen=True)
class ProfileCurve:
    """Arc-length generating curve; ``closed_*`` marks ends that sit on the axis."""

    length: float
    rz: Callable
    closed_start: bool = True
    closed_end: bool = False
    name: str = "profile"

    @property
    def edges(self):
        """Arc-length positions of the free boundary (where r > 0 at an end)."""
        out = []
        if not self.closed_start:
            out.append(0.0)
        if not self.closed_end:
            out.append(self.length)
        return out


def azimuthal_kernel(rt, zt, rs, zs, kappa, modes, n_log=32, n_reg=16):
    """Mode kernels G_m for broadcastable arrays of curve point pairs.

    Returns an array of shape (len(modes),) + broadcast shape.  With φ = 2ψ,
    the ψ-range [0, π/4] carries the logarithmic singularity and is mapped
    by 2R sin ψ = δ sinh w (R² = r_t r_s, δ the meridian distance), which
    makes the integrand smooth in w; [π/4, π/2] is regular.
    """
    rt, zt, rs, zs = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rt, zt, rs, zs)))
    shape = rt.shape
    delta = np.sqrt((rt - rs) ** 2 + (zt - zs) ** 2).ravel()
    R = np.sqrt(rt * rs).ravel()
    modes = np.atleast_1d(modes)
    dd = np.maximum(delta, _TINY)[:, None]
    RR = np.maximum(R, _TINY)[:, None]

    x, w = gauss_legendre(n_log)
    wmax = np.arcsinh(np.sqrt(2.0) * RR / dd)
    W = wmax * x
    sin_psi = np.minimum(dd * np.sinh(W) / (2.0 * RR), 1.0)
    psi = np.arcsin(sin_psi)
    d = dd * np.cosh(W)
    # dψ = δ cosh w dw / (2R cos ψ); the δ cosh w cancels against 1/d
    g1 = np.exp(-kappa * d) / (8.0 * np.pi * RR * np.cos(psi)) * (wmax * w)

    x2, w2 = gauss_legendre(n_reg)
    psi2 = 0.25 * np.pi * (1.0 + x2)
    d2 = np.sqrt(dd**2 + 4.0 * RR**2 * np.sin(psi2) ** 2)
    g2 = np.exp(-kappa * d2) / (4.0 * np.pi * d2) * (0.25 * np.pi * w2)

    # the φ integral over [0, 2π] is four times the ψ integral over [0, π/2]
    out = np.empty((len(modes), delta.size))
    for k, m in enumerate(modes):
        out[k] = 4.0 * (np.sum(g1 * np.cos(2 * m * psi), axis=1) + np.sum(g2 * np.cos(2 * m * psi2), axis=1))
    return out.reshape((len(modes),) + shape)


def graded_breaks(curve, hmax, levels=6, ratio=0.2):
    """Panel breakpoints of size ≤ hmax, geometrically refined toward free edges."""
    if hmax <= 0:
        raise ValueError("hmax must be positive")
    L = curve.length
    n = max(2, int(np.ceil(L / hmax)))
    pts = [np.linspace(0.0, L, n + 1)]
    h0 = L / n
    for e in curve.edges:
        side = 1.0 if e == 0.0 else -1.0
        pts.append(e + side * h0 * ratio ** np.arange(1, levels + 1))
    return np.unique(np.concatenate(pts))


def _legendre_basis(x, degree):
    """Legendre polynomials on [0, 1] evaluated at x, shape (len(x), degree + 1)."""
    return legvander(2.0 * np.asarray(x) - 1.0, degree)


def _rule_toward(lo, hi, c, y, v):
    """Rules on [lo, hi] split at c and graded toward c; c is an array.

    Returns points and weights of shape c.shape + (2 n,).
    """
    c = np.asarray(c)[..., None]
    L1, L2 = c - lo, hi - c
    pts = np.concatenate([c - L1 * y, c + L2 * y], axis=-1)
    wts = np.concatenate([L1 * v, L2 * v], axis=-1)
    return pts, wts


class AxisymmetricLayer:
    """Galerkin single-layer matrices on a surface of revolution.

    Parameters
    ----------
    curve : ProfileCurve
    hmax : float
        Largest panel length along the generating curve.
    degree : int
        Polynomial degree of the density on each panel.
    levels, ratio : grading toward free edges (number of geometric levels
        and their ratio).
    """

    def __init__(self, curve, hmax=0.3, degree=6, levels=6, ratio=0.2, n_far=12, n_near=16, q_in=4, q_out=2):
        self.curve = curve
        self.hmax = hmax
        self.degree = degree
        self.levels = levels
        self.ratio = ratio
        self.breaks = graded_breaks(curve, hmax, levels, ratio)
        self.n_far = n_far
        self.n_near = n_near
        self.q_in = q_in
        self.q_out = q_out
        self._mass = None

    @property
    def n_panels(self):
        return len(self.breaks) - 1

    @property
    def n_dofs(self):
        return self.n_panels * (self.degree + 1)

    @property
    def h(self):
        return float(np.max(np.diff(self.breaks)))

    def refined(self):
        """A finer discretization for convergence checks."""
        return AxisymmetricLayer(
            self.curve,
            hmax=self.hmax / 2,
            degree=self.degree + 2,
            levels=self.levels + 3,
            ratio=self.ratio,
            n_far=self.n_far + 4,
            n_near=self.n_near + 4,
            q_in=self.q_in,
            q_out=self.q_out,
        )

    def _panel_rule(self, n):
        x, w = gauss_legendre(n)
        a, lens = self.breaks[:-1, None], np.diff(self.breaks)[:, None]
        return x, a + lens * x, lens * w

    def mass(self):
        """Block-diagonal Gram matrix ∫ b_i b_j r ds."""
        if self._mass is None:
            p = self.degree
            x, t, wt = self._panel_rule(max(self.n_far, p + 2))
            r, _ = self.curve.rz(t)
            B = _legendre_basis(x, p)
            blocks = np.einsum("qi,kq,qj->kij", B, wt * r, B)
            M = np.zeros((self.n_dofs, self.n_dofs))
            for k in range(self.n_panels):
                sl = slice(k * (p + 1), (k + 1) * (p + 1))
                M[sl, sl] = blocks[k]
            self._mass = M
        return self._mass

    def _near_pairs(self):
        lens = np.diff(self.breaks)
        lo, hi = self.breaks[:-1], self.breaks[1:]
        gap = np.maximum(np.maximum(lo[None, :] - hi[:, None], lo[:, None] - hi[None, :]), 0.0)
        return gap < np.maximum(lens[:, None], lens[None, :])

    def matrices(self, kappa, modes):
        """Galerkin single-layer matrices, one per mode, shape (len(modes), n, n)."""
        modes = np.atleast_1d(modes)
        p, N = self.degree, self.n_panels
        P1 = p + 1
        near = self._near_pairs()

        # far field: tensor Gauss over all panel pairs, near blocks overwritten below
        x, t, wt = self._panel_rule(self.n_far)
        r, z = self.curve.rz(t)
        B = _legendre_basis(x, p)  # (q, P1)
        Wt = (wt * r)[:, :, None] * B[None]  # (N, q, P1)
        rf, zf = r.ravel(), z.ravel()
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            K = azimuthal_kernel(rf[:, None], zf[:, None], rf[None, :], zf[None, :], kappa, modes)
        q = self.n_far
        K = K.reshape(len(modes), N, q, N, q)
        A = np.einsum("aqi,maqbs,bsj->maibj", Wt, K, Wt).reshape(len(modes), N * P1, N * P1)

        # near field: outer rule graded toward the panel ends or the shared
        # endpoint, inner rule split at the point nearest to t and graded there
        yo, vo = gauss_legendre(self.n_near)
        y_out, v_out = yo**self.q_out, vo * self.q_out * yo ** (self.q_out - 1)
        y_in, v_in = yo**self.q_in, vo * self.q_in * yo ** (self.q_in - 1)
        for a, b in zip(*np.nonzero(near)):
            la, lb = self.breaks[a + 1] - self.breaks[a], self.breaks[b + 1] - self.breaks[b]
            if a == b:
                c = 0.5 * (self.breaks[a] + self.breaks[a + 1])
                ts, tw = _rule_toward(self.breaks[a], self.breaks[a + 1], c, 1 - y_out[::-1], v_out[::-1])
                ts, tw = ts.ravel(), tw.ravel()
            else:
                end = self.breaks[a + 1] if b > a else self.breaks[a]
                ts, tw = _rule_toward(self.breaks[a], self.breaks[a + 1], end, y_out, v_out)
                keep = tw > 0
                ts, tw = ts[keep], tw[keep]
            rt, zt = self.curve.rz(ts)
            cs = np.clip(ts, self.breaks[b], self.breaks[b + 1])
            ss, sw = _rule_toward(self.breaks[b], self.breaks[b + 1], cs, y_in, v_in)
            rs, zs = self.curve.rz(ss)
            Kn = azimuthal_kernel(rt[:, None], zt[:, None], rs, zs, kappa, modes)
            Kn = np.where(sw > 0, Kn * (sw * rs), 0.0)
            Bt = _legendre_basis((ts - self.breaks[a]) / la, p) * (tw * rt)[:, None]
            Bs = _legendre_basis((ss - self.breaks[b]) / lb, p)  # (nt, ns, P1)
            blk = np.einsum("ti,mts,tsj->mij", Bt, Kn, Bs)
            A[:, a * P1 : (a + 1) * P1, b * P1 : (b + 1) * P1] = blk
        return 0.5 * (A + np.swapaxes(A, 1, 2))

    def mode_eigenpairs(self, kappa, modes, count):
        """Largest ``count`` eigenpairs per mode, descending."""
        from scipy.linalg import eigh

        M = self.mass()
        out = []
        n = self.n_dofs
        count = min(count, n)
        for A in self.matrices(kappa, modes):
            vals, vecs = eigh(A, M, subset_by_index=[n - count, n - 1])
            out.append((vals[::-1], vecs[:, ::-1]))
        return out

    def layer_eigenvalues(self, kappa, count, max_mode=None):
        """Largest ``count`` eigenvalues of the layer operator with multiplicity.

        Returns (values, modes) sorted descending; modes m > 0 appear twice.
        """
        if max_mode is None:
            max_mode = count
        modes = np.arange(max_mode + 1)
        pairs = self.mode_eigenpairs(kappa, modes, count)
        vals, tags = [], []
        for m, (v, _) in zip(modes, pairs):
            rep = 1 if m == 0 else 2
            vals.extend(np.repeat(v, rep))
            tags.extend([m] * (rep * len(v)))
        vals, tags = np.array(vals), np.array(tags)
        order = np.argsort(-vals, kind="stable")[:count]
        return vals[order], tags[order]

    def density(self, coeffs, s):
        """Evaluate a coefficient vector at arc-length positions s."""
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, self.n_panels - 1)
        lo, hi = self.breaks[k], self.breaks[k + 1]
        B = _legendre_basis((s - lo) / (hi - lo), self.degree)
        C = np.asarray(coeffs).reshape(self.n_panels, self.degree + 1)
        return np.sum(B * C[k], axis=-1)
