"""Dirichlet eigenvalues of -Δ_S + K - M² by quadratic finite elements.

Elements are isoparametric in the chart: reference gradients are pulled
back through the exact element map, so the metric g^{jk} and the area
element √g enter at every quadrature node.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq
from sklearn.base import BaseEstimator

from .exceptions import ConvergenceError, MeshError
from .mesh import build_mesh, shape_p2


@dataclass
class StiffnessSystem:
    """Galerkin matrices restricted to the free (non-Dirichlet) dofs."""

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    free_dofs: np.ndarray
    constrained_dofs: np.ndarray
    n_dofs: int
    mesh: object
    potential_min: float
    mesh_h: float
    element_size: float


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mesh_h: float
    residuals: np.ndarray
    multiplicities: list = field(default_factory=list)
    element_size: float = np.nan

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "eigenvalue", "residual", "mesh_h"])
        for j, (lam, res) in enumerate(zip(self.eigenvalues, self.residuals), start=1):
            w.writerow([j, repr(float(lam)), "%.3e" % res, repr(float(self.mesh_h))])
        return buf.getvalue()


def p2_dofs(mesh):
    """Global P2 dof indices per triangle: vertices then edge midpoints."""
    return np.concatenate([mesh.triangles, mesh.n_vertices + mesh.tri_edges], axis=1)


def local_matrices(mesh, potential=None, shift=0.0):
    """Element stiffness (with potential) and mass blocks, shape (T, 6, 6)."""
    ref = mesh.quad_ref
    ref_w = mesh.quad_ref_weights
    N, dN = shape_p2(ref)
    _, J, W = mesh.element_geometry(np.arange(mesh.n_triangles), ref)
    if potential is not None:
        W = potential(mesh, J) if callable(potential) else np.broadcast_to(potential, W.shape)
    W = W + shift
    G = np.einsum("tqia,tqib->tqab", J, J)
    det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] ** 2
    if np.any(det <= 0):
        raise MeshError("degenerate element map")
    Ginv = np.stack(
        [np.stack([G[..., 1, 1], -G[..., 0, 1]], -1), np.stack([-G[..., 1, 0], G[..., 0, 0]], -1)], -2
    ) / det[..., None, None]
    dA = ref_w * np.sqrt(det)
    Kloc = np.einsum("qia,tqab,qjb,tq->tij", dN, Ginv, dN, dA)
    Mloc = np.einsum("qi,qj,tq->tij", N, N, dA)
    Vloc = np.einsum("qi,qj,tq->tij", N, N, dA * W)
    return Kloc + Vloc, Mloc, W


def assemble(mesh, potential=None, shift=0.0):
    """Assemble the form ⟨∂u, g⁻¹ ∂u⟩ + ⟨u, W u⟩ and the L² Gram matrix.

    ``potential`` overrides the geometric W = K - M² (a constant or a
    callable ``f(mesh, J) -> (T, q)`` array); ``shift`` adds a constant.
    Dirichlet dofs on ∂S are eliminated.
    """
    Kloc, Mloc, W = local_matrices(mesh, potential, shift)
    dofs = p2_dofs(mesh)
    n = mesh.n_vertices + len(mesh.edges)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    A = sp.coo_matrix((Kloc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    B = sp.coo_matrix((Mloc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    constrained = np.concatenate([mesh.boundary_vertices, mesh.n_vertices + mesh.boundary_edges])
    free = np.setdiff1d(np.arange(n), constrained)
    A = A[free][:, free]
    B = B[free][:, free]
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    return StiffnessSystem(
        stiffness=A.tocsr(),
        mass=B.tocsr(),
        free_dofs=free,
        constrained_dofs=constrained,
        n_dofs=n,
        mesh=mesh,
        potential_min=float(np.min(W)),
        mesh_h=mesh.h,
        element_size=mesh.element_size,
    )


def _group_multiplicities(vals, rel=1e-6):
    groups = []
    start = 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or abs(vals[k] - vals[k - 1]) >= rel * max(abs(vals[k]), 1e-300):
            groups.append(k - start)
            start = k
    return groups


def solve_modes(system, count, tol=1e-10, dense_limit=400):
    """Lowest ``count`` eigenpairs of the generalized problem A v = Λ B v.

    Shift-invert Lanczos about σ = min W - 1; the form is bounded below by
    min W, so σ lies under the spectrum and the targeted eigenvalues are the
    ones nearest to it.
    """
    A, B = system.stiffness, system.mass
    nfree = A.shape[0]
    if not 1 <= count <= nfree:
        raise ValueError(f"count must be in [1, {nfree}]")
    if nfree <= dense_limit:
        vals, vecs = sla.eigh(A.toarray(), B.toarray(), subset_by_index=[0, count - 1])
    else:
        sigma = system.potential_min - 1.0
        try:
            # fixed start vector: ARPACK's own draw depends on earlier calls in the process
            v0 = np.random.default_rng(0).standard_normal(nfree)
            vals, vecs = spla.eigsh(A, k=count, M=B, sigma=sigma, which="LM", tol=tol, v0=v0)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError("eigensolver did not converge", partial=(exc.eigenvalues, exc.eigenvectors)) from exc
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
    res = np.linalg.norm(A @ vecs - (B @ vecs) * vals, axis=0) / np.linalg.norm(vecs, axis=0)
    full = np.zeros((system.n_dofs, count))
    full[system.free_dofs] = vecs
    return SpectralResult(
        eigenvalues=np.asarray(vals),
        eigenvectors=full,
        mesh_h=system.mesh_h,
        residuals=res,
        multiplicities=_group_multiplicities(vals),
        element_size=system.element_size,
    )


def offset_modes(patch, a, count, target_h):
    """Dirichlet eigenvalues on the surface enlarged by a boundary margin ``a``."""
    if a < 0:
        raise ValueError("margin must be non-negative")
    grown = patch if a == 0 else patch.with_domain(patch.offset_domain(a))
    return solve_modes(assemble(build_mesh(grown, target_h)), count)


def richardson_extrapolate(hs, values, order=None, order_bounds=(0.5, 8.0)):
    """Extrapolate values(h) = v + C h^p to h -> 0 from the three finest levels.

    With ``order`` None, p is solved from the three levels; if the data are
    not in the asymptotic regime (no bracket) the finest value is returned
    with p = nan.
    """
    hs = np.asarray(hs, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(hs) < 2:
        return float(v[-1]), np.nan
    if order is not None or len(hs) == 2:
        p = order if order is not None else 2.0
        r = (hs[-2] / hs[-1]) ** p
        return float(v[-1] + (v[-1] - v[-2]) / (r - 1.0)), float(p)
    h1, h2, h3 = hs[-3:]
    v1, v2, v3 = v[-3:]
    d12, d23 = v1 - v2, v2 - v3
    if d12 == 0 or d23 == 0 or np.sign(d12) != np.sign(d23):
        return float(v3), np.nan
    ratio = d12 / d23

    def f(p):
        return (h1**p - h2**p) / (h2**p - h3**p) - ratio

    lo, hi = order_bounds
    if f(lo) * f(hi) > 0:
        return float(v3), np.nan
    p = brentq(f, lo, hi)
    C = d23 / (h2**p - h3**p)
    return float(v3 - C * h3**p), float(p)


class SurfaceModeSolver(BaseEstimator):
    """Richardson-extrapolated comparison eigenvalues μ_j^D on a patch.

    ``fit(patch)`` solves on ``n_levels`` meshes with target sizes
    ``target_h / refinement**k`` and extrapolates each eigenvalue.

    Attributes after fit: ``eigenvalues_`` (extrapolated), ``level_eigenvalues_``
    (n_levels, n_modes), ``level_h_``, ``orders_``, ``results_``.
    """

    def __init__(self, n_modes=3, target_h=0.1, n_levels=3, refinement=2.0, margin=0.0):
        self.n_modes = n_modes
        self.target_h = target_h
        self.n_levels = n_levels
        self.refinement = refinement
        self.margin = margin

    def fit(self, patch, y=None):
        if self.n_levels < 1:
            raise ValueError("n_levels must be at least 1")
        results = []
        for k in range(self.n_levels):
            h = self.target_h / self.refinement**k
            results.append(offset_modes(patch, self.margin, self.n_modes, h))
        self.results_ = results
        # meshes are not nested; the rms element size is the smoothest scale
        self.level_h_ = np.array([r.element_size for r in results])
        self.level_eigenvalues_ = np.array([r.eigenvalues for r in results])
        ext = [richardson_extrapolate(self.level_h_, self.level_eigenvalues_[:, j]) for j in range(self.n_modes)]
        self.eigenvalues_ = np.array([e[0] for e in ext])
        self.orders_ = np.array([e[1] for e in ext])
        return self


__all__ = [
    "SpectralResult",
    "StiffnessSystem",
    "SurfaceModeSolver",
    "assemble",
    "offset_modes",
    "richardson_extrapolate",
    "solve_modes",
]
