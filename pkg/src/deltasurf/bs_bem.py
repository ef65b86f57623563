"""Birman–Schwinger single layer with Yukawa kernel and the bound-state search.

For λ = -κ² < 0 the operator Q_κ h(t) = ∫_S e^{-κ|t-s|}/(4π|t-s|) h(s) dσ(s)
is compact, positive and strictly decreasing in κ.  λ is an eigenvalue of
the δ-interaction Hamiltonian exactly when β μ_j(Q_κ) = 1 for some j, and
the eigenfunction is the layer potential of the corresponding density h.

Triangle meshes use continuous piecewise-linear densities with exact
curved geometry.  Touching panel pairs are integrated with relative
coordinate rules that cancel the 1/r singularity; near pairs use a finer
tensor rule; everything else a symmetric six point rule.
"""

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from .axisym import AxisymmetricLayer
from .exceptions import ConvergenceError, MeshError
from .mesh import shape_p1
from .quadrature import collapsed_rule, duffy_split_rule, sauter_schwab_rule, triangle_rule

FOUR_PI = 4.0 * np.pi


def yukawa(r, kappa):
    """e^{-κr} / (4πr)."""
    return np.exp(-kappa * r) / (FOUR_PI * r)


def yukawa_gradient(diff, kappa):
    """∇_x of e^{-κ|x-y|}/(4π|x-y|) for diff = x - y, shape (..., 3)."""
    r = np.linalg.norm(diff, axis=-1)
    f = -(1.0 + kappa * r) * np.exp(-kappa * r) / (FOUR_PI * r**3)
    return f[..., None] * diff


def _area_element(J):
    g11 = np.einsum("...i,...i->...", J[..., 0], J[..., 0])
    g22 = np.einsum("...i,...i->...", J[..., 1], J[..., 1])
    g12 = np.einsum("...i,...i->...", J[..., 0], J[..., 1])
    det = g11 * g22 - g12**2
    if np.any(det <= 0):
        raise MeshError("degenerate triangle in layer quadrature")
    return np.sqrt(det)


def _symmetrized(rule):
    """Average a product rule with its x <-> y mirror image."""
    x, y, w = rule
    return np.concatenate([x, y]), np.concatenate([y, x]), np.concatenate([w, w]) * 0.5


def _ordering(triK, triL):
    """Local vertex orders putting shared vertices first, sorted by global index."""
    shared = np.intersect1d(triK, triL)
    permK = [int(np.nonzero(triK == v)[0][0]) for v in shared]
    permL = [int(np.nonzero(triL == v)[0][0]) for v in shared]
    permK += [i for i in range(3) if i not in permK]
    permL += [i for i in range(3) if i not in permL]
    return len(shared), tuple(permK), tuple(permL)


def _to_original(ref, perm):
    """Reference points in a permuted vertex frame -> the triangle's own frame."""
    lam = np.stack([1.0 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]], axis=1)
    out = np.empty_like(lam)
    out[:, list(perm)] = lam
    return out[:, 1:]


@dataclass
class _PairGroup:
    K: np.ndarray  # (n,) triangle indices
    L: np.ndarray
    refK: np.ndarray  # (q, 2)
    refL: np.ndarray
    weights: np.ndarray  # (q,)
    r: np.ndarray = None  # cached (n, q) distances
    w: np.ndarray = None  # cached (n, q) weights times area elements


class TriangleLayer:
    """Assembly engine for one mesh; reuses geometry across values of κ.

    Parameters
    ----------
    mesh : SurfaceMesh
    orders : (identical, edge, vertex) points per direction of the
        relative-coordinate rules.
    near_factor : pairs whose centroids are closer than near_factor times
        the largest panel diameter use ``near_points`` per direction.
    cache_limit : maximum number of cached near-field node pairs.
    """

    def __init__(self, mesh, orders=(5, 4, 4), near_factor=1.5, near_points=4, cache_limit=4e7):
        self.mesh = mesh
        self.orders = orders
        self.near_factor = near_factor
        self.near_points = near_points
        self.cache_limit = cache_limit
        tri = mesh.triangles
        T = mesh.n_triangles
        self.ref, self.ref_w = triangle_rule(4)
        X, J, _ = mesh.element_geometry(np.arange(T), self.ref, potential=False)
        self.X = X  # (T, q, 3)
        self.wdA = self.ref_w * _area_element(J)  # (T, q)
        q = len(self.ref_w)
        N = shape_p1(self.ref)  # (q, 3)
        cols = np.arange(T * q)
        rows = tri[:, None, :].repeat(q, axis=1).reshape(-1, 3)
        vals = (N[None] * self.wdA[..., None]).reshape(-1, 3)
        self.P = sp.csr_matrix(
            (vals.ravel(), (rows.ravel(), np.repeat(cols, 3))), shape=(mesh.n_vertices, T * q)
        )
        self.diameter = float(
            np.max(np.linalg.norm(mesh.points[tri] - mesh.points[np.roll(tri, 1, axis=1)], axis=-1))
        )
        self._build_pairs()
        self._mass = None

    # -- pair classification --------------------------------------------
    def _build_pairs(self):
        mesh = self.mesh
        tri = mesh.triangles
        T = mesh.n_triangles
        inc = sp.csr_matrix((np.ones(3 * T), (np.repeat(np.arange(T), 3), tri.ravel())), shape=(T, mesh.n_vertices))
        share = sp.triu(inc @ inc.T).tocoo()
        touching = set(zip(share.row.tolist(), share.col.tolist()))
        centroids = mesh.points[tri].mean(axis=1)
        tree = cKDTree(centroids)
        close = tree.query_pairs(self.near_factor * self.diameter, output_type="ndarray")
        near = [(int(a), int(b)) for a, b in close if (min(a, b), max(a, b)) not in touching]

        rules = {
            3: sauter_schwab_rule("identical", self.orders[0]),
            2: _symmetrized(sauter_schwab_rule("edge", self.orders[1])),
            1: sauter_schwab_rule("vertex", self.orders[2]),
        }
        buckets = {}
        for K, L in zip(share.row, share.col):
            count, pK, pL = _ordering(tri[K], tri[L])
            buckets.setdefault((count, pK, pL), []).append((K, L))
        groups = []
        for (count, pK, pL), pairs in sorted(buckets.items()):
            x, y, w = rules[count]
            pairs = np.array(pairs)
            groups.append(_PairGroup(pairs[:, 0], pairs[:, 1], _to_original(x, pK), _to_original(y, pL), w))
        if near:
            pts, wts = collapsed_rule(self.near_points)
            n2 = len(wts)
            refK = np.repeat(pts, n2, axis=0)
            refL = np.tile(pts, (n2, 1))
            pairs = np.array(near)
            groups.append(_PairGroup(pairs[:, 0], pairs[:, 1], refK, refL, np.outer(wts, wts).ravel()))
        self.groups = groups
        allK = np.concatenate([g.K for g in groups])
        allL = np.concatenate([g.L for g in groups])
        # ordered pairs excluded from the regular rule
        self.masked = (np.concatenate([allK, allL]), np.concatenate([allL, allK]))
        self.n_near_nodes = int(sum(len(g.K) * len(g.weights) for g in groups))
        self.cached = self.n_near_nodes <= self.cache_limit

    def _group_geometry(self, g, sl):
        K, L = g.K[sl], g.L[sl]
        xK, JK, _ = self.mesh.element_geometry(K, g.refK, potential=False)
        xL, JL, _ = self.mesh.element_geometry(L, g.refL, potential=False)
        r = np.linalg.norm(xK - xL, axis=-1)
        w = g.weights * _area_element(JK) * _area_element(JL)
        return r, w

    def _iter_groups(self, chunk=2_000_000):
        for g in self.groups:
            if self.cached and g.r is not None:
                yield g, slice(None), g.r, g.w
                continue
            step = max(1, chunk // len(g.weights))
            if self.cached:
                parts = [self._group_geometry(g, slice(i, i + step)) for i in range(0, len(g.K), step)]
                g.r = np.concatenate([p[0] for p in parts])
                g.w = np.concatenate([p[1] for p in parts])
                yield g, slice(None), g.r, g.w
            else:
                for i in range(0, len(g.K), step):
                    sl = slice(i, i + step)
                    r, w = self._group_geometry(g, sl)
                    yield g, sl, r, w

    # -- matrices ----------------------------------------------------------
    def mass(self, lumped=False):
        """Gram matrix of the hat functions in L²(S) (dense)."""
        if self._mass is None:
            N = shape_p1(self.ref)
            loc = np.einsum("qa,qb,tq->tab", N, N, self.wdA)
            tri = self.mesh.triangles
            rows = np.repeat(tri, 3, axis=1).ravel()
            cols = np.tile(tri, (1, 3)).ravel()
            n = self.mesh.n_vertices
            self._mass = sp.coo_matrix((loc.ravel(), (rows, cols)), shape=(n, n)).toarray()
        if lumped:
            return np.diag(self._mass.sum(axis=1))
        return self._mass

    def _regular(self, kernel, chunk_rows=2000):
        T, q = self.wdA.shape
        Xf = self.X.reshape(-1, 3)
        sq = np.einsum("ij,ij->i", Xf, Xf)
        mK, mL = self.masked
        order = np.argsort(mK, kind="stable")
        mK, mL = mK[order], mL[order]
        PT = self.P.T.tocsr()
        out = np.zeros((self.mesh.n_vertices, self.mesh.n_vertices))
        tstep = max(1, chunk_rows // q)
        ar = np.arange(q)
        for t0 in range(0, T, tstep):
            t1 = min(T, t0 + tstep)
            rows = slice(t0 * q, t1 * q)
            d2 = sq[rows, None] + sq[None, :] - 2.0 * Xf[rows] @ Xf.T
            r = np.sqrt(np.maximum(d2, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                G = kernel(r)
            lo, hi = np.searchsorted(mK, [t0, t1])
            kk, ll = mK[lo:hi] - t0, mL[lo:hi]
            ri = (kk[:, None] * q + ar)[:, :, None]
            ci = (ll[:, None] * q + ar)[:, None, :]
            G[np.broadcast_to(ri, (len(kk), q, q)), np.broadcast_to(ci, (len(kk), q, q))] = 0.0
            # self pairs are masked too, so no inf from r = 0 survives
            out += self.P[:, rows] @ (G @ PT)
        return out

    def _near(self, kernel, out):
        tri = self.mesh.triangles
        for g, sl, r, w in self._iter_groups():
            NK = shape_p1(g.refK)
            NL = shape_p1(g.refL)
            vals = w * kernel(r)
            blk = np.einsum("nq,qa,qb->nab", vals, NK, NL)
            K, L = g.K[sl], g.L[sl]
            rows = np.repeat(tri[K], 3, axis=1).ravel()
            cols = np.tile(tri[L], (1, 3)).ravel()
            np.add.at(out, (rows, cols), blk.ravel())
            off = K != L
            if np.any(off):
                b2 = np.swapaxes(blk[off], 1, 2)
                rows = np.repeat(tri[L[off]], 3, axis=1).ravel()
                cols = np.tile(tri[K[off]], (1, 3)).ravel()
                np.add.at(out, (rows, cols), b2.ravel())
        return out

    def assemble(self, kernel):
        """Galerkin matrix ∫∫ φ_i(x) k(|x - y|) φ_j(y) for a radial kernel k(r)."""
        out = self._regular(kernel)
        return self._near(kernel, out)

    def operator(self, kappa, lumped=False):
        if kappa < 0:
            raise ValueError("kappa must be non-negative")
        A = self.assemble(lambda r: yukawa(r, kappa))
        asym = float(np.max(np.abs(A - A.T)) / np.max(np.abs(A)))
        A = 0.5 * (A + A.T)
        return LayerOperator(kappa=float(kappa), matrix=A, mass=self.mass(lumped), basis="p1", asymmetry=asym)

    def eigenpairs(self, kappa, count, lumped=False):
        return bs_eigenpairs(self.operator(kappa, lumped), count)

    def norm_matrix(self, kappa):
        """Matrix of ‖u‖²_{L²(ℝ³)} for u the layer potential of a P1 density."""
        if kappa <= 0:
            raise ValueError("the L² norm of the layer potential needs kappa > 0")

        def kern(r):
            return np.exp(-kappa * r) / (8.0 * np.pi * kappa)

        T, q = self.wdA.shape
        Xf = self.X.reshape(-1, 3)
        out = np.zeros((self.mesh.n_vertices,) * 2)
        step = max(1, 2000 // q) * q
        PT = self.P.T.tocsr()
        sq = np.einsum("ij,ij->i", Xf, Xf)
        for i in range(0, T * q, step):
            r = np.sqrt(np.maximum(sq[i : i + step, None] + sq[None] - 2 * Xf[i : i + step] @ Xf.T, 0.0))
            out += self.P[:, i : i + step] @ (kern(r) @ PT)
        return 0.5 * (out + out.T)


@dataclass
class LayerOperator:
    """Galerkin single layer at decay κ together with its Gram matrix."""

    kappa: float
    matrix: np.ndarray
    mass: np.ndarray
    basis: str = "p1"
    asymmetry: float = 0.0


def assemble_layer(mesh, kappa, lumped=False, **options):
    """Single-layer Galerkin operator on a triangle mesh."""
    return TriangleLayer(mesh, **options).operator(kappa, lumped)


def bs_eigenpairs(op, count):
    n = op.matrix.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}]")
    try:
        vals, vecs = sla.eigh(op.matrix, op.mass, subset_by_index=[n - count, n - 1])
    except (sla.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"generalized eigensolver failed: {exc}") from exc
    return vals[::-1], vecs[:, ::-1]


def bs_eigenvalues(op, count):
    """Largest ``count`` eigenvalues μ₁ ≥ … of the pencil (matrix, mass)."""
    return bs_eigenpairs(op, count)[0]


# ---------------------------------------------------------------------------
# bound states


@dataclass
class BoundStateResult:
    beta: float
    eigenvalues: list
    kappas: list
    densities: list
    residuals: list
    multiplicities: list = field(default_factory=list)
    trace_defects: list = field(default_factory=list)
    discretization: object = None
    iterations: list = field(default_factory=list)

    @property
    def count(self):
        return len(self.eigenvalues)

    def to_csv(self, header=True):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["beta", "j", "E_j", "kappa_j", "bisection_residual", "trace_defect"])
        for j in range(self.count):
            E, k, res = self.eigenvalues[j], self.kappas[j], self.residuals[j]
            td = self.trace_defects[j] if j < len(self.trace_defects) else None
            w.writerow([repr(float(self.beta)), j + 1, _fmt(E), _fmt(k), _fmt(res, "%.3e"), _fmt(td, "%.6e")])
        return buf.getvalue()


def _fmt(v, spec=None):
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return spec % v if spec else repr(float(v))


def _as_discretization(obj):
    if isinstance(obj, (TriangleLayer, AxisymmetricLayer)):
        return obj
    if hasattr(obj, "triangles"):
        return TriangleLayer(obj)
    raise TypeError("expected a SurfaceMesh, TriangleLayer or AxisymmetricLayer")


class _Spectrum:
    """Memoized layer eigenvalues of a discretization as functions of κ."""

    def __init__(self, disc, count, lumped=False):
        self.disc = disc
        self.count = count
        self.lumped = lumped
        self.cache = {}

    def __call__(self, kappa):
        kappa = float(kappa)
        if kappa not in self.cache:
            if isinstance(self.disc, AxisymmetricLayer):
                vals, _ = self.disc.layer_eigenvalues(kappa, self.count)
                self.cache[kappa] = (vals, None)
            else:
                self.cache[kappa] = self.disc.eigenpairs(kappa, self.count, self.lumped)
        return self.cache[kappa]


def solve_bound_states(mesh, beta, count=1, tol=1e-6, max_iter=60, lumped=False, normalize=True):
    """Negative eigenvalues E_j = -κ_j² from β μ_j(κ_j) = 1, j = 1..count.

    ``mesh`` may be a SurfaceMesh, a prepared TriangleLayer, or an
    AxisymmetricLayer (eigenvalues only; no densities).  μ_j decreases
    strictly in κ, so each root is bracketed: κ ∈ [0, β] for j = 1 and
    κ ∈ [0, κ_{j-1}] afterwards.  The root is found by Brent's method, which
    keeps the bracket of plain bisection and converges faster.  Entries for
    which no bound state exists are None.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if count < 1:
        raise ValueError("count must be at least 1")
    disc = _as_discretization(mesh)
    spec = _Spectrum(disc, count, lumped)
    E, kap, dens, res, its = [], [], [], [], []
    hi = float(beta)
    for j in range(count):

        def f(k, j=j):
            return beta * spec(k)[0][j] - 1.0

        f0 = f(0.0)
        if f0 <= 0:
            E.append(None), kap.append(None), dens.append(None), res.append(None), its.append(0)
            hi = 0.0
            continue
        if f(hi) > 0:
            if hi == beta:
                warnings.warn(f"no sign change of beta*mu_{j + 1} - 1 on [0, beta]; bound state {j + 1} not reported")
            E.append(None), kap.append(None), dens.append(None), res.append(None), its.append(0)
            continue
        n0 = len(spec.cache)
        k, info = brentq(f, 0.0, hi, xtol=1e-13 * max(1.0, beta), rtol=1e-14, maxiter=max_iter, full_output=True)
        r = abs(f(k))
        if r > tol:
            # finish with bisection on the final bracket
            lo_, hi_ = (k, hi) if f(k) > 0 else (0.0, k)
            for _ in range(max_iter):
                mid = 0.5 * (lo_ + hi_)
                fm = f(mid)
                if fm > 0:
                    lo_ = mid
                else:
                    hi_ = mid
                k, r = mid, abs(fm)
                if r <= tol:
                    break
            if r > tol:
                raise ConvergenceError(
                    f"root for state {j + 1} not resolved: |beta*mu - 1| = {r:.2e}",
                    partial=(E, kap),
                )
        E.append(-k * k)
        kap.append(k)
        res.append(r)
        its.append(len(spec.cache) - n0)
        vecs = spec(k)[1]
        if vecs is not None:
            v = vecs[:, j].copy()
            if normalize and k > 0:
                nrm = np.sqrt(v @ disc.norm_matrix(k) @ v)
                v /= nrm
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            dens.append(v)
        else:
            dens.append(None)
        hi = k
    result = BoundStateResult(
        beta=float(beta),
        eigenvalues=E,
        kappas=kap,
        densities=dens,
        residuals=res,
        multiplicities=_multiplicities(E),
        discretization=disc,
        iterations=its,
    )
    return result


def _multiplicities(E, rel=1e-8):
    groups, prev = [], None
    for e in E:
        if e is not None and prev is not None and abs(e - prev) <= rel * abs(e):
            groups[-1] += 1
        else:
            groups.append(1)
        prev = e
    return groups


# ---------------------------------------------------------------------------
# layer potentials off and on the surface


def _foot_reference(mesh, K, x):
    """Barycentric foot point of x on the flat triangle through K's vertices, clipped."""
    V = mesh.points[mesh.triangles[K]]  # (n, 3, 3)
    e1, e2 = V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]
    d = x - V[:, 0]
    G = np.stack(
        [np.stack([np.sum(e1 * e1, -1), np.sum(e1 * e2, -1)], -1), np.stack([np.sum(e2 * e1, -1), np.sum(e2 * e2, -1)], -1)],
        -2,
    )
    rhs = np.stack([np.sum(d * e1, -1), np.sum(d * e2, -1)], -1)
    st = np.linalg.solve(G, rhs[..., None])[..., 0]
    s, t = st[:, 0], st[:, 1]
    s, t = np.clip(s, 0, 1), np.clip(t, 0, 1)
    over = s + t > 1
    tot = np.where(over, s + t, 1.0)
    return np.stack([s / tot, t / tot], axis=-1)


def layer_potential(layer, coeffs, kappa, X, gradient=False, near_factor=2.0, n_near=8, n_close=16):
    """Evaluate u(x) = ∫_S G_κ(x - s) h(s) dσ(s) at points X (n, 3).

    Panels within ``near_factor`` diameters of x are integrated with a
    Duffy split centred at the foot point of x; points closer to S than the
    quadrature node spacing trigger a warning and a finer split.
    Returns values (n,) or, with ``gradient``, (values, gradients (n, 3)).
    """
    mesh = layer.mesh
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T, q = layer.wdA.shape
    Xf = layer.X.reshape(-1, 3)
    hq = (shape_p1(layer.ref) @ coeffs[mesh.triangles].T).T.ravel() * layer.wdA.ravel()  # (T q,)
    centroids = mesh.points[mesh.triangles].mean(axis=1)
    tree = cKDTree(centroids)
    spacing = layer.diameter / np.sqrt(q)
    u = np.zeros(len(X))
    du = np.zeros((len(X), 3)) if gradient else None
    for i, x in enumerate(X):
        near = np.array(sorted(tree.query_ball_point(x, near_factor * layer.diameter + 1e-300)), dtype=np.int64)
        mask = np.ones(T, dtype=bool)
        mask[near] = False
        wq = hq.reshape(T, q)[mask].ravel()
        diff = x - Xf.reshape(T, q, 3)[mask].reshape(-1, 3)
        r = np.linalg.norm(diff, axis=-1)
        u[i] = np.sum(wq * yukawa(r, kappa))
        if gradient:
            du[i] = wq @ yukawa_gradient(diff, kappa)
        if len(near) == 0:
            continue
        foot = _foot_reference(mesh, near, np.broadcast_to(x, (len(near), 3)))
        xs, _, _ = mesh.element_geometry(near, foot[:, None, :], potential=False)
        dist = float(np.min(np.linalg.norm(xs[:, 0] - x, axis=-1)))
        n = n_near
        if 0 < dist < spacing:
            warnings.warn(f"evaluation point within {dist:.2e} of the surface; using a refined near-field rule")
            n = n_close
        pts, wts = duffy_split_rule(foot, n)
        xn, Jn, _ = mesh.element_geometry(near, pts, potential=False)
        w = wts * _area_element(Jn) * np.einsum("kqa,ka->kq", shape_p1(pts), coeffs[mesh.triangles[near]])
        diff = x - xn
        r = np.linalg.norm(diff, axis=-1)
        ok = w != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            u[i] += np.sum(np.where(ok, w * yukawa(r, kappa), 0.0))
            if gradient:
                du[i] += np.einsum("kq,kqd->d", np.where(ok, w, 0.0), np.where(ok[..., None], yukawa_gradient(diff, kappa), 0.0))
    return (u, du) if gradient else u


def reconstruct_eigenfunction(result, j, X, gradient=False):
    """Eigenfunction u_j at points off the surface, from the density h_j."""
    disc = result.discretization
    if not isinstance(disc, TriangleLayer):
        raise TypeError("reconstruction needs a triangle-mesh result")
    if result.eigenvalues[j] is None:
        raise ValueError(f"bound state {j + 1} was not found")
    return layer_potential(disc, result.densities[j], result.kappas[j], X, gradient)


def density_l1(layer, coeffs, n=6):
    """‖h‖_{L¹(S)} by a rule independent of the assembly nodes."""
    pts, wts = collapsed_rule(n)
    T = layer.mesh.n_triangles
    _, J, _ = layer.mesh.element_geometry(np.arange(T), pts, potential=False)
    h = shape_p1(pts) @ coeffs[layer.mesh.triangles].T  # (q, T)
    return float(np.sum(np.abs(h.T) * wts * _area_element(J)))


def surface_trace(layer, coeffs, kappa, n_self=6, near_factor=1.5):
    """Trace of the layer potential at the mesh quadrature nodes, shape (T, q).

    The panel carrying the node and its neighbours are integrated with a
    Duffy split at the (clipped) foot point, which removes the 1/r
    singularity of the on-surface integral.
    """
    mesh = layer.mesh
    T, q = layer.wdA.shape
    Xf = layer.X.reshape(-1, 3)
    hq = ((shape_p1(layer.ref) @ coeffs[mesh.triangles].T).T * layer.wdA).ravel()
    tree = cKDTree(mesh.points[mesh.triangles].mean(axis=1))
    out = np.zeros(T * q)
    sq = np.einsum("ij,ij->i", Xf, Xf)
    lists = tree.query_ball_point(mesh.points[mesh.triangles].mean(axis=1), near_factor * layer.diameter)
    for K in range(T):
        near = np.array(sorted(set(lists[K]) | {K}), dtype=np.int64)
        rows = slice(K * q, (K + 1) * q)
        r = np.sqrt(np.maximum(sq[rows, None] + sq[None] - 2 * Xf[rows] @ Xf.T, 0.0))
        with np.errstate(divide="ignore"):
            G = yukawa(r, kappa)
        G.reshape(q, T, q)[:, near, :] = 0.0
        out[rows] = G @ hq
        # near panels, one target node at a time
        for a in range(q):
            x = layer.X[K, a]
            foot = _foot_reference(mesh, near, np.broadcast_to(x, (len(near), 3)))
            foot[near == K] = layer.ref[a]
            pts, wts = duffy_split_rule(foot, n_self)
            xn, Jn, _ = mesh.element_geometry(near, pts, potential=False)
            w = wts * _area_element(Jn) * np.einsum("kqa,ka->kq", shape_p1(pts), coeffs[mesh.triangles[near]])
            rr = np.linalg.norm(x - xn, axis=-1)
            ok = (w != 0) & (rr > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                out[K * q + a] += np.sum(np.where(ok, w * yukawa(rr, kappa), 0.0))
    return out.reshape(T, q)


def trace_consistency(result, j):
    """Relative L²(S) defect ‖h - β u|_S‖ / ‖h‖ at the assembly nodes."""
    disc = result.discretization
    if not isinstance(disc, TriangleLayer):
        raise TypeError("trace consistency needs a triangle-mesh result")
    if result.eigenvalues[j] is None:
        raise ValueError(f"bound state {j + 1} was not found")
    c = result.densities[j]
    h = (shape_p1(disc.ref) @ c[disc.mesh.triangles].T).T
    u = surface_trace(disc, c, result.kappas[j])
    d = h - result.beta * u
    defect = float(np.sqrt(np.sum(disc.wdA * d * d) / np.sum(disc.wdA * h * h)))
    while len(result.trace_defects) < result.count:
        result.trace_defects.append(None)
    result.trace_defects[j] = defect
    return defect


class BoundStateSolver(BaseEstimator):
    """Estimator wrapper: ``fit(mesh)`` solves, ``predict(X)`` evaluates u_j.

    Attributes after fit: ``result_``, ``eigenvalues_``, ``kappas_``.
    """

    def __init__(self, beta=20.0, n_states=1, state=0, tol=1e-6, max_iter=60, lumped=False):
        self.beta = beta
        self.n_states = n_states
        self.state = state
        self.tol = tol
        self.max_iter = max_iter
        self.lumped = lumped

    def fit(self, X, y=None):
        self.result_ = solve_bound_states(X, self.beta, self.n_states, self.tol, self.max_iter, self.lumped)
        self.eigenvalues_ = np.array([np.nan if e is None else e for e in self.result_.eigenvalues])
        self.kappas_ = np.array([np.nan if k is None else k for k in self.result_.kappas])
        return self

    def predict(self, X):
        from ._validation import check_points, check_fitted

        check_fitted(self, "result_")
        X = check_points(X)
        return reconstruct_eigenfunction(self.result_, self.state, X)

    def score(self, X=None, y=None):
        """Negative trace defect of the selected state (higher is better)."""
        from ._validation import check_fitted

        check_fitted(self, "result_")
        return -trace_consistency(self.result_, self.state)
