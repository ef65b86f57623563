"""Triangulations of surface patches with curved (chart-exact) elements.

A :class:`SurfaceMesh` stores vertices in parameter space and on the
surface.  Each triangle is mapped from the reference triangle by a quadratic
isoparametric map in parameter space followed by the exact chart, so
element geometry is exact up to the polygonal-to-quadratic approximation of
curved parameter boundaries.  Closed spheres use radial projection of a
subdivided icosahedron instead of a chart.
"""

import io

import numpy as np
from scipy.spatial import Delaunay

from .exceptions import MeshError
from .geometry import Disk, Polygon, Rectangle, Sphere, _jet_from_derivatives, curvature_potential
from .quadrature import triangle_rule

_LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


def shape_p1(ref):
    ref = np.asarray(ref, dtype=float)
    x, y = ref[..., 0], ref[..., 1]
    return np.stack([1.0 - x - y, x, y], axis=-1)


def shape_p2(ref):
    """Quadratic Lagrange shape functions and reference gradients.

    Node order: three vertices, then midpoints of edges (0,1), (1,2), (2,0).
    Returns N (..., 6) and dN (..., 6, 2).
    """
    ref = np.asarray(ref, dtype=float)
    x, y = ref[..., 0], ref[..., 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    N = np.stack(
        [l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0],
        axis=-1,
    )
    # ∂λ/∂(x, y): λ0 -> (-1, -1), λ1 -> (1, 0), λ2 -> (0, 1)
    g0 = np.array([-1.0, -1.0])
    g1 = np.array([1.0, 0.0])
    g2 = np.array([0.0, 1.0])
    e = [
        (4 * l0 - 1)[..., None] * g0,
        (4 * l1 - 1)[..., None] * g1,
        (4 * l2 - 1)[..., None] * g2,
        4 * (l0[..., None] * g1 + l1[..., None] * g0),
        4 * (l1[..., None] * g2 + l2[..., None] * g1),
        4 * (l2[..., None] * g0 + l0[..., None] * g2),
    ]
    dN = np.stack(e, axis=-2)
    return N, dN


class SurfaceMesh:
    """Triangulated surface patch with quadrature data.

    Attributes
    ----------
    surface : SurfacePatch
    params : (V, 2) parameter coordinates, or None for the closed sphere
    points : (V, 3) vertex positions on the surface
    triangles : (T, 3) vertex indices, counter-clockwise in parameter space
    edges : (E, 2) sorted vertex pairs; ``tri_edges`` (T, 3) indexes them
    boundary_vertices, boundary_edges : indices on ∂S
    quad_points, quad_weights, quad_potential : quadrature nodes (T, q, 3),
        weights (T, q) carrying the area element, and W = K - M² at the nodes
    """

    def __init__(self, surface, points, triangles, params=None, target_h=None, quad_degree=4):
        self.surface = surface
        self.points = np.asarray(points, dtype=float)
        self.triangles = np.asarray(triangles, dtype=np.int64)
        self.params = None if params is None else np.asarray(params, dtype=float)
        self.target_h = target_h
        self._build_topology()
        self.quad_ref, ref_w = triangle_rule(quad_degree)
        self.quad_ref_weights = ref_w
        x, J, W = self.element_geometry(np.arange(self.n_triangles), self.quad_ref)
        self.quad_points = x
        self.quad_weights = ref_w * _area_element(J)
        self.quad_potential = W
        if np.any(self.quad_weights <= 0):
            raise MeshError("inverted or degenerate triangle")

    # ------------------------------------------------------------------
    def _build_topology(self):
        T = self.triangles
        if T.ndim != 2 or T.shape[1] != 3:
            raise MeshError("triangles must be index triples")
        pairs = np.sort(T[:, _LOCAL_EDGES].reshape(-1, 2), axis=1)
        edges, inverse, counts = np.unique(pairs, axis=0, return_inverse=True, return_counts=True)
        self.edges = edges
        self.tri_edges = inverse.reshape(-1, 3)
        if np.any(counts > 2):
            raise MeshError("non-manifold edge")
        self.boundary_edges = np.flatnonzero(counts == 1)
        self.boundary_vertices = np.unique(edges[self.boundary_edges])
        if self.params is not None:
            mid = 0.5 * (self.params[edges[:, 0]] + self.params[edges[:, 1]])
            if len(self.boundary_edges):
                mid[self.boundary_edges] = self.surface.domain.snap(mid[self.boundary_edges])
            self.edge_params = mid
        else:
            self.edge_params = None

    @property
    def n_vertices(self):
        return len(self.points)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def closed(self):
        return len(self.boundary_edges) == 0

    @property
    def h(self):
        """Largest physical (chord) edge length."""
        e = self.points[self.edges[:, 1]] - self.points[self.edges[:, 0]]
        return float(np.max(np.linalg.norm(e, axis=1)))

    @property
    def area(self):
        return float(self.quad_weights.sum())

    @property
    def element_size(self):
        """Root-mean-square element size sqrt(area / T), a smooth resolution measure."""
        return float(np.sqrt(self.area / self.n_triangles))

    # ------------------------------------------------------------------
    def element_geometry(self, tri, ref, potential=True):
        """Map reference points to the surface.

        ``tri`` has shape (K,), ``ref`` shape (n, 2) or (K, n, 2).  Returns
        positions (K, n, 3), Jacobians d x / d ref (K, n, 3, 2) and, when
        ``potential`` is set, W = K - M² at the points (K, n).
        """
        tri = np.asarray(tri, dtype=np.int64)
        ref = np.asarray(ref, dtype=float)
        if ref.ndim == 2:
            ref = np.broadcast_to(ref, (len(tri),) + ref.shape)
        if self.params is None:
            return self._sphere_geometry(tri, ref, potential)
        nodes = np.concatenate(
            [self.params[self.triangles[tri]], self.edge_params[self.tri_edges[tri]]], axis=1
        )  # (K, 6, 2)
        N, dN = shape_p2(ref)  # (K, n, 6), (K, n, 6, 2)
        y = np.einsum("knj,kjd->knd", N, nodes)
        dy = np.einsum("knja,kjd->knda", dN, nodes)
        X, D1, D2 = self.surface.chart_derivatives(y)
        J = np.einsum("knia,knab->knib", D1, dy)
        W = None
        if potential:
            jet = _jet_from_derivatives(X, D1, D2, self.surface.orientation)
            W = curvature_potential(jet)
        return X, J, W

    def _sphere_geometry(self, tri, ref, potential):
        R = self.surface.radius
        V = self.points[self.triangles[tri]] / R  # (K, 3, 3)
        L = shape_p1(ref)  # (K, n, 3)
        p = np.einsum("knj,kjd->knd", L, V)
        dp = np.stack([V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]], axis=-1)  # (K, 3, 2)
        norm = np.linalg.norm(p, axis=-1)
        xh = p / norm[..., None]
        P = np.eye(3) - xh[..., :, None] * xh[..., None, :]
        J = R * np.einsum("knij,kja->knia", P, dp) / norm[..., None, None]
        W = np.zeros(p.shape[:-1]) if potential else None
        return R * xh, J, W

    def parameter_of(self, tri, ref):
        """Parameter coordinates of reference points (chart meshes only)."""
        if self.params is None:
            raise MeshError("closed sphere meshes have no global parameter")
        nodes = np.concatenate([self.params[self.triangles[tri]], self.edge_params[self.tri_edges[tri]]], axis=1)
        N, _ = shape_p2(np.broadcast_to(ref, (len(np.atleast_1d(tri)),) + np.shape(ref)[-2:]))
        return np.einsum("knj,kjd->knd", N, nodes)

    # ------------------------------------------------------------------
    def to_text(self):
        """Plain-text triangle list: vertex table (x y z u v), then index triples."""
        buf = io.StringIO()
        buf.write(f"# surface {self.surface.name}\n")
        buf.write(f"vertices {self.n_vertices}\n")
        par = self.params if self.params is not None else np.full((self.n_vertices, 2), np.nan)
        for p, q in zip(self.points, par):
            buf.write("%.17g %.17g %.17g %.17g %.17g\n" % (p[0], p[1], p[2], q[0], q[1]))
        buf.write(f"triangles {self.n_triangles}\n")
        for t in self.triangles:
            buf.write("%d %d %d\n" % tuple(t))
        return buf.getvalue()

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_text())


def read_mesh_text(text):
    """Parse :meth:`SurfaceMesh.to_text` output into (points, params, triangles)."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head, nv = lines[0].split()
    if head != "vertices":
        raise MeshError("expected 'vertices' header")
    nv = int(nv)
    table = np.array([list(map(float, ln.split())) for ln in lines[1 : 1 + nv]]).reshape(nv, 5)
    head, nt = lines[1 + nv].split()
    if head != "triangles":
        raise MeshError("expected 'triangles' header")
    tris = np.array([list(map(int, ln.split())) for ln in lines[2 + nv : 2 + nv + int(nt)]], dtype=np.int64)
    return table[:, :3], table[:, 3:], tris.reshape(-1, 3)


def _area_element(J):
    g = np.einsum("...ia,...ib->...ab", J, J)
    return np.sqrt(np.maximum(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2, 0.0))


# --------------------------------------------------------------------------
# mesh generation


def build_mesh(patch, target_h, quad_degree=4):
    """Triangulate ``patch`` with physical edge lengths of about ``target_h``."""
    if not target_h > 0:
        raise ValueError("target_h must be positive")
    if isinstance(patch, Sphere):
        pts, tris = _icosphere(patch.radius, target_h)
        return SurfaceMesh(patch, pts, tris, None, target_h, quad_degree)
    dom = patch.domain
    if isinstance(dom, Rectangle):
        params, tris = _rectangle_grid(patch, dom, target_h)
    elif isinstance(dom, Disk):
        params, tris = _disk_rings(patch, dom, target_h)
    elif isinstance(dom, Polygon):
        params, tris = _polygon_mesh(patch, dom, target_h)
    else:
        raise MeshError(f"no mesher for domain {dom!r}")
    tris = _orient_ccw(params, tris)
    pts = patch.chart(params)
    return SurfaceMesh(patch, pts, tris, params, target_h, quad_degree)


def _orient_ccw(params, tris):
    a, b, c = params[tris[:, 0]], params[tris[:, 1]], params[tris[:, 2]]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tris = tris.copy()
    flip = det < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    keep = np.abs(det) > 1e-14 * np.max(np.abs(det))
    return tris[keep]


def _rectangle_grid(patch, dom, h):
    s = np.linspace(0.0, 1.0, 41)
    U, V = np.meshgrid(dom.x0 + s * (dom.x1 - dom.x0), dom.y0 + s * (dom.y1 - dom.y0), indexing="ij")
    j = patch.jet(np.stack([U, V], axis=-1), check_domain=False)
    sx = np.sqrt(j.metric[..., 0, 0].max())
    sy = np.sqrt(j.metric[..., 1, 1].max())
    # even counts put a grid line through the middle of each side
    nx = 2 * max(1, int(np.ceil((dom.x1 - dom.x0) * sx / (2 * h))))
    ny = 2 * max(1, int(np.ceil((dom.y1 - dom.y0) * sy / (2 * h))))
    xs = np.linspace(dom.x0, dom.x1, nx + 1)
    ys = np.linspace(dom.y0, dom.y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    params = np.stack([X.ravel(), Y.ravel()], axis=1)
    idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[1:, :-1].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[:-1, 1:].ravel()
    tris = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])
    return params, tris


def _disk_rings(patch, dom, h):
    c = np.asarray(dom.center, dtype=float)
    R0 = dom.radius
    th = np.linspace(0.0, 2 * np.pi, 48, endpoint=False)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    tang = np.stack([-np.sin(th), np.cos(th)], axis=1)
    rho = np.linspace(0.0, R0, 201)
    Y = c + rho[:, None, None] * dirs[None]
    g = patch.jet(Y, check_domain=False).metric
    s_r = np.sqrt(np.einsum("ka,rkab,kb->rk", dirs, g, dirs).max(axis=1))
    s_t = np.sqrt(np.einsum("ka,rkab,kb->rk", tang, g, tang).max(axis=1))
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (s_r[1:] + s_r[:-1]) * np.diff(rho))])
    n_r = max(2, int(np.ceil(arc[-1] / h)))
    radii = np.interp(np.linspace(0.0, arc[-1], n_r + 1), arc, rho)
    pts = [c[None, :]]
    for k, r in enumerate(radii[1:], start=1):
        n_k = max(6, int(np.ceil(2 * np.pi * r * np.interp(r, rho, s_t) / h)))
        phi = 2 * np.pi * (np.arange(n_k) + 0.5 * (k % 2)) / n_k
        pts.append(c + r * np.stack([np.cos(phi), np.sin(phi)], axis=1))
    params = np.concatenate(pts)
    try:
        tris = Delaunay(params).simplices
    except Exception as exc:  # scipy raises QhullError
        raise MeshError(f"Delaunay triangulation failed: {exc}") from exc
    return params, tris


def _polygon_mesh(patch, dom, h):
    V = dom.array
    if dom.area <= 1e-12:
        raise MeshError("degenerate polygon")
    # physical stretch bound over the polygon's bounding box
    lo, hi = V.min(axis=0), V.max(axis=0)
    s = np.linspace(0, 1, 21)
    G = np.stack(np.meshgrid(lo[0] + s * (hi[0] - lo[0]), lo[1] + s * (hi[1] - lo[1]), indexing="ij"), -1)
    hp = h / float(patch.stretch(G).max())
    bpts = []
    for k in range(len(V)):
        a, b = V[k], V[(k + 1) % len(V)]
        n = max(1, int(np.ceil(np.linalg.norm(b - a) / hp)))
        t = np.arange(n) / n
        bpts.append(a + t[:, None] * (b - a))
    bpts = np.concatenate(bpts)
    # triangular lattice inside
    dy = hp * np.sqrt(3) / 2
    ys = np.arange(lo[1], hi[1] + dy, dy)
    rows = []
    for i, y in enumerate(ys):
        xs = np.arange(lo[0] + (0.5 * hp if i % 2 else 0.0), hi[0] + hp, hp)
        rows.append(np.stack([xs, np.full_like(xs, y)], axis=1))
    lat = np.concatenate(rows)
    inside = dom.contains(lat) & (dom.boundary_distance(lat) > 0.5 * hp)
    params = np.concatenate([bpts, lat[inside]])
    try:
        tris = Delaunay(params).simplices
    except Exception as exc:
        raise MeshError(f"Delaunay triangulation failed: {exc}") from exc
    cent = params[tris].mean(axis=1)
    tris = tris[dom.contains(cent) & ~dom.on_boundary(cent, tol=1e-12)]
    a, b, c = params[tris[:, 0]], params[tris[:, 1]], params[tris[:, 2]]
    area = 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    if abs(area.sum() - dom.area) > 1e-8 * dom.area:
        raise MeshError("triangulation does not conform to the polygon boundary")
    return params, tris


def _icosphere(R, h):
    t = (1.0 + np.sqrt(5.0)) / 2.0
    V = np.array(
        [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
         [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]],
        dtype=float,
    )
    V /= np.linalg.norm(V, axis=1)[:, None]
    F = np.array(
        [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
         [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
         [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    )
    edge = np.linalg.norm(V[0] - V[11])
    # projected sub-edges are at most ~1.2x the flat ones
    n = max(1, int(np.ceil(1.2 * R * edge / h)))
    key = {}
    pts = []

    def vid(p):
        q = p / np.linalg.norm(p)
        k = tuple(np.round(q, 12))
        if k not in key:
            key[k] = len(pts)
            pts.append(q)
        return key[k]

    tris = []
    for a, b, c in F:
        A, B, C = V[a], V[b], V[c]
        grid = {}
        for i in range(n + 1):
            for j in range(n + 1 - i):
                grid[i, j] = vid(A + (B - A) * i / n + (C - A) * j / n)
        for i in range(n):
            for j in range(n - i):
                tris.append([grid[i, j], grid[i + 1, j], grid[i, j + 1]])
                if i + j < n - 1:
                    tris.append([grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1]])
    pts = R * np.array(pts)
    tris = np.array(tris, dtype=np.int64)
    # outward orientation
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), a) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return pts, tris
