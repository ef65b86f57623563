"""Analytic surface charts, pointwise differential geometry and the tube map.

Every chart maps a planar parameter domain into R^3 and supplies closed-form
first and second derivatives, so curvature data are exact up to floating
point.  Batched evaluation is the default: parameter arrays of shape
(..., 2) give jets whose fields carry the same leading shape.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, ImmersionError, OutOfTubeError

_DET_TOL = 1e-14


# --------------------------------------------------------------------------
# parameter domains


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    kind = "rectangle"

    def contains(self, Y, tol=1e-12):
        Y = np.asarray(Y, dtype=float)
        return (
            (Y[..., 0] >= self.x0 - tol)
            & (Y[..., 0] <= self.x1 + tol)
            & (Y[..., 1] >= self.y0 - tol)
            & (Y[..., 1] <= self.y1 + tol)
        )

    def on_boundary(self, Y, tol=1e-9):
        Y = np.asarray(Y, dtype=float)
        d = np.minimum.reduce(
            [
                np.abs(Y[..., 0] - self.x0),
                np.abs(Y[..., 0] - self.x1),
                np.abs(Y[..., 1] - self.y0),
                np.abs(Y[..., 1] - self.y1),
            ]
        )
        return d <= tol

    def snap(self, Y):
        return np.asarray(Y, dtype=float)

    def grown(self, dx0, dx1, dy0, dy1):
        return Rectangle(self.x0 - dx0, self.x1 + dx1, self.y0 - dy0, self.y1 + dy1)

    @property
    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def sample(self, rng, n):
        """n points uniformly distributed in the rectangle."""
        u = rng.random((n, 2))
        return np.stack([self.x0 + u[:, 0] * (self.x1 - self.x0), self.y0 + u[:, 1] * (self.y1 - self.y0)], axis=1)


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple = (0.0, 0.0)

    kind = "disk"

    def contains(self, Y, tol=1e-12):
        Y = np.asarray(Y, dtype=float) - np.asarray(self.center)
        return np.hypot(Y[..., 0], Y[..., 1]) <= self.radius + tol

    def on_boundary(self, Y, tol=1e-9):
        Y = np.asarray(Y, dtype=float) - np.asarray(self.center)
        return np.abs(np.hypot(Y[..., 0], Y[..., 1]) - self.radius) <= tol

    def snap(self, Y):
        """Radial projection onto the boundary circle."""
        c = np.asarray(self.center)
        Y = np.asarray(Y, dtype=float) - c
        rho = np.hypot(Y[..., 0], Y[..., 1])[..., None]
        return c + self.radius * Y / rho

    @property
    def area(self):
        return np.pi * self.radius**2

    def sample(self, rng, n):
        if not np.isfinite(self.radius):
            raise DomainError("cannot sample an unbounded disk uniformly")
        rho = self.radius * np.sqrt(rng.random(n))
        phi = 2 * np.pi * rng.random(n)
        return np.asarray(self.center) + np.stack([rho * np.cos(phi), rho * np.sin(phi)], axis=1)


@dataclass(frozen=True)
class Polygon:
    """Simple polygon given by counter-clockwise vertices."""

    vertices: tuple

    kind = "polygon"

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise ValueError("polygon needs at least three 2D vertices")
        x, y = V[:, 0], V[:, 1]
        signed = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if signed < 0:
            V = V[::-1]
        object.__setattr__(self, "vertices", tuple(map(tuple, V)))

    @property
    def array(self):
        return np.asarray(self.vertices, dtype=float)

    def contains(self, Y, tol=1e-12):
        Y = np.asarray(Y, dtype=float)
        V = self.array
        x, y = Y[..., 0][..., None], Y[..., 1][..., None]
        x1, y1 = V[:, 0], V[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside = np.count_nonzero(crosses & (x < xint), axis=-1) % 2 == 1
        return inside | (self.boundary_distance(Y) <= tol)

    def boundary_distance(self, Y):
        Y = np.asarray(Y, dtype=float)
        V = self.array
        A = V
        B = np.roll(V, -1, axis=0)
        AB = B - A
        t = np.einsum("...ki,ki->...k", Y[..., None, :] - A, AB) / np.sum(AB**2, axis=1)
        t = np.clip(t, 0.0, 1.0)
        P = A + t[..., None] * AB
        return np.min(np.linalg.norm(Y[..., None, :] - P, axis=-1), axis=-1)

    def on_boundary(self, Y, tol=1e-9):
        return self.boundary_distance(Y) <= tol

    def snap(self, Y):
        return np.asarray(Y, dtype=float)

    def offset(self, distances):
        """Move every edge outward by ``distances[k]`` (mitre joins)."""
        V = self.array
        n = len(V)
        d = np.broadcast_to(np.asarray(distances, dtype=float), (n,))
        E = np.roll(V, -1, axis=0) - V
        normals = np.stack([E[:, 1], -E[:, 0]], axis=1)
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        new = []
        for k in range(n):
            # vertex k joins edge k-1 and edge k
            n1, n2 = normals[k - 1], normals[k]
            p1 = V[k] + d[k - 1] * n1
            p2 = V[k] + d[k] * n2
            M = np.array([n1, n2])
            rhs = np.array([n1 @ p1, n2 @ p2])
            new.append(np.linalg.solve(M, rhs))
        return Polygon(tuple(map(tuple, new)))

    @property
    def area(self):
        V = self.array
        x, y = V[:, 0], V[:, 1]
        return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)

    def sample(self, rng, n):
        """Rejection sampling from the bounding box."""
        V = self.array
        lo, hi = V.min(axis=0), V.max(axis=0)
        out = np.empty((0, 2))
        while len(out) < n:
            cand = lo + rng.random((2 * n, 2)) * (hi - lo)
            out = np.concatenate([out, cand[self.contains(cand)]])
        return out[:n]


# --------------------------------------------------------------------------
# pointwise geometry


@dataclass
class GeometryJet:
    """First and second order surface data at one or many points.

    ``tangents`` has shape (..., 2, 3): row ``a`` is the derivative of the
    chart along parameter ``a``.  Curvatures are eigenvalues of the shape
    operator ``-dν`` for the stored orientation, ordered ``k1 >= k2``.
    """

    point: np.ndarray
    tangents: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    inverse_metric: np.ndarray
    area_density: np.ndarray
    second_form: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    gauss: np.ndarray = field(init=False)
    mean: np.ndarray = field(init=False)

    def __post_init__(self):
        self.gauss = self.k1 * self.k2
        self.mean = 0.5 * (self.k1 + self.k2)


def _jet_from_derivatives(X, D1, D2, orientation):
    """Assemble a GeometryJet from chart derivatives.

    X: (..., 3), D1: (..., 3, 2), D2: (..., 3, 2, 2).
    """
    T = np.swapaxes(D1, -1, -2)  # (..., 2, 3)
    g = np.einsum("...ai,...bi->...ab", T, T)
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    if np.any(det <= _DET_TOL):
        raise ImmersionError("degenerate metric: det g <= %.1e" % _DET_TOL)
    ginv = np.empty_like(g)
    ginv[..., 0, 0] = g[..., 1, 1] / det
    ginv[..., 1, 1] = g[..., 0, 0] / det
    ginv[..., 0, 1] = ginv[..., 1, 0] = -g[..., 0, 1] / det
    n = np.cross(T[..., 0, :], T[..., 1, :])
    n = orientation * n / np.linalg.norm(n, axis=-1, keepdims=True)
    II = np.einsum("...iab,...i->...ab", D2, n)
    II = 0.5 * (II + np.swapaxes(II, -1, -2))
    # eigenvalues of g^{-1} II through its invariants
    gauss = (II[..., 0, 0] * II[..., 1, 1] - II[..., 0, 1] ** 2) / det
    mean = 0.5 * np.einsum("...ab,...ba->...", ginv, II)
    disc = np.sqrt(np.maximum(mean**2 - gauss, 0.0))
    return GeometryJet(
        point=X,
        tangents=T,
        normal=n,
        metric=g,
        inverse_metric=ginv,
        area_density=np.sqrt(det),
        second_form=II,
        k1=mean + disc,
        k2=mean - disc,
    )


def curvature_potential(jet):
    """Effective potential W = K - M^2 of the comparison operator.

    Evaluated in the algebraically equivalent form -(k1 - k2)^2 / 4, which
    keeps the sign W <= 0 exact in floating point.
    """
    return -0.25 * (jet.k1 - jet.k2) ** 2


# --------------------------------------------------------------------------
# charts


class SurfacePatch:
    """Parametrised surface patch S = Φ(D).

    Subclasses implement :meth:`chart_derivatives`.  ``orientation`` (+1 or
    -1) multiplies the chart normal ∂₁Φ × ∂₂Φ / |∂₁Φ × ∂₂Φ|.
    """

    name = "patch"
    closed = False

    @property
    def smooth_boundary(self):
        """Whether the image of ∂D is smooth (disk domains) or only Lipschitz (corners)."""
        return self.closed or isinstance(self.domain, Disk)

    def __init__(self, domain, orientation=1):
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.domain = domain
        self.orientation = orientation

    # subclasses: return X (...,3), D1 (...,3,2), D2 (...,3,2,2)
    def chart_derivatives(self, Y):
        raise NotImplementedError

    def chart(self, Y):
        return self.chart_derivatives(Y)[0]

    def jet(self, y, check_domain=True):
        """Differential geometry at parameter point(s) ``y``."""
        Y = np.asarray(y, dtype=float)
        if check_domain and not np.all(self.domain.contains(Y, tol=1e-9)):
            raise DomainError("parameter point outside the patch domain")
        return _jet_from_derivatives(*self.chart_derivatives(Y), self.orientation)

    def tube_point(self, y, t, a):
        """Tube map F(s, t) = s + t ν(s) with s = Φ(y); requires |t| < a."""
        t = np.asarray(t, dtype=float)
        if a <= 0:
            raise ValueError("tube half-width must be positive")
        if np.any(np.abs(t) >= a):
            raise OutOfTubeError(f"|t| must be below the tube half-width {a}")
        j = self.jet(y)
        return j.point + t[..., None] * j.normal

    def flipped(self):
        new = self.__class__.__new__(self.__class__)
        new.__dict__.update(self.__dict__)
        new.orientation = -self.orientation
        return new

    def with_domain(self, domain):
        new = self.__class__.__new__(self.__class__)
        new.__dict__.update(self.__dict__)
        new.domain = domain
        self.check_chart_domain(domain)
        return new

    def check_chart_domain(self, domain):
        """Raise DomainError when ``domain`` leaves the region the chart covers."""

    def stretch(self, Y):
        """Largest physical length per unit parameter length at Y."""
        j = self.jet(Y, check_domain=False)
        g = j.metric
        tr = g[..., 0, 0] + g[..., 1, 1]
        det = j.area_density**2
        return np.sqrt(0.5 * tr + np.sqrt(np.maximum(0.25 * tr**2 - det, 0.0)))

    def offset_domain(self, margin):
        """Parameter domain grown so the physical boundary moves out by ``margin``.

        First-order calibration: each boundary point moves along the
        parameter-space normal by margin / |∂Φ/∂n|.
        """
        if margin == 0:
            return self.domain
        dom = self.domain
        if isinstance(dom, Disk):
            c = np.asarray(dom.center)
            th = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
            dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
            j = self.jet(c + dom.radius * dirs, check_domain=False)
            grad_len = np.sqrt(np.einsum("ka,kab,kb->k", dirs, j.inverse_metric, dirs))
            return Disk(dom.radius + margin * np.mean(grad_len), dom.center)
        if isinstance(dom, Rectangle):
            s = np.linspace(0.0, 1.0, 33)
            sides = {
                "x0": (np.stack([np.full_like(s, dom.x0), dom.y0 + s * (dom.y1 - dom.y0)], 1), 0),
                "x1": (np.stack([np.full_like(s, dom.x1), dom.y0 + s * (dom.y1 - dom.y0)], 1), 0),
                "y0": (np.stack([dom.x0 + s * (dom.x1 - dom.x0), np.full_like(s, dom.y0)], 1), 1),
                "y1": (np.stack([dom.x0 + s * (dom.x1 - dom.x0), np.full_like(s, dom.y1)], 1), 1),
            }
            grow = {}
            for key, (pts, axis) in sides.items():
                j = self.jet(pts, check_domain=False)
                # parameter displacement whose physical normal length is margin
                ginv = j.inverse_metric[:, axis, axis]
                grow[key] = margin * np.mean(np.sqrt(ginv))
            return dom.grown(grow["x0"], grow["x1"], grow["y0"], grow["y1"])
        if isinstance(dom, Polygon):
            V = dom.array
            mids = 0.5 * (V + np.roll(V, -1, axis=0))
            E = np.roll(V, -1, axis=0) - V
            nrm = np.stack([E[:, 1], -E[:, 0]], axis=1)
            nrm /= np.linalg.norm(nrm, axis=1)[:, None]
            j = self.jet(mids, check_domain=False)
            # parameter displacement whose physical normal length is margin
            grad_len = np.sqrt(np.einsum("ka,kab,kb->k", nrm, j.inverse_metric, nrm))
            return dom.offset(margin * grad_len)
        raise DomainError(f"cannot offset domain {dom!r}")

    def sample_parameters(self, rng, n):
        """n parameter points uniformly distributed in the domain."""
        return self.domain.sample(rng, n)

    def profile(self):
        """Generating curve for surfaces of revolution about the z axis, else None."""
        return None

    def describe(self):
        return {"name": self.name}


class FlatRectangle(SurfacePatch):
    """Planar rectangle Φ(y) = (y₁, y₂, 0)."""

    name = "flat_rectangle"

    def __init__(self, width=1.0, height=1.0, orientation=1):
        super().__init__(Rectangle(0.0, width, 0.0, height), orientation)
        self.width = width
        self.height = height

    def chart_derivatives(self, Y):
        Y = np.asarray(Y, dtype=float)
        X = np.concatenate([Y, np.zeros(Y.shape[:-1] + (1,))], axis=-1)
        D1 = np.zeros(Y.shape[:-1] + (3, 2))
        D1[..., 0, 0] = 1.0
        D1[..., 1, 1] = 1.0
        D2 = np.zeros(Y.shape[:-1] + (3, 2, 2))
        return X, D1, D2

    def describe(self):
        return {"name": self.name, "width": self.width, "height": self.height}


class FlatDisk(FlatRectangle):
    """Planar disk of the given radius centred at the origin."""

    name = "flat_disk"

    def __init__(self, radius=1.0, orientation=1):
        SurfacePatch.__init__(self, Disk(radius), orientation)
        self.radius = radius

    def profile(self):
        from .axisym import ProfileCurve

        R = self.domain.radius
        return ProfileCurve(
            length=R,
            rz=lambda s: (s, np.zeros_like(s)),
            closed_start=True,
            closed_end=False,
            name="disk",
        )

    def describe(self):
        return {"name": self.name, "radius": self.domain.radius}


class FlatPolygon(FlatRectangle):
    """Planar polygon; its corners make the boundary Lipschitz but not C²."""

    name = "flat_polygon"

    def __init__(self, vertices, orientation=1):
        SurfacePatch.__init__(self, Polygon(tuple(map(tuple, vertices))), orientation)

    def describe(self):
        return {"name": self.name, "vertices": self.domain.vertices}


class SphericalCap(SurfacePatch):
    """Cap {polar angle ≤ α} of the sphere of radius R, stereographic chart.

    Φ(y) = R (2y, 1 - |y|²) / (1 + |y|²) sends y = 0 to the north pole and
    |y| = tan(α/2) to the rim.  α = π/2 is the hemisphere.  The chart normal
    points outward, where the shape operator -dν has eigenvalues -1/R.
    """

    name = "spherical_cap"

    def __init__(self, polar_angle=np.pi / 2, radius=1.0, orientation=1):
        if not 0 < polar_angle < np.pi:
            raise ValueError("polar angle must lie in (0, pi)")
        super().__init__(Disk(np.tan(polar_angle / 2)), orientation)
        self.radius = radius

    @property
    def polar_angle(self):
        return 2 * np.arctan(self.domain.radius)

    def chart_derivatives(self, Y):
        Y = np.asarray(Y, dtype=float)
        R = self.radius
        q = 1.0 + np.sum(Y**2, axis=-1)
        e = np.eye(2)
        X = R * np.concatenate([2 * Y / q[..., None], (2.0 / q - 1.0)[..., None]], axis=-1)
        D1 = np.empty(Y.shape[:-1] + (3, 2))
        # ∂_a (2 y / q) = 2 e_a / q - 4 y y_a / q²
        D1[..., :2, :] = 2 * e / q[..., None, None] - 4 * Y[..., :, None] * Y[..., None, :] / q[..., None, None] ** 2
        D1[..., 2, :] = -4 * Y / q[..., None] ** 2
        D1 *= R
        D2 = np.empty(Y.shape[:-1] + (3, 2, 2))
        q2 = q[..., None, None] ** 2
        q3 = q[..., None, None] ** 3
        ya = Y[..., :, None]
        yb = Y[..., None, :]
        for i in range(2):
            yi = Y[..., i][..., None, None]
            # ∂_b ∂_a (2 y_i / q)
            D2[..., i, :, :] = (
                -4 * (e[i][:, None] * yb + e[i][None, :] * ya + yi * e) / q2
                + 16 * yi * ya * yb / q3
            )
        D2[..., 2, :, :] = -4 * e / q2 + 16 * ya * yb / q3
        D2 *= R
        return X, D1, D2

    def check_chart_domain(self, domain):
        if not isinstance(domain, Disk) or domain.radius > 1e3:
            raise DomainError("cap domain must stay a disk away from the south pole")

    def profile(self):
        from .axisym import ProfileCurve

        R = self.radius
        return ProfileCurve(
            length=R * self.polar_angle,
            rz=lambda s: (R * np.sin(s / R), R * np.cos(s / R)),
            closed_start=True,
            closed_end=False,
            name="cap",
        )

    def describe(self):
        return {"name": self.name, "polar_angle": self.polar_angle, "radius": self.radius}


class TorusPatch(SurfacePatch):
    """Rectangle of the torus ((R + r cos v) cos u, (R + r cos v) sin u, r sin v).

    Parameters are y = (u, v).  The chart normal points away from the core
    circle; pass ``orientation=-1`` for the inward normal, for which the
    outer equator has k1 = 1/r, k2 = 1/(R + r).
    """

    name = "torus_patch"

    def __init__(self, R=2.0, r=1.0, u_range=(-0.5, 0.5), v_range=(-0.5, 0.5), orientation=1):
        if not R > r > 0:
            raise ValueError("need R > r > 0")
        super().__init__(Rectangle(u_range[0], u_range[1], v_range[0], v_range[1]), orientation)
        self.check_chart_domain(self.domain)
        self.R = R
        self.r = r

    def chart_derivatives(self, Y):
        Y = np.asarray(Y, dtype=float)
        u, v = Y[..., 0], Y[..., 1]
        R, r = self.R, self.r
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        rho = R + r * cv
        X = np.stack([rho * cu, rho * su, r * sv], axis=-1)
        D1 = np.empty(Y.shape[:-1] + (3, 2))
        D1[..., :, 0] = np.stack([-rho * su, rho * cu, np.zeros_like(u)], axis=-1)
        D1[..., :, 1] = np.stack([-r * sv * cu, -r * sv * su, r * cv], axis=-1)
        D2 = np.empty(Y.shape[:-1] + (3, 2, 2))
        D2[..., :, 0, 0] = np.stack([-rho * cu, -rho * su, np.zeros_like(u)], axis=-1)
        D2[..., :, 0, 1] = np.stack([r * sv * su, -r * sv * cu, np.zeros_like(u)], axis=-1)
        D2[..., :, 1, 0] = D2[..., :, 0, 1]
        D2[..., :, 1, 1] = np.stack([-r * cv * cu, -r * cv * su, -r * sv], axis=-1)
        return X, D1, D2

    def check_chart_domain(self, domain):
        if not isinstance(domain, Rectangle):
            raise DomainError("torus patch needs a rectangular domain")
        if domain.x1 - domain.x0 >= 2 * np.pi or domain.y1 - domain.y0 >= 2 * np.pi:
            raise DomainError("torus patch must not wrap around")

    def describe(self):
        d = self.domain
        return {"name": self.name, "R": self.R, "r": self.r, "u_range": (d.x0, d.x1), "v_range": (d.y0, d.y1)}


class EllipticParaboloid(SurfacePatch):
    """Graph z = (c₁ y₁² + c₂ y₂²) / 2 over a disk of the given radius."""

    name = "elliptic_paraboloid"

    def __init__(self, c1=1.0, c2=0.5, radius=1.0, orientation=1):
        super().__init__(Disk(radius), orientation)
        self.c1 = c1
        self.c2 = c2

    def chart_derivatives(self, Y):
        Y = np.asarray(Y, dtype=float)
        c = np.array([self.c1, self.c2])
        z = 0.5 * np.sum(c * Y**2, axis=-1)
        X = np.concatenate([Y, z[..., None]], axis=-1)
        D1 = np.zeros(Y.shape[:-1] + (3, 2))
        D1[..., 0, 0] = 1.0
        D1[..., 1, 1] = 1.0
        D1[..., 2, :] = c * Y
        D2 = np.zeros(Y.shape[:-1] + (3, 2, 2))
        D2[..., 2, 0, 0] = self.c1
        D2[..., 2, 1, 1] = self.c2
        return X, D1, D2

    def describe(self):
        return {"name": self.name, "c1": self.c1, "c2": self.c2, "radius": self.domain.radius}


class Sphere(SphericalCap):
    """Closed sphere of radius R.

    Not a single chart: meshes come from a subdivided icosahedron projected
    radially.  Pointwise queries use the stereographic chart from the north
    pole, which covers everything but the south pole.
    """

    name = "sphere"
    closed = True

    def __init__(self, radius=1.0, orientation=1):
        SurfacePatch.__init__(self, Disk(np.inf), orientation)
        self.radius = radius

    @property
    def polar_angle(self):
        return np.pi

    def jet(self, y, check_domain=False):
        return super().jet(y, check_domain=False)

    def offset_domain(self, margin):
        raise DomainError("a closed surface has no boundary to offset")

    def sample_parameters(self, rng, n):
        """Stereographic coordinates of points uniform on the sphere."""
        x = rng.standard_normal((n, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        return x[:, :2] / (1.0 + x[:, 2:3])

    def profile(self):
        from .axisym import ProfileCurve

        R = self.radius
        return ProfileCurve(
            length=np.pi * R,
            rz=lambda s: (R * np.sin(s / R), R * np.cos(s / R)),
            closed_start=True,
            closed_end=True,
            name="sphere",
        )

    def describe(self):
        return {"name": self.name, "radius": self.radius}


# --------------------------------------------------------------------------
# catalog

CATALOG = {
    "flat_disk": FlatDisk,
    "flat_rectangle": FlatRectangle,
    "flat_polygon": FlatPolygon,
    "spherical_cap": SphericalCap,
    "hemisphere": lambda radius=1.0, orientation=1: SphericalCap(np.pi / 2, radius, orientation),
    "torus_patch": TorusPatch,
    "elliptic_paraboloid": EllipticParaboloid,
    "sphere": Sphere,
}


def make_surface(name, **params):
    """Build a catalog surface by name, e.g. ``make_surface("torus_patch", R=2, r=1)``."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown surface {name!r}; known: {sorted(CATALOG)}") from None
    return factory(**params)


def jet(patch, y):
    return patch.jet(y)


def tube_point(patch, y, t, a):
    return patch.tube_point(y, t, a)


__all__ = [
    "CATALOG",
    "Disk",
    "EllipticParaboloid",
    "FlatDisk",
    "FlatPolygon",
    "FlatRectangle",
    "GeometryJet",
    "Polygon",
    "Rectangle",
    "Sphere",
    "SphericalCap",
    "SurfacePatch",
    "TorusPatch",
    "curvature_potential",
    "jet",
    "make_surface",
    "tube_point",
]
