"""β sweeps of the bound-state energies and fits of the remainder.

Each record compares E_j(β) + β²/4 with the comparison eigenvalue μ_j^D of
-Δ_S + K - M² on S.  A record counts as converged when a finer BEM
discretization moves E_j by less than |remainder|.
"""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_betas, check_fitted
from .axisym import AxisymmetricLayer
from .bs_bem import TriangleLayer, solve_bound_states
from .exceptions import InsufficientDataError, ValidityError
from .mesh import build_mesh
from .surface_fem import SurfaceModeSolver
from .transverse1d import separated_upper_bound

SWEEP_COLUMNS = ["beta", "j", "E_j", "shifted", "muD_j", "remainder", "upper_bound", "converged"]


@dataclass
class SweepRecord:
    beta: float
    j: int
    E_j: float | None
    muD_j: float
    upper_bound: float | None = None
    converged: bool = False
    E_coarse: float | None = None
    boundary_class: str = "smooth"
    discretization: dict = field(default_factory=dict)
    note: str = ""

    @property
    def shifted(self):
        return None if self.E_j is None else self.E_j + self.beta**2 / 4

    @property
    def remainder(self):
        s = self.shifted
        return None if s is None else s - self.muD_j

    def row(self):
        return [self.beta, self.j, self.E_j, self.shifted, self.muD_j, self.remainder, self.upper_bound, self.converged]


@dataclass
class RateFit:
    fitted_c: float
    max_rel_misfit: float
    monotone_flag: bool
    betas: np.ndarray
    remainders: np.ndarray
    model: str = "c*log(beta)/beta"
    applicable: bool = True


def boundary_class(patch):
    if getattr(patch, "closed", False):
        return "closed"
    return "smooth" if patch.smooth_boundary else "lipschitz"


def comparison_eigenvalues(patch, count, target_h=0.2, n_levels=3):
    """Richardson-extrapolated μ_1^D … μ_count^D of the patch."""
    return SurfaceModeSolver(n_modes=count, target_h=target_h, n_levels=n_levels).fit(patch).eigenvalues_


def _discretizations(patch, method, resolution):
    if method == "auto":
        method = "axisymmetric" if patch.profile() is not None else "mesh"
    if method == "axisymmetric":
        curve = patch.profile()
        if curve is None:
            raise ValueError(f"{patch.name} is not a surface of revolution")
        base = AxisymmetricLayer(curve, **(resolution or {}))
        return base, base.refined()
    if method == "mesh":
        h = (resolution or {}).get("target_h", 0.3)
        coarse = TriangleLayer(build_mesh(patch, h))
        # halving the element area doubles the panel count
        fine = TriangleLayer(build_mesh(patch, h / np.sqrt(2.0)))
        return coarse, fine
    raise ValueError(f"unknown method {method!r}")


def _describe(disc):
    if isinstance(disc, AxisymmetricLayer):
        return {"kind": "axisymmetric", "n_dofs": disc.n_dofs, "h": disc.h}
    return {"kind": "mesh", "n_dofs": disc.mesh.n_vertices, "h": disc.mesh.h, "panels": disc.mesh.n_triangles}


def sweep(
    patch,
    betas,
    j_max=1,
    muD=None,
    method="auto",
    resolution=None,
    xi=6.0,
    C_geom=1.0,
    jobs=1,
    fem_h=0.2,
):
    """Records (β, j) for every β and j ≤ j_max, in (β, j) order.

    ``muD`` may supply the comparison eigenvalues; otherwise they are
    computed once on a three-level mesh ladder.  A β for which no bound
    state exists yields records with E_j None rather than fabricated data.
    """
    betas = check_betas(betas)
    if muD is None:
        muD = comparison_eigenvalues(patch, j_max, target_h=fem_h)
    muD = np.asarray(muD, dtype=float)
    if len(muD) < j_max:
        raise ValueError("need a comparison eigenvalue for every j")
    base, fine = _discretizations(patch, method, resolution)
    bclass = boundary_class(patch)

    def solve(beta):
        return solve_bound_states(base, beta, j_max), solve_bound_states(fine, beta, j_max)

    if jobs > 1:
        # warm lazy caches so worker threads only read shared state
        solve(float(betas[0]))
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(solve, betas))
    else:
        solved = [solve(b) for b in betas]

    records = []
    for beta, (res, res_fine) in zip(betas, solved):
        for j in range(j_max):
            E0 = res.eigenvalues[j]
            E1 = res_fine.eigenvalues[j]
            rec = SweepRecord(
                beta=float(beta),
                j=j + 1,
                E_j=E1,
                muD_j=float(muD[j]),
                E_coarse=E0,
                boundary_class=bclass,
                discretization={"coarse": _describe(base), "fine": _describe(fine)},
            )
            if E1 is None or E0 is None:
                rec.note = "no bound state"
            else:
                rec.converged = bool(abs(E1 - E0) < abs(rec.remainder))
                if not rec.converged:
                    rec.note = f"refinement moved E by {abs(E1 - E0):.3g}"
                try:
                    rec.upper_bound = float(separated_upper_bound(muD[j], beta, xi, C_geom))
                except ValidityError as exc:
                    rec.note = (rec.note + "; " if rec.note else "") + str(exc)
            records.append(rec)
    return records


def fit_rate(records, j=1, min_records=4, min_span=8.0):
    """Least-squares fit |remainder| ≈ c log β / β through the origin.

    Only converged records of state j enter.  The fit needs at least
    ``min_records`` values spanning a factor ``min_span`` in β.  For
    patches with corners only the monotone trend is reported.
    """
    recs = sorted((r for r in records if r.j == j and r.E_j is not None and r.converged), key=lambda r: r.beta)
    if len(recs) < min_records:
        raise InsufficientDataError(f"{len(recs)} converged records for j={j}; need {min_records}")
    b = np.array([r.beta for r in recs])
    if b[-1] / b[0] < min_span:
        raise InsufficientDataError(f"betas span a factor {b[-1] / b[0]:.3g}; need {min_span}")
    rem = np.abs(np.array([r.remainder for r in recs]))
    monotone = bool(np.all(np.diff(rem) < 0))
    if any(r.boundary_class == "lipschitz" for r in recs):
        return RateFit(np.nan, np.nan, monotone, b, rem, applicable=False)
    x = np.log(b) / b
    c = float(x @ rem / (x @ x))
    with np.errstate(divide="ignore", invalid="ignore"):
        mis = np.where(rem > 0, np.abs(c * x - rem) / rem, np.where(c * x == 0, 0.0, np.inf))
    return RateFit(c, float(np.max(mis)), monotone, b, rem)


def cross_check_bounds(records, C_geom=1.0, xi=6.0):
    """Upper-bound checks E_j ≤ separated bound; one report row per record."""
    report = []
    for r in records:
        row = {"beta": r.beta, "j": r.j, "E_j": r.E_j, "bound": None, "passed": None, "reason": ""}
        if r.E_j is None:
            row["reason"] = "below bound-state threshold"
        else:
            try:
                row["bound"] = float(separated_upper_bound(r.muD_j, r.beta, xi, C_geom))
                row["passed"] = bool(r.E_j <= row["bound"])
            except ValidityError as exc:
                row["reason"] = str(exc)
        report.append(row)
    return report


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def records_to_csv(records, preamble=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if preamble:
        buf.write(preamble)
    w.writerow(SWEEP_COLUMNS)
    for r in records:
        w.writerow([_cell(v) for v in r.row()])
    return buf.getvalue()


def remainder_svg(records, fit=None, j=1, width=480, height=360):
    """Standalone log-log SVG of |remainder| against β with the log β / β reference."""
    recs = sorted((r for r in records if r.j == j and r.E_j is not None), key=lambda r: r.beta)
    pts = [(r.beta, abs(r.remainder)) for r in recs if r.remainder != 0]
    m = 50
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if pts:
        bx = np.log10([p[0] for p in pts])
        ry = np.log10([p[1] for p in pts])
        ref = None
        if fit is not None and fit.applicable and np.isfinite(fit.fitted_c) and fit.fitted_c > 0:
            bb = np.linspace(bx.min(), bx.max(), 50)
            ref = (bb, np.log10(fit.fitted_c * np.log(10**bb) / 10**bb))
        lo_x, hi_x = bx.min() - 0.1, bx.max() + 0.1
        ys = np.concatenate([ry, ref[1]]) if ref is not None else ry
        lo_y, hi_y = ys.min() - 0.2, ys.max() + 0.2

        def sx(v):
            return m + (v - lo_x) / (hi_x - lo_x) * (width - 2 * m)

        def sy(v):
            return height - m - (v - lo_y) / (hi_y - lo_y) * (height - 2 * m)

        out.append(
            f'<path d="M{m},{m} V{height - m} H{width - m}" stroke="black" fill="none"/>'
            f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">log10 beta</text>'
            f'<text x="14" y="{height / 2}" font-size="12" transform="rotate(-90 14 {height / 2})"'
            ' text-anchor="middle">log10 |remainder|</text>'
        )
        if ref is not None:
            d = " ".join(f"{'M' if i == 0 else 'L'}{sx(a):.2f},{sy(b):.2f}" for i, (a, b) in enumerate(zip(*ref)))
            out.append(f'<path d="{d}" stroke="gray" stroke-dasharray="4 3" fill="none"/>')
        for (b, r), x, y in zip(pts, bx, ry):
            out.append(
                f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="steelblue">'
                f"<title>beta={b:g} |r|={r:.6g}</title></circle>"
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


class AsymptoticSweep(BaseEstimator):
    """``fit(patch)`` runs the sweep, the rate fit and the bound checks.

    Attributes after fit: ``records_``, ``rate_`` (None when the fit is not
    possible), ``bounds_``, ``muD_``.
    """

    def __init__(self, betas=(8, 16, 32, 64), j_max=1, xi=6.0, C_geom=1.0, method="auto", resolution=None, fem_h=0.2, jobs=1):
        self.betas = betas
        self.j_max = j_max
        self.xi = xi
        self.C_geom = C_geom
        self.method = method
        self.resolution = resolution
        self.fem_h = fem_h
        self.jobs = jobs

    def fit(self, X, y=None):
        self.muD_ = comparison_eigenvalues(X, self.j_max, target_h=self.fem_h)
        self.records_ = sweep(
            X, self.betas, self.j_max, self.muD_, self.method, self.resolution, self.xi, self.C_geom, self.jobs
        )
        try:
            self.rate_ = fit_rate(self.records_, 1)
        except InsufficientDataError:
            self.rate_ = None
        self.bounds_ = cross_check_bounds(self.records_, self.C_geom, self.xi)
        return self

    def transform(self, X=None):
        """Sweep table as an array with columns SWEEP_COLUMNS (None -> nan)."""
        check_fitted(self, "records_")
        return np.array([[np.nan if v is None else float(v) for v in r.row()] for r in self.records_])
