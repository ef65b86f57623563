"""One-dimensional δ-well operators on (-a, a).

T^D has Dirichlet ends; T^N has free ends with the boundary term
-C(|v(-a)|² + |v(a)|²).  Both carry the point interaction -β|v(0)|².
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .exceptions import ValidityError

# sufficient condition for the bracket of the Dirichlet ground state
VALIDITY_PRODUCT = 8.0 / 3.0


@dataclass(frozen=True)
class TransverseSpec:
    a: float
    beta: float
    boundary: str = "dirichlet"  # or "neumann"
    C: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("half-width a must be positive")
        if not self.beta >= 0:
            raise ValueError("beta must be non-negative")
        if self.boundary not in ("dirichlet", "neumann"):
            raise ValueError("boundary must be 'dirichlet' or 'neumann'")
        if self.boundary == "neumann" and not self.C >= 0:
            raise ValueError("penalty constant C must be non-negative")


def dirichlet_ground(spec):
    """Λ₁(T^D) = -κ², or None when T^D has no negative eigenvalue.

    The even bound state sinh(κ(a - |t|)) satisfies the jump condition
    v'(0+) - v'(0-) = -β v(0) iff tanh(κa) = 2κ/β, which has a root in
    (0, β/2) exactly when βa > 2.
    """
    a, beta = spec.a, spec.beta
    if beta * a <= 2.0:
        return None

    def f(k):
        return np.tanh(k * a) - 2.0 * k / beta

    lo = 1e-300
    # f > 0 near 0, f(β/2) = tanh(βa/2) - 1 < 0
    hi = 0.5 * beta
    if f(hi) >= 0:  # tanh saturated to 1 in floating point
        return -0.25 * beta**2
    k = brentq(f, lo, hi, xtol=1e-15 * beta, rtol=4 * np.finfo(float).eps, maxiter=200)
    return -k * k


def dirichlet_bracket(beta, a):
    """Bracket [-β²/4, -β²/4 + 2β² e^{-βa/2}], valid for βa > 8/3."""
    return -0.25 * beta**2, -0.25 * beta**2 + 2 * beta**2 * np.exp(-0.5 * beta * a)


def _fd_tridiagonal(spec, n):
    """Linear finite elements with lumped mass on a uniform grid through 0.

    Returns (diag, offdiag, free) of the symmetrically scaled operator.
    ``n`` is the number of intervals and must be even so t = 0 is a node.
    """
    if n % 2:
        n += 1
    a, beta = spec.a, spec.beta
    h = 2 * a / n
    m = n + 1
    K_diag = np.full(m, 2.0 / h)
    K_diag[0] = K_diag[-1] = 1.0 / h
    K_off = np.full(m - 1, -1.0 / h)
    mass = np.full(m, h)
    mass[0] = mass[-1] = h / 2
    K_diag[n // 2] -= beta
    if spec.boundary == "dirichlet":
        sl = slice(1, m - 1)
        K_diag, K_off, mass = K_diag[sl], K_off[1:-1], mass[sl]
    else:
        K_diag[0] -= spec.C
        K_diag[-1] -= spec.C
    s = 1.0 / np.sqrt(mass)
    return K_diag * s * s, K_off * s[:-1] * s[1:], h


def fd_spectrum(spec, count=1, n=100_000):
    """Lowest ``count`` eigenvalues of the grid operator with n intervals."""
    d, e, _ = _fd_tridiagonal(spec, n)
    if count > len(d):
        raise ValueError("count exceeds the number of grid dofs")
    return eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1), eigvals_only=True)


def fd_extrapolated(spec, count=1, n=100_000):
    """Grid eigenvalues on n and 2n intervals, Richardson-combined (O(h²) error)."""
    coarse = fd_spectrum(spec, count, n)
    fine = fd_spectrum(spec, count, 2 * n)
    return fine + (fine - coarse) / 3.0


def penalized_spectrum(spec, count=2, n=100_000):
    """Lowest eigenvalues of T^N, by the grid discretization only."""
    if spec.boundary != "neumann":
        raise ValueError("penalized_spectrum needs a 'neumann' spec with its constant C")
    return fd_extrapolated(spec, count, n)


def window_half_width(beta, xi=6.0):
    """Tube half-width a = ξ log(β) / β."""
    return xi * np.log(beta) / beta


def separated_upper_bound(mu, beta, xi=6.0, C_geom=1.0, check=True):
    """-β²/4 + 2β² e^{-βa/2} + μ + C_geom a (1 + μ) with a = ξ log β / β."""
    if xi < 6:
        raise ValidityError("the window rule needs xi >= 6")
    a = window_half_width(beta, xi)
    if check and beta * a <= VALIDITY_PRODUCT:
        raise ValidityError(f"beta*a = {beta * a:.3g} <= 8/3: bracket not valid")
    return -0.25 * beta**2 + 2 * beta**2 * np.exp(-0.5 * beta * a) + mu + C_geom * a * (1 + mu)


def transverse_table(betas, a):
    """Rows (β, a, Λ₁, bracket low, bracket high, valid) for the CLI."""
    rows = []
    for beta in betas:
        lam = dirichlet_ground(TransverseSpec(a=a, beta=beta))
        lo, hi = dirichlet_bracket(beta, a)
        rows.append((beta, a, lam, lo, hi, beta * a > VALIDITY_PRODUCT))
    return rows
