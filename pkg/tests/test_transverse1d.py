import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltasurf import TransverseSpec, dirichlet_ground, penalized_spectrum, separated_upper_bound
from deltasurf.exceptions import ValidityError
from deltasurf.transverse1d import dirichlet_bracket, fd_extrapolated, transverse_table, window_half_width

from oracles import neumann_penalized_ground, transverse_fd_richardson

# frozen from oracles.transverse_fd_richardson(10, 1)
FD_BETA10_A1 = -24.995455503641956


def test_frozen_fd_value():
    assert transverse_fd_richardson(10.0, 1.0)[0] == pytest.approx(FD_BETA10_A1, rel=1e-12)


def test_bracket_and_reference():
    lam = dirichlet_ground(TransverseSpec(a=1.0, beta=10.0))
    lo, hi = dirichlet_bracket(10.0, 1.0)
    assert lo == -25.0 and hi == pytest.approx(-25 + 200 * np.exp(-5))
    assert lo <= lam <= hi
    assert lam == pytest.approx(-24.993, abs=0.01)
    assert abs(lam - FD_BETA10_A1) <= 1e-4 * abs(FD_BETA10_A1)


@pytest.mark.parametrize("beta", [5.0, 10.0, 20.0])
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_closed_form_matches_independent_fd(beta, a):
    lam = dirichlet_ground(TransverseSpec(a=a, beta=beta))
    ref = transverse_fd_richardson(beta, a)[0]
    assert abs(lam - ref) <= 1e-4 * abs(ref)


@pytest.mark.parametrize("beta, a", [(10.0, 1.0), (20.0, 0.5)])
def test_module_fd_matches_closed_form(beta, a):
    spec = TransverseSpec(a=a, beta=beta)
    assert fd_extrapolated(spec)[0] == pytest.approx(dirichlet_ground(spec), rel=1e-4)


def test_whole_line_limit():
    lam = dirichlet_ground(TransverseSpec(a=5.0, beta=10.0))
    assert lam == pytest.approx(-25.0, rel=1e-8)


def test_no_bound_state_below_threshold():
    assert dirichlet_ground(TransverseSpec(a=0.1, beta=10.0)) is None
    assert dirichlet_ground(TransverseSpec(a=0.21, beta=10.0)) is not None


@settings(max_examples=50, deadline=None)
@given(st.floats(3.0, 200.0), st.floats(0.2, 3.0), st.floats(1.01, 2.0))
def test_lower_bracket_and_beta_monotonicity(beta, a, factor):
    if beta * a <= 2.5:
        return
    l1 = dirichlet_ground(TransverseSpec(a=a, beta=beta))
    l2 = dirichlet_ground(TransverseSpec(a=a, beta=beta * factor))
    assert l1 >= -(beta**2) / 4
    assert l2 < l1


def test_neumann_free_spectrum():
    vals = penalized_spectrum(TransverseSpec(a=1.0, beta=0.0, boundary="neumann", C=0.0), 3)
    np.testing.assert_allclose(vals, (np.pi / 2) ** 2 * np.array([0, 1, 4]), atol=1e-5)


def test_penalized_below_dirichlet():
    for beta, a, C in [(10.0, 1.0, 0.5), (20.0, 0.4, 1.0), (6.0, 2.0, 2.0)]:
        n = penalized_spectrum(TransverseSpec(a=a, beta=beta, boundary="neumann", C=C), 1)[0]
        d = dirichlet_ground(TransverseSpec(a=a, beta=beta))
        assert n <= d
        assert n == pytest.approx(neumann_penalized_ground(beta, a, C)[0], rel=1e-6)


def test_penalized_window_example():
    beta = 40.0
    vals = penalized_spectrum(TransverseSpec(a=window_half_width(beta), beta=beta, boundary="neumann", C=1.0), 2)
    assert -410 <= vals[0] <= -390
    assert vals[1] >= 0


def test_penalized_needs_neumann_and_bounded_count():
    with pytest.raises(ValueError):
        penalized_spectrum(TransverseSpec(a=1.0, beta=1.0), 1)
    with pytest.raises(ValueError):
        penalized_spectrum(TransverseSpec(a=1.0, beta=1.0, boundary="neumann", C=0.0), 50, n=10)


def test_spec_validation():
    with pytest.raises(ValueError):
        TransverseSpec(a=-1.0, beta=1.0)
    with pytest.raises(ValueError):
        TransverseSpec(a=1.0, beta=1.0, boundary="robin")


def test_separated_bound_formula():
    mu, beta = 5.7832, 100.0
    a = 6 * np.log(beta) / beta
    expected = -2500 + mu + 2 * beta**2 * np.exp(-beta * a / 2) + a * (1 + mu)
    assert separated_upper_bound(mu, beta, 6.0, 1.0) == pytest.approx(expected, rel=1e-14)
    no_geom = separated_upper_bound(mu, 1e4, 6.0, 0.0)
    assert no_geom == pytest.approx(-2.5e7 + mu + 2e8 * np.exp(-3 * np.log(1e4)), rel=1e-15)


def test_separated_bound_rate():
    mu = 2.0
    gaps = [(b, separated_upper_bound(mu, b) - (-(b**2) / 4 + mu)) for b in (1e2, 1e3, 1e4, 1e5)]
    scaled = [g * b / np.log(b) for b, g in gaps]
    assert all(g > 0 for _, g in gaps)
    assert np.all(np.diff([g for _, g in gaps]) < 0)
    assert max(scaled) / min(scaled) < 1.5


def test_separated_bound_validity():
    with pytest.raises(ValidityError):
        separated_upper_bound(1.0, 20.0, xi=5.0)
    with pytest.raises(ValidityError):
        separated_upper_bound(1.0, 1.2)


def test_table_rows():
    rows = transverse_table([0.5, 10.0], 1.0)
    assert rows[0][2] is None
    beta, a, lam, lo, hi, valid = rows[1]
    assert (beta, a) == (10.0, 1.0) and lo <= lam <= hi and valid
