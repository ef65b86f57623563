import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltasurf import AsymptoticSweep, SweepRecord, cross_check_bounds, fit_rate, make_surface, sweep
from deltasurf.asymptotics import SWEEP_COLUMNS, boundary_class, records_to_csv, remainder_svg
from deltasurf.exceptions import InsufficientDataError
from sklearn.exceptions import NotFittedError


def _synthetic(rem, betas=(8, 16, 32, 64), mu=2.0, bclass="smooth"):
    return [
        SweepRecord(beta=float(b), j=1, E_j=-b * b / 4 + mu + rem(b), muD_j=mu, converged=True, boundary_class=bclass)
        for b in betas
    ]


def test_exact_model_fit():
    fit = fit_rate(_synthetic(lambda b: 3 * np.log(b) / b))
    assert fit.fitted_c == pytest.approx(3.0, rel=1e-12)
    assert fit.max_rel_misfit < 1e-12
    assert fit.monotone_flag and fit.applicable


def test_constant_remainder_control():
    fit = fit_rate(_synthetic(lambda b: 0.5))
    assert not fit.monotone_flag
    assert fit.max_rel_misfit > 0.5


def test_insufficient_data():
    with pytest.raises(InsufficientDataError):
        fit_rate(_synthetic(lambda b: 1 / b, betas=(8, 16, 32)))
    with pytest.raises(InsufficientDataError):
        fit_rate(_synthetic(lambda b: 1 / b, betas=(8, 9, 10, 11)))
    recs = _synthetic(lambda b: 1 / b)
    recs[0].converged = False
    with pytest.raises(InsufficientDataError):
        fit_rate(recs)


def test_lipschitz_patch_reports_trend_only():
    fit = fit_rate(_synthetic(lambda b: 1 / b, bclass="lipschitz"))
    assert not fit.applicable and np.isnan(fit.fitted_c) and fit.monotone_flag


@settings(max_examples=100)
@given(
    st.floats(1.0, 500.0),
    st.floats(-400.0, 0.0),
    st.floats(-10.0, 50.0),
)
def test_bookkeeping_identity(beta, E, mu):
    r = SweepRecord(beta=beta, j=1, E_j=E, muD_j=mu)
    assert r.shifted == E + beta**2 / 4
    assert r.remainder == r.shifted - mu
    assert r.shifted - r.remainder == pytest.approx(mu, abs=1e-12 * (1 + abs(r.shifted)))


def test_boundary_classes():
    assert boundary_class(make_surface("sphere")) == "closed"
    assert boundary_class(make_surface("hemisphere")) == "smooth"
    assert boundary_class(make_surface("flat_disk")) == "smooth"
    assert boundary_class(make_surface("flat_rectangle")) == "lipschitz"
    assert boundary_class(make_surface("torus_patch")) == "lipschitz"


@pytest.fixture(scope="module")
def sphere_records():
    return sweep(make_surface("sphere"), [8, 16, 32], 1, muD=[0.0])


def test_sphere_sweep(sphere_records):
    assert [r.beta for r in sphere_records] == [8.0, 16.0, 32.0]
    rem = np.abs([r.remainder for r in sphere_records])
    assert np.all(np.diff(rem) <= 0)
    assert rem[-1] < 0.05
    # the exact remainder is exponentially small at β = 32, below the refinement change
    assert sphere_records[0].converged
    assert not sphere_records[-1].converged and "refinement moved" in sphere_records[-1].note
    assert sphere_records[0].discretization["fine"]["kind"] == "axisymmetric"


def test_sphere_bound_slack_shrinks(sphere_records):
    report = cross_check_bounds(sphere_records)
    assert all(row["passed"] for row in report)
    slack = [row["bound"] - row["E_j"] for row in report]
    assert slack[2] < slack[1]


def test_cross_check_rows():
    recs = _synthetic(lambda b: 0.1, betas=(1.2, 40.0))
    recs.append(SweepRecord(beta=50.0, j=1, E_j=None, muD_j=2.0))
    rows = cross_check_bounds(recs)
    assert rows[0]["passed"] is None and "8/3" in rows[0]["reason"]
    assert rows[1]["passed"] is True
    assert rows[2]["passed"] is None and "threshold" in rows[2]["reason"]


def test_missing_bound_state_is_flagged():
    recs = sweep(make_surface("sphere"), [0.5, 8.0], 2, muD=[0.0, 2.0])
    assert recs[0].E_j is None and recs[0].note == "no bound state"
    assert recs[3].E_j is not None


def test_mesh_route_sweep():
    recs = sweep(make_surface("hemisphere"), [4.0], 1, muD=[2.0], method="mesh", resolution={"target_h": 0.5})
    fine, coarse = recs[0].discretization["fine"], recs[0].discretization["coarse"]
    assert fine["kind"] == "mesh" and fine["panels"] > coarse["panels"]
    assert recs[0].E_j < 0


def test_csv_and_svg(sphere_records):
    text = records_to_csv(sphere_records, preamble="# hash abc\n")
    lines = text.splitlines()
    assert lines[0] == "# hash abc" and lines[1] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 5 and lines[2].endswith("true")
    svg = remainder_svg(sphere_records)
    assert svg.startswith("<svg") and svg.count("<circle") == 3


def test_estimator_not_fitted():
    with pytest.raises(NotFittedError):
        AsymptoticSweep().transform()
    assert AsymptoticSweep(betas=(8, 16)).get_params()["betas"] == (8, 16)
