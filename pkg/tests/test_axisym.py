import numpy as np
import pytest

from deltasurf import AxisymmetricLayer, make_surface, solve_bound_states
from deltasurf.axisym import azimuthal_kernel, graded_breaks

from oracles import azimuthal_kernel_quad, sphere_bound_state, sphere_layer_eigenvalue

# frozen from oracles.sphere_bound_state(20, l)
SPHERE_E_BETA20 = (-99.99999958776925, -97.96895653372124)


def test_frozen_sphere_values():
    for l, E in enumerate(SPHERE_E_BETA20):
        assert sphere_bound_state(20.0, l) == pytest.approx(E, rel=1e-13)


@pytest.mark.parametrize(
    "pair",
    [(1.0, 0.0, 0.7, 0.2), (0.5, 0.1, 0.5, 0.1001), (0.3, 0.0, 1.2, -0.4), (0.8, 0.3, 0.79, 0.31)],
)
@pytest.mark.parametrize("kappa", [0.0, 3.0, 20.0])
def test_azimuthal_kernel_against_quad(pair, kappa):
    modes = [0, 1, 3]
    got = azimuthal_kernel(*pair, kappa, modes)
    for k, m in enumerate(modes):
        ref = azimuthal_kernel_quad(*pair, kappa, m)
        assert got[k] == pytest.approx(ref, rel=1e-9, abs=1e-13)


@pytest.fixture(scope="module")
def sphere_layer():
    return AxisymmetricLayer(make_surface("sphere").profile())


@pytest.mark.parametrize("kappa", [0.0, 1.0, 10.0, 32.0])
def test_sphere_layer_eigenvalues(sphere_layer, kappa):
    vals, modes = sphere_layer.layer_eigenvalues(kappa, 9, max_mode=3)
    ref = [sphere_layer_eigenvalue(l, kappa) for l in (0, 1, 1, 1, 2, 2, 2, 2, 2)]
    np.testing.assert_allclose(vals, ref, rtol=1e-7)
    assert modes[0] == 0


def test_sphere_bound_states(sphere_layer):
    res = solve_bound_states(sphere_layer, 20.0, 2)
    np.testing.assert_allclose(res.eigenvalues, SPHERE_E_BETA20, rtol=1e-8)


def test_refined_layer_is_finer(sphere_layer):
    fine = sphere_layer.refined()
    assert fine.n_dofs > sphere_layer.n_dofs and fine.h < sphere_layer.h


def test_breaks_graded_toward_free_edge():
    curve = make_surface("hemisphere").profile()
    b = graded_breaks(curve, 0.3, levels=4, ratio=0.2)
    assert b[0] == 0.0 and b[-1] == pytest.approx(curve.length)
    widths = np.diff(b)
    assert widths[-1] < 0.01 and widths.max() <= 0.3
    assert curve.edges == [curve.length]


def test_density_evaluation_reproduces_legendre_coefficients(sphere_layer):
    n = sphere_layer.n_dofs
    c = np.zeros(n)
    c[:: sphere_layer.degree + 1] = 1.0  # constant 1 on every panel
    s = np.linspace(0.0, np.pi, 17)
    np.testing.assert_allclose(sphere_layer.density(c, s), 1.0, atol=1e-13)
