import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sphere_layer_coarse():
    from deltasurf import build_mesh, make_surface
    from deltasurf.bs_bem import TriangleLayer

    return TriangleLayer(build_mesh(make_surface("sphere"), 0.4))


@pytest.fixture(scope="session")
def sphere_layer_medium():
    from deltasurf import build_mesh, make_surface
    from deltasurf.bs_bem import TriangleLayer

    return TriangleLayer(build_mesh(make_surface("sphere"), 0.25))


@pytest.fixture(scope="session")
def sphere_ground_coarse(sphere_layer_coarse):
    from deltasurf import solve_bound_states

    return solve_bound_states(sphere_layer_coarse, 20.0, 1)


@pytest.fixture(scope="session")
def sphere_ground_medium(sphere_layer_medium):
    from deltasurf import solve_bound_states

    return solve_bound_states(sphere_layer_medium, 20.0, 1)
