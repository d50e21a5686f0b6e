"""Shared fixtures.  The expensive artifacts (spectral bases, ground states,
the two long canonical evolutions) are built once per session and reused by
the module tests and the acceptance suite."""

import numpy as np
import pytest

from ibnls import diagnostics, propagator
from ibnls.grid import build_grid, build_laplacian, eigendecompose
from ibnls.groundstate import solve_ground_state, threshold_quantities
from ibnls.params import ModelParams

CANONICAL = ModelParams(5, 1, 2)

# Evolution runs use M = 512 on [0, 30]: the nonlinear phase rate at the
# innermost node scales like (2M/R_max) |u(0)|^alpha, and ground-state-sized
# data at M = 1024 would need dt below 5e-5 for a faithful split step (see
# the propagator module docs).  dt = 1e-4 at M = 512 keeps the recorded
# observables dt-robust at the cost of minutes, not hours.
EVOLUTION_M = 512
EVOLUTION_DT = 1e-4


@pytest.fixture(scope="session")
def params():
    return CANONICAL


@pytest.fixture(scope="session")
def small_setup():
    """Cheap grid for behavior tests."""
    grid = build_grid(8.0, 64, 5)
    op = build_laplacian(grid)
    return grid, op, eigendecompose(op)


@pytest.fixture(scope="session")
def run_setup():
    """Grid/basis used for the canonical evolutions."""
    grid = build_grid(30.0, EVOLUTION_M, 5)
    op = build_laplacian(grid)
    return grid, op, eigendecompose(op)


@pytest.fixture(scope="session")
def run_ground_state(run_setup):
    grid, op, basis = run_setup
    gs = solve_ground_state(CANONICAL, grid, basis, op)
    return gs, threshold_quantities(gs)


@pytest.fixture(scope="session")
def fine_setup():
    """M = 1024 grid on [0, 30]: the ground-state quality gates run here."""
    grid = build_grid(30.0, 1024, 5)
    op = build_laplacian(grid)
    return grid, op, eigendecompose(op)


@pytest.fixture(scope="session")
def fine_ground_state(fine_setup):
    grid, op, basis = fine_setup
    gs = solve_ground_state(CANONICAL, grid, basis, op)
    return gs, threshold_quantities(gs)


@pytest.fixture(scope="session")
def canonical_run(run_setup, run_ground_state):
    """The canonical below-threshold scatterer: u0 = 0.5 Q to T = 200."""
    grid, op, basis = run_setup
    gs, _ = run_ground_state
    u0 = 0.5 * gs.q.astype(np.complex128)
    vw = diagnostics.build_virial_weight(10.0, grid)
    traj = propagator.evolve(
        u0, CANONICAL, grid, basis, op, T=200.0, dt=EVOLUTION_DT,
        snapshot_every=2000, ball_radii=[10.0], virial_weight=vw,
        blowup_guard=10 * gs.grad_l2, store_fields=True)
    assert traj.status == "completed", traj.guard_message
    return traj


@pytest.fixture(scope="session")
def threshold_run(run_setup, run_ground_state):
    """u0 = 0.9 Q to T = 100: the along-the-flow threshold monitor."""
    grid, op, basis = run_setup
    gs, _ = run_ground_state
    u0 = 0.9 * gs.q.astype(np.complex128)
    traj = propagator.evolve(
        u0, CANONICAL, grid, basis, op, T=100.0, dt=EVOLUTION_DT,
        snapshot_every=2000, ball_radii=[10.0],
        blowup_guard=10 * gs.grad_l2, store_fields=False)
    assert traj.status == "completed", traj.guard_message
    return traj
