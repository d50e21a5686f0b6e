"""Split-step structure: exactness of the subflows, conservation, symmetry."""

import math

import numpy as np
import pytest

from ibnls import diagnostics, propagator
from ibnls.grid import build_grid, build_laplacian, eigendecompose, h2_norm, l2_norm
from ibnls.params import ModelParams

P = ModelParams(5, 1, 2)


def _smooth_field(grid, amp=1.0):
    return (amp * np.exp(-grid.r ** 2) * (1 + 0.2j)).astype(np.complex128)


def test_linear_step_zero_tau_identity(small_setup):
    grid, op, basis = small_setup
    u = _smooth_field(grid)
    out = propagator.linear_step(u, basis, 0.0)
    assert l2_norm(out - u, grid) / l2_norm(u, grid) < 1e-13


def test_linear_step_eigenmode_phase(small_setup):
    grid, op, basis = small_setup
    k, tau = 17, 0.37
    e_k = basis.modes[:, k].astype(np.complex128)
    out = propagator.linear_step(e_k, basis, tau)
    ip = np.sum(grid.w * out * np.conj(e_k))
    assert abs(ip - np.exp(1j * basis.eigenvalues[k] ** 2 * tau)) < 1e-12


def test_linear_step_unitary(small_setup):
    grid, op, basis = small_setup
    u = _smooth_field(grid)
    out = propagator.linear_step(u, basis, 1.7)
    assert abs(l2_norm(out, grid) - l2_norm(u, grid)) / l2_norm(u, grid) < 1e-12


def test_nonlinear_step_preserves_modulus(small_setup):
    grid, op, basis = small_setup
    u = _smooth_field(grid)
    out = propagator.nonlinear_step(u, grid, P, 0.4)
    assert np.max(np.abs(np.abs(out) - np.abs(u))) < 1e-15
    assert np.allclose(propagator.nonlinear_step(u, grid, P, 0.0), u)


def test_nonlinear_step_composition(small_setup):
    grid, op, basis = small_setup
    u = _smooth_field(grid)
    two = propagator.nonlinear_step(propagator.nonlinear_step(u, grid, P, 0.3),
                                    grid, P, 0.5)
    one = propagator.nonlinear_step(u, grid, P, 0.8)
    assert np.max(np.abs(two - one)) < 1e-14


def test_nonlinear_step_zero_weight_matches_plain_phase(small_setup):
    # b = 0 reduces to the homogeneous biharmonic NLS kick
    grid, op, basis = small_setup
    u = _smooth_field(grid)
    out = propagator.nonlinear_step(u, grid, ModelParams(5, 0, 2), 0.25)
    expected = u * np.exp(-1j * 0.25 * np.abs(u) ** 2)
    assert np.max(np.abs(out - expected)) < 1e-15


def test_strang_step_mass_exact(small_setup):
    grid, op, basis = small_setup
    u = _smooth_field(grid)
    out = propagator.strang_step(u, basis, grid, P, 1e-3)
    assert abs(l2_norm(out, grid) ** 2 - l2_norm(u, grid) ** 2) \
        / l2_norm(u, grid) ** 2 < 1e-12


def test_energy_richardson_order(small_setup):
    grid, op, basis = small_setup
    u0 = (np.exp(-grid.r ** 2)).astype(np.complex128)
    e0 = diagnostics.energy(u0, grid, op, P)
    dt0 = propagator.suggested_dt(basis)
    drifts = []
    for mult in (8, 4, 2):
        dt = mult * dt0
        u = u0.copy()
        drift = 0.0
        for k in range(int(round(0.2 / dt))):
            u = propagator.strang_step(u, basis, grid, P, dt)
            if k % 64 == 0:
                drift = max(drift, abs(diagnostics.energy(u, grid, op, P) - e0) / abs(e0))
        drifts.append(drift)
    orders = [math.log2(drifts[i] / drifts[i + 1]) for i in range(2)]
    assert min(orders) >= 1.9


def test_self_convergence_second_order(small_setup):
    grid, op, basis = small_setup
    u0 = (np.exp(-grid.r ** 2)).astype(np.complex128)
    T = 0.125

    def final(nsteps):
        u = u0.copy()
        dt = T / nsteps
        for _ in range(nsteps):
            u = propagator.strang_step(u, basis, grid, P, dt)
        return u

    ref = final(2 ** 19)
    e1 = l2_norm(final(2 ** 15) - ref, grid)
    e2 = l2_norm(final(2 ** 16) - ref, grid)
    assert math.log2(e1 / e2) >= 1.9


def test_time_reversal(small_setup):
    grid, op, basis = small_setup
    u0 = _smooth_field(grid)
    back = propagator.time_reverse(u0, P, grid, basis, steps=1000, dt=2e-3)
    assert l2_norm(back - u0, grid) / l2_norm(u0, grid) <= 1e-8


def test_evolve_zero_field(small_setup):
    grid, op, basis = small_setup
    traj = propagator.evolve(np.zeros(grid.M, dtype=complex), P, grid, basis, op,
                             T=0.1, dt=1e-3, snapshot_every=20)
    assert traj.status == "completed"
    assert all(rec.mass == 0 for rec in traj.records)


def test_evolve_linear_only_h2_constant(small_setup):
    grid, op, basis = small_setup
    u0 = _smooth_field(grid)
    n0 = h2_norm(u0, op)
    traj = propagator.evolve(u0, P, grid, basis, op, T=10.0, dt=0.05,
                             snapshot_every=40, nonlinearity=False,
                             store_fields=True)
    finals = [h2_norm(u, op) for u in traj.fields]
    assert max(abs(n - n0) / n0 for n in finals) < 1e-12


def test_evolve_blowup_guard_trips(small_setup):
    grid, op, basis = small_setup
    u0 = _smooth_field(grid)
    traj = propagator.evolve(u0, P, grid, basis, op, T=1.0, dt=1e-3,
                             snapshot_every=10, blowup_guard=1e-12)
    assert traj.status == "blowup_guard"
    assert "guard" in traj.guard_message


def test_evolve_boundary_guard_trips(small_setup):
    grid, op, basis = small_setup
    u0 = np.zeros(grid.M, dtype=complex)
    u0[-3:] = 1.0                       # mass parked at the wall
    traj = propagator.evolve(u0, P, grid, basis, op, T=0.01, dt=1e-3,
                             snapshot_every=1, boundary_guard=1e-8)
    assert traj.status == "boundary_guard"


def test_back_propagation_zero_for_free_flow(small_setup):
    grid, op, basis = small_setup
    u0 = _smooth_field(grid)
    times = [0.0, 0.5, 1.0, 1.5]
    fields = [propagator.linear_step(u0, basis, t) for t in times]
    bp = propagator.back_propagated_profile(fields, times, basis, op)
    assert max(bp.increments) < 1e-10 * h2_norm(u0, op)


def test_back_propagation_small_data_decreases(small_setup):
    grid, op, basis = small_setup
    u0 = (0.05 * np.exp(-grid.r ** 2)).astype(np.complex128)
    traj = propagator.evolve(u0, P, grid, basis, op, T=0.5, dt=1e-4,
                             snapshot_every=len(range(int(0.1 / 1e-4))),
                             store_fields=True)
    bp = propagator.back_propagated_profile(traj.fields, traj.times, basis, op)
    assert bp.increments[-1] < bp.increments[0]


def test_standing_wave_orbit_increments_do_not_decay(run_setup, run_ground_state):
    grid, op, basis = run_setup
    gs, _ = run_ground_state
    times = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0]
    orbit = propagator.standing_wave_orbit(gs.q, times)
    bp = propagator.back_propagated_profile(orbit, times, basis, op)
    assert not bp.strictly_decreasing
    assert bp.increments[-1] > 0.5 * bp.increments[0]


def test_evolve_rejects_nonpositive_dt(small_setup):
    grid, op, basis = small_setup
    with pytest.raises(ValueError):
        propagator.evolve(np.zeros(grid.M, dtype=complex), P, grid, basis, op,
                          T=1.0, dt=0.0)
