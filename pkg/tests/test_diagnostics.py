"""Functional-by-functional checks against closed forms and trajectories."""

import math
from fractions import Fraction

import numpy as np
import pytest

from ibnls import diagnostics, propagator
from ibnls.diagnostics import (build_cutoff, build_virial_weight,
                               coercivity_gap, check_below_threshold,
                               localized_mass, localized_mass_derivative,
                               mass, mass_in_ball, morawetz_average,
                               predicted_decay_exponent, scattering_indicator,
                               strichartz_proxy, virial_main_term,
                               virial_quantity, virial_supremum_check)
from ibnls.grid import (build_grid, build_laplacian, eigendecompose, l2_norm,
                        radial_derivative)
from ibnls.params import AdmissiblePair, ModelParams

P = ModelParams(5, 1, 2)


def test_mass_energy_zero_field(small_setup):
    grid, op, _ = small_setup
    z = np.zeros(grid.M, dtype=complex)
    assert mass(z, grid) == 0
    assert diagnostics.energy(z, grid, op, P) == 0


def test_gaussian_mass_closed_form(params):
    grid = build_grid(12.0, 1024, 5)
    u = np.exp(-grid.r ** 2 / 2).astype(complex)
    assert mass(u, grid) == pytest.approx(math.pi ** 2.5, rel=1e-3)


def test_energy_quadratic_without_potential(small_setup):
    # with the potential term turned off (b irrelevant), E[c u] = c^2 E[u]
    grid, op, _ = small_setup
    u = np.exp(-grid.r ** 2).astype(complex)
    kin = lambda v: 0.5 * l2_norm(op.apply(v), grid) ** 2
    assert kin(3.0 * u) == pytest.approx(9.0 * kin(u), rel=1e-12)


def test_mass_in_ball_limits(small_setup):
    grid, op, _ = small_setup
    u = np.exp(-grid.r ** 2).astype(complex)
    assert mass_in_ball(u, grid, grid.R_max) == pytest.approx(mass(u, grid), rel=1e-14)
    assert mass_in_ball(u, grid, grid.dr / 4) == 0.0
    with pytest.raises(ValueError):
        mass_in_ball(u, grid, 2 * grid.R_max)


def test_mass_in_ball_gaussian_quadrature():
    # int_{|x|<=1} e^{-r^2} dx in R^5 via the incomplete gamma function; the
    # sharp ball edge makes this first-order in dr, hence the small R_max
    from scipy.special import gammainc
    grid = build_grid(2.5, 1024, 5)
    u = np.exp(-grid.r ** 2 / 2).astype(complex)
    exact = math.pi ** 2.5 * gammainc(2.5, 1.0)
    assert mass_in_ball(u, grid, 1.0) == pytest.approx(exact, rel=5e-3)


def test_threshold_check_strictness(run_setup, run_ground_state):
    grid, op, _ = run_setup
    gs, thr = run_ground_state
    at_q = check_below_threshold(1.0 * gs.q.astype(complex), grid, op, thr, P)
    assert not at_q.below_mass_energy and not at_q.below_gradient
    half = check_below_threshold(0.5 * gs.q.astype(complex), grid, op, thr, P)
    assert half.below_mass_energy and half.below_gradient and half.gradient_below_now
    zero = check_below_threshold(np.zeros(grid.M, dtype=complex), grid, op, thr, P)
    assert zero.below_mass_energy and zero.below_gradient


def test_threshold_check_negative_energy_obstruction(run_setup, run_ground_state):
    grid, op, _ = run_setup
    gs, thr = run_ground_state
    params_frac = ModelParams(5, 1, 3)          # s_c = 3/2, non-integer
    big = 3.0 * gs.q.astype(complex)            # potential-dominated, E < 0
    assert diagnostics.energy(big, grid, op, params_frac) < 0
    with pytest.raises(ValueError):
        check_below_threshold(big, grid, op, thr, params_frac)


# --- cutoff / localized mass ------------------------------------------------

def test_cutoff_shape(small_setup):
    grid, op, _ = small_setup
    cw = build_cutoff(4.0, grid)
    assert np.all((0 <= cw.eta) & (cw.eta <= 1))
    assert np.all(cw.eta[grid.r <= 2.0] == 1.0)
    assert np.all(cw.eta[grid.r >= 4.0] == 0.0)
    inside = (grid.r < 2.0) | (grid.r > 4.0)
    assert np.all(cw.d_eta[inside] == 0.0)


def test_localized_mass_derivative_real_field(small_setup):
    grid, op, _ = small_setup
    cw = build_cutoff(4.0, grid)
    u = np.exp(-grid.r ** 2).astype(complex)
    assert abs(localized_mass_derivative(u, cw, op)) < 1e-14


def test_localized_mass_derivative_matches_generator(small_setup):
    # exact semi-discrete rate is -2 Im <Lap^2 u, eta u>; the integrated-by-
    # parts functional matches it to O(dr^2)
    grid, op, _ = small_setup
    cw = build_cutoff(4.0, grid)
    u = (np.exp(-grid.r ** 2 / 3) + 0.4j * grid.r * np.exp(-grid.r ** 2 / 2.5))
    u = (u * np.exp(1j * 0.7 * grid.r ** 2 / (1 + grid.r))).astype(complex)
    exact = -2 * np.imag(np.sum(grid.w * cw.eta * op.apply_squared(u) * np.conj(u)))
    approx = localized_mass_derivative(u, cw, op)
    assert approx == pytest.approx(exact, rel=2e-2)


def test_localized_mass_derivative_fd_along_run(small_setup):
    grid, op, basis = small_setup
    cw = build_cutoff(4.0, grid)
    u = (0.8 * np.exp(-grid.r ** 2)).astype(np.complex128)
    dt = 1e-3
    for _ in range(200):
        u = propagator.strang_step(u, basis, grid, P, dt)
    m_minus = localized_mass(u, cw)
    u_star = propagator.strang_step(u, basis, grid, P, dt)
    m_plus = localized_mass(propagator.strang_step(u_star, basis, grid, P, dt), cw)
    fd = (m_plus - m_minus) / (2 * dt)
    assert localized_mass_derivative(u_star, cw, op) == pytest.approx(fd, rel=5e-3)


def test_localized_mass_rate_scales_inversely_with_radius():
    # |d/dt int eta_R |u|^2| <= C / R with one C fit from the run's norms via
    # Cauchy-Schwarz (the R-doubling halves the bound by construction)
    grid = build_grid(80.0, 512, 5)
    op = build_laplacian(grid)
    basis = eigendecompose(op)
    u = (1.5 * np.exp(-grid.r ** 2)).astype(np.complex128)
    for _ in range(1200):
        u = propagator.strang_step(u, basis, grid, P, 5e-3)
    du = radial_derivative(u, grid)
    lu = op.apply(u)
    c_fits = {}
    for R in (10.0, 20.0, 40.0):
        cw = build_cutoff(R, grid)
        c_fits[R] = (2 * np.max(np.abs(cw.lap_eta)) * R ** 2
                     * l2_norm(lu, grid) * l2_norm(u, grid)
                     + 4 * np.max(np.abs(cw.d_eta)) * R
                     * l2_norm(du, grid) * l2_norm(lu, grid))
        rate = abs(localized_mass_derivative(u, cw, op))
        assert rate <= c_fits[R] / R
    # the tabulated cutoff derivatives scale like 1/R, so C is R-uniform and
    # the bound itself halves per radius doubling
    c_uniform = max(c_fits.values())
    assert c_fits[40.0] < 1.2 * c_fits[10.0]
    assert c_uniform / 40.0 < 0.6 * c_uniform / 10.0


# --- virial machinery --------------------------------------------------------

def test_virial_weight_branch_values(small_setup):
    grid, op, _ = small_setup
    R = 2.0
    vw = build_virial_weight(R, grid)
    rho = grid.r / R
    inner = rho <= 0.5
    outer = rho > 1.0
    assert np.allclose(vw.a[inner], R ** 2 * rho[inner] ** 2, atol=1e-14)
    assert np.allclose(vw.a[outer], R ** 2 * rho[outer], atol=1e-12)
    # a(1/4) = 1/16 and a(2) = 2 in unscaled units
    j = np.argmin(np.abs(rho - 0.25))
    assert vw.a[j] / R ** 2 == pytest.approx(rho[j] ** 2, rel=1e-12)
    j = np.argmin(np.abs(rho - 2.0))
    assert vw.a[j] / R ** 2 == pytest.approx(rho[j], rel=1e-12)


def test_virial_weight_c1_and_monotone(small_setup):
    grid, op, _ = small_setup
    vw = build_virial_weight(2.0, grid)
    assert np.min(vw.d_a) >= 0.0
    # C^1: tabulated profile has no jumps beyond O(dr) * slope
    jumps = np.abs(np.diff(vw.a))
    assert np.max(jumps) <= (np.max(vw.d_a) + 1.0) * grid.dr


def test_virial_weight_rejects_large_radius(small_setup):
    grid, op, _ = small_setup
    with pytest.raises(ValueError):
        build_virial_weight(0.6 * grid.R_max, grid)


def test_virial_quantity_real_field_zero(small_setup):
    grid, op, _ = small_setup
    vw = build_virial_weight(2.0, grid)
    assert virial_quantity(np.exp(-grid.r ** 2).astype(complex), vw) == 0.0


def test_virial_quantity_phase_gradient_oracle():
    # u = e^{i kappa r} g(r):  Z = kappa * sum w (d_r a) g^2 + O(dr^2)
    kappa = 0.7
    vals = []
    for M in (256, 512):
        grid = build_grid(8.0, M, 5)
        vw = build_virial_weight(2.0, grid)
        g = np.exp(-grid.r ** 2)
        u = (g * np.exp(1j * kappa * grid.r)).astype(complex)
        exact = kappa * np.sum(grid.w * vw.d_a * g ** 2)
        vals.append((abs(virial_quantity(u, vw) - exact), abs(exact)))
    assert vals[0][0] / vals[1][0] > 3.0    # ~ second order
    assert vals[1][0] < 1e-3 * vals[1][1]


def test_virial_main_term_zero_field(small_setup):
    grid, op, _ = small_setup
    assert virial_main_term(np.zeros(grid.M, dtype=complex), grid, op, P, 4.0) == 0.0


def test_virial_main_term_sign_below_threshold(run_setup, run_ground_state):
    grid, op, _ = run_setup
    gs, _ = run_ground_state
    u = 0.5 * gs.q.astype(complex)
    assert virial_main_term(u, grid, op, P, 40.0) <= 0.0


def test_coercivity_gap_cases(run_setup, run_ground_state):
    grid, op, _ = run_setup
    gs, _ = run_ground_state
    vac = coercivity_gap(np.zeros(grid.M, dtype=complex), grid, op, P, 20.0)
    assert vac.vacuous
    half = coercivity_gap(0.5 * gs.q.astype(complex), grid, op, P, 40.0)
    assert not half.vacuous and half.value > 0
    at_q = coercivity_gap(gs.q.astype(complex), grid, op, P, 40.0)
    assert abs(at_q.value) < 5e-3           # equality case of the threshold


def test_virial_supremum_check(canonical_run, run_setup):
    grid, op, _ = run_setup
    sub = canonical_run.fields[::40]
    chk = virial_supremum_check(sub, grid, [5.0, 10.0, 15.0])
    assert chk.violations == 0
    assert chk.C > 0


# --- decay fits and monitors --------------------------------------------------

def test_predicted_decay_exponents():
    assert predicted_decay_exponent(1.0) == pytest.approx(-0.5)
    assert predicted_decay_exponent(3.0) == pytest.approx(-2.0 / 3.0)
    assert predicted_decay_exponent(2.5) == pytest.approx(-2.0 / 3.0)


def test_morawetz_average_flat_series():
    times = np.linspace(0, 100, 401)
    pots = np.full_like(times, 3.7)
    fit = morawetz_average(times, pots, [10, 20, 40, 80], b=1.0)
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert fit.predicted == -0.5


def test_morawetz_average_validates_input():
    times = np.linspace(0, 10, 21)
    pots = np.ones_like(times)
    with pytest.raises(ValueError):
        morawetz_average(times, pots, [5], b=1.0)
    with pytest.raises(ValueError):
        morawetz_average(times, pots, [5, 50], b=1.0)


def test_standing_wave_orbit_morawetz_slope_zero(run_setup, run_ground_state):
    grid, op, _ = run_setup
    gs, _ = run_ground_state
    times = np.linspace(0, 50, 201)
    pots = np.array([diagnostics.potential_integral(u, grid, 1, 2)
                     for u in propagator.standing_wave_orbit(gs.q, times[::40])])
    fit = morawetz_average(times[::40], pots, [10, 20, 30, 40, 50], b=1.0)
    assert abs(fit.slope) <= 0.02


def test_scattering_indicator_verdicts():
    times = np.linspace(0, 100, 201)
    decaying = 50.0 / (1 + times)
    v = scattering_indicator(times, decaying, R=10.0, epsilon=1.0)
    assert v.met and v.infimum == pytest.approx(50.0 / 101)
    flat = np.full_like(times, 25.0)
    v2 = scattering_indicator(times, flat, R=10.0, epsilon=1.0)
    assert not v2.met
    # epsilon^2 >= total mass: trivially met
    v3 = scattering_indicator(times, flat, R=10.0, epsilon=5.0)
    assert v3.met


def test_strichartz_proxy_conserved_pair(small_setup):
    grid, op, basis = small_setup
    u0 = (0.3 * np.exp(-grid.r ** 2)).astype(np.complex128)
    traj = propagator.evolve(u0, P, grid, basis, op, T=0.2, dt=1e-3,
                             snapshot_every=20, store_fields=True)
    pair = AdmissiblePair(math.inf, 2, 0)
    px = strichartz_proxy(np.asarray(traj.times), traj.fields, grid, pair)
    assert px.label == "PROXY"
    assert px.value == pytest.approx(math.sqrt(traj.records[0].mass), rel=1e-9)


def test_strichartz_proxy_zero_field(small_setup):
    grid, op, _ = small_setup
    pair = AdmissiblePair(4, Fraction(10, 3), 0)
    px = strichartz_proxy(np.array([0.0, 1.0]),
                          [np.zeros(grid.M, complex)] * 2, grid, pair)
    assert px.value == 0.0


def test_strichartz_proxy_rejects_inadmissible(small_setup):
    grid, op, _ = small_setup
    with pytest.raises(ValueError):
        strichartz_proxy(np.array([0.0, 1.0]), [np.zeros(grid.M, complex)] * 2,
                         grid, AdmissiblePair(2, 10, 0))


def test_strichartz_proxy_small_data_window_stabilizes(small_setup):
    grid, op, basis = small_setup
    u0 = (0.05 * np.exp(-grid.r ** 2)).astype(np.complex128)
    traj = propagator.evolve(u0, P, grid, basis, op, T=2.0, dt=1e-3,
                             snapshot_every=100, store_fields=True)
    pair = AdmissiblePair(4, Fraction(10, 3), 0)
    t = np.asarray(traj.times)
    early = strichartz_proxy(t, traj.fields, grid, pair, window=(0.0, 1.0)).value
    late = strichartz_proxy(t, traj.fields, grid, pair, window=(0.0, 2.0)).value
    assert late >= early
    assert (late - early) < 0.8 * early


# --- record / CSV -------------------------------------------------------------

def test_snapshot_record_and_csv(small_setup):
    grid, op, _ = small_setup
    u = (np.exp(-grid.r ** 2) * (1 + 1j)).astype(complex)
    vw = build_virial_weight(2.0, grid)
    rec = diagnostics.snapshot_record(u, 1.5, grid, op, P, ball_radii=[2.0, 4.0],
                                      virial_weight=vw)
    header = diagnostics.csv_header([2.0, 4.0])
    row = diagnostics.format_csv_row(rec)
    assert header[:7] == ["t", "mass", "energy", "grad_L2", "grad_product",
                          "potential", "Z"]
    assert header[-1] == "boundary_fraction"
    assert len(row.split(",")) == len(header)
    assert row.split(",")[0] == "1.5"
    # 17 significant digits round-trip
    assert float(row.split(",")[1]) == rec.mass
