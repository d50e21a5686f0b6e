"""Quantitative functionals along solutions: conserved quantities, threshold
comparisons, localized mass, virial/Morawetz machinery, scattering monitors.

Conventions.  All integrals are the weighted sums of the cell-centered grid;
Lap is the discrete radial Laplacian, so the "gradient norm" of the
fourth-order problem is ||Lap u||_{L2}.  The localized-mass rate implemented
here is

    d/dt int eta_R |u|^2 = -2 Im int (Lap eta_R) (Lap u) conj(u)
                           -4 Im int (d_r eta_R) (d_r conj(u)) (Lap u),

which is what the equation i u_t + Lap^2 u - |x|^{-b}|u|^alpha u = 0 gives
after two integrations by parts (the weight drops out pointwise); the
coefficient pattern (-2, -4) is validated against the exact semi-discrete
derivative -2 Im <Lap^2 u, eta u> in the test suite.

The virial weight a interpolates between rho^2 (rho <= 1/2) and rho
(rho > 1) by the monotone C^1 cubic through the boundary jets; it keeps
d_rho a >= 0 everywhere but cannot also keep d_rho^2 a >= 0 (the slope
starts and ends at 1 while the value must climb from 1/4 to 1, forcing the
second derivative to change sign), so convexity on the matching interval is
not imposed.  For radial data the terms the convexity condition would
control vanish identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (RadialGrid, RadialLaplacian, l2_norm, lp_norm,
                   potential_integral, radial_derivative)
from .groundstate import ThresholdQuantities, energy_functional
from .params import AdmissiblePair, ModelParams, is_admissible


def mass(u: np.ndarray, grid: RadialGrid) -> float:
    """Conserved mass int |u|^2 dx."""
    return float(np.sum(grid.w * np.abs(u) ** 2))


def energy(u: np.ndarray, grid: RadialGrid, op: RadialLaplacian,
           params: ModelParams) -> float:
    """Conserved energy 1/2 ||Lap u||^2 - 1/(alpha+2) int |x|^{-b}|u|^{alpha+2}."""
    return energy_functional(u, grid, op, params)


def gradient_product(u: np.ndarray, grid: RadialGrid, op: RadialLaplacian,
                     s_c: float) -> float:
    """||Lap u||^{s_c} ||u||^{2-s_c}, the scale-invariant comparison quantity."""
    return l2_norm(op.apply(u), grid) ** s_c * l2_norm(u, grid) ** (2 - s_c)


def mass_in_ball(u: np.ndarray, grid: RadialGrid, R: float) -> float:
    """int_{|x| <= R} |u|^2 dx."""
    if R > grid.R_max:
        raise ValueError(f"R = {R} exceeds the domain radius {grid.R_max}")
    sel = grid.r <= R
    return float(np.sum(grid.w[sel] * np.abs(u[sel]) ** 2))


def boundary_mass_fraction(u: np.ndarray, grid: RadialGrid,
                           band: float = 0.05) -> float:
    """Mass fraction in the outer band r >= (1 - band) R_max (wall monitor)."""
    total = mass(u, grid)
    if total == 0:
        return 0.0
    sel = grid.r >= (1 - band) * grid.R_max
    return float(np.sum(grid.w[sel] * np.abs(u[sel]) ** 2)) / total


# ---------------------------------------------------------------------------
# Threshold comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdCheck:
    """Strict-inequality comparisons against the ground-state products.

    ``below_mass_energy`` and ``below_gradient`` are the two hypotheses on
    the data; ``gradient_below_now`` is the same gradient comparison read as
    the along-the-flow conclusion, evaluated for the supplied snapshot.
    """

    below_mass_energy: bool
    below_gradient: bool
    gradient_below_now: bool

    @property
    def all_below(self) -> bool:
        return self.below_mass_energy and self.below_gradient


def check_below_threshold(u: np.ndarray, grid: RadialGrid, op: RadialLaplacian,
                          thresholds: ThresholdQuantities,
                          params: ModelParams) -> ThresholdCheck:
    """Evaluate the strict threshold inequalities for a field snapshot."""
    s_c = params.s_c
    e = energy(u, grid, op, params)
    m = mass(u, grid)
    if e < 0 and s_c != round(s_c):
        raise ValueError(
            f"E[u] = {e} < 0 with non-integer s_c = {s_c}: the mass-energy "
            "product is undefined (fractional power of a negative number)")
    me = e ** s_c * m ** (2 - s_c)
    gp = gradient_product(u, grid, op, s_c)
    below_grad = gp < thresholds.gradient
    return ThresholdCheck(
        below_mass_energy=me < thresholds.mass_energy,
        below_gradient=below_grad,
        gradient_below_now=below_grad)


# ---------------------------------------------------------------------------
# Smooth cutoff (localized mass)
# ---------------------------------------------------------------------------

def _smoothstep5(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quintic smoothstep on [0, 1] with first and second derivatives."""
    v = 6 * s ** 5 - 15 * s ** 4 + 10 * s ** 3
    d1 = 30 * s ** 4 - 60 * s ** 3 + 30 * s ** 2
    d2 = 120 * s ** 3 - 180 * s ** 2 + 60 * s
    return v, d1, d2


@dataclass(frozen=True, eq=False)
class CutoffWeight:
    """eta_R(r) = eta(r/R): 1 on [0, R/2], 0 on [R, inf), quintic smoothstep
    between (C^2, so the tabulated Laplacian is continuous)."""

    R: float
    grid: RadialGrid
    eta: np.ndarray
    d_eta: np.ndarray             # d/dr eta_R
    lap_eta: np.ndarray           # N-dimensional Laplacian of eta_R


def build_cutoff(R: float, grid: RadialGrid) -> CutoffWeight:
    if not 0 < R <= grid.R_max:
        raise ValueError(f"cutoff radius R = {R} must lie in (0, R_max = {grid.R_max}]")
    rho = grid.r / R
    s = np.clip((rho - 0.5) * 2, 0.0, 1.0)
    v, d1, d2 = _smoothstep5(s)
    mid = (rho > 0.5) & (rho < 1.0)

    eta = np.where(rho <= 0.5, 1.0, np.where(rho >= 1.0, 0.0, 1.0 - v))
    d_eta = np.where(mid, -d1 * 2 / R, 0.0)
    dd_eta = np.where(mid, -d2 * 4 / R ** 2, 0.0)
    lap = dd_eta + (grid.N - 1) / grid.r * d_eta
    return CutoffWeight(R=float(R), grid=grid, eta=eta, d_eta=d_eta, lap_eta=lap)


def localized_mass(u: np.ndarray, cutoff: CutoffWeight) -> float:
    """int eta_R |u|^2 dx."""
    return float(np.sum(cutoff.grid.w * cutoff.eta * np.abs(u) ** 2))


def localized_mass_derivative(u: np.ndarray, cutoff: CutoffWeight,
                              op: RadialLaplacian) -> float:
    """Instantaneous rate of int eta_R |u|^2 along the flow (see module docs).

    Vanishes identically for real fields; its magnitude along bounded runs
    scales like 1/R.
    """
    grid = cutoff.grid
    lu = op.apply(u)
    du = radial_derivative(u, grid)
    term_lap = np.imag(np.sum(grid.w * cutoff.lap_eta * lu * np.conj(u)))
    term_cross = np.imag(np.sum(grid.w * cutoff.d_eta * np.conj(du) * lu))
    return float(-2 * term_lap - 4 * term_cross)


# ---------------------------------------------------------------------------
# Virial weight and quantities
# ---------------------------------------------------------------------------

def _hermite_bridge(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cubic on [1/2, 1] with values 1/4 -> 1 and slopes 1 -> 1 at the ends."""
    h = 0.5
    s = (rho - 0.5) / h
    h00 = 2 * s ** 3 - 3 * s ** 2 + 1
    h10 = s ** 3 - 2 * s ** 2 + s
    h01 = -2 * s ** 3 + 3 * s ** 2
    h11 = s ** 3 - s ** 2
    v = 0.25 * h00 + h * h10 + 1.0 * h01 + h * h11
    dh00 = 6 * s ** 2 - 6 * s
    dh10 = 3 * s ** 2 - 4 * s + 1
    dh01 = -6 * s ** 2 + 6 * s
    dh11 = 3 * s ** 2 - 2 * s
    d1 = (0.25 * dh00 + h * dh10 + 1.0 * dh01 + h * dh11) / h
    d2h00 = 12 * s - 6
    d2h10 = 6 * s - 4
    d2h01 = -12 * s + 6
    d2h11 = 6 * s - 2
    d2 = (0.25 * d2h00 + h * d2h10 + 1.0 * d2h01 + h * d2h11) / h ** 2
    return v, d1, d2


@dataclass(frozen=True, eq=False)
class VirialWeight:
    """a_R(r) = R^2 a(r/R) with a = rho^2 inside, rho outside, C^1 bridge."""

    R: float
    grid: RadialGrid
    a: np.ndarray
    d_a: np.ndarray               # d/dr a_R
    dd_a: np.ndarray              # d^2/dr^2 a_R

    @property
    def max_slope_ratio(self) -> float:
        """max_r |d_r a_R| / R = max_rho |a'(rho)| (Cauchy-Schwarz constant)."""
        return float(np.max(np.abs(self.d_a))) / self.R


def build_virial_weight(R: float, grid: RadialGrid) -> VirialWeight:
    """Tabulate the truncated virial weight; requires R <= R_max / 2 so the
    linear branch is actually sampled."""
    if not 0 < R <= grid.R_max / 2:
        raise ValueError(f"virial radius R = {R} must lie in (0, R_max/2 = {grid.R_max / 2}]")
    rho = grid.r / R
    v_in, d_in, dd_in = rho ** 2, 2 * rho, np.full_like(rho, 2.0)
    v_out, d_out, dd_out = rho, np.ones_like(rho), np.zeros_like(rho)
    v_mid, d_mid, dd_mid = _hermite_bridge(np.clip(rho, 0.5, 1.0))

    inner = rho <= 0.5
    outer = rho > 1.0
    a = np.where(inner, v_in, np.where(outer, v_out, v_mid))
    da = np.where(inner, d_in, np.where(outer, d_out, d_mid))
    dda = np.where(inner, dd_in, np.where(outer, dd_out, dd_mid))

    if np.min(da) < 0:
        raise ArithmeticError("virial weight lost monotonicity on the grid")
    return VirialWeight(R=float(R), grid=grid,
                        a=R ** 2 * a, d_a=R * da, dd_a=dda)


def virial_quantity(u: np.ndarray, weight: VirialWeight) -> float:
    """Z = Im int (d_r a_R) (d_r u) conj(u) dx (radial form of the weighted
    momentum); zero for real fields."""
    grid = weight.grid
    du = radial_derivative(u, grid)
    return float(np.imag(np.sum(grid.w * weight.d_a * du * np.conj(u))))


def virial_main_term(u: np.ndarray, grid: RadialGrid, op: RadialLaplacian,
                     params: ModelParams, R: float) -> float:
    """-4 int_{r <= R/2} [ |Lap u|^2 - c |x|^{-b}|u|^{alpha+2} ] with
    c = (N alpha + 2b)/(4(alpha+2)); nonpositive below threshold."""
    if R / 2 > grid.R_max:
        raise ValueError(f"ball radius R/2 = {R / 2} exceeds the domain radius {grid.R_max}")
    alpha, b = float(params.alpha), float(params.b)
    c = (grid.N * alpha + 2 * b) / (4 * (alpha + 2))
    sel = grid.r <= R / 2
    lu = op.apply(u)
    bracket = np.abs(lu[sel]) ** 2 - c * grid.r[sel] ** (-b) * np.abs(u[sel]) ** (alpha + 2)
    return float(-4 * np.sum(grid.w[sel] * bracket))


@dataclass(frozen=True)
class CoercivityGap:
    value: float
    vacuous: bool                 # potential mass below 1e-14: ratio meaningless


def coercivity_gap(u: np.ndarray, grid: RadialGrid, op: RadialLaplacian,
                   params: ModelParams, R: float) -> CoercivityGap:
    """Empirical energy-trapping ratio on the ball r <= R/2:

        ( int [ |Lap u|^2 - c |x|^{-b}|u|^{alpha+2} ] ) / ( int |x|^{-b}|u|^{alpha+2} ).

    Positive values certify coercivity for this snapshot; no uniform constant
    is claimed.
    """
    alpha, b = float(params.alpha), float(params.b)
    c = (grid.N * alpha + 2 * b) / (4 * (alpha + 2))
    sel = grid.r <= R / 2
    lu = op.apply(u)
    pot = float(np.sum(grid.w[sel] * grid.r[sel] ** (-b) * np.abs(u[sel]) ** (alpha + 2)))
    if pot < 1e-14:
        return CoercivityGap(value=math.nan, vacuous=True)
    bracket = float(np.sum(grid.w[sel] * np.abs(lu[sel]) ** 2)) - c * pot
    return CoercivityGap(value=bracket / pot, vacuous=False)


# ---------------------------------------------------------------------------
# Time-averaged decay and scattering monitors
# ---------------------------------------------------------------------------

def predicted_decay_exponent(b: float) -> float:
    """-min{2, b} / (1 + min{2, b}): the averaged-potential decay rate."""
    m = min(2.0, float(b))
    return -m / (1 + m)


@dataclass(frozen=True)
class MorawetzFit:
    T_values: tuple[float, ...]
    averages: tuple[float, ...]   # A(T) = (1/T) int_0^T P(t) dt
    slope: float                  # fitted d log A / d log T
    predicted: float              # -min{2,b}/(1+min{2,b})


def morawetz_average(times: np.ndarray, potentials: np.ndarray,
                     T_values: list[float], b: float) -> MorawetzFit:
    """Trapezoid time-averages of the potential and their log-log slope fit."""
    times = np.asarray(times, dtype=float)
    potentials = np.asarray(potentials, dtype=float)
    if len(T_values) < 2:
        raise ValueError("at least two averaging horizons are required for a fit")
    if np.max(T_values) > times[-1] + 1e-12:
        raise ValueError(
            f"trajectory covers [0, {times[-1]}], cannot average to T = {max(T_values)}")

    averages = []
    for T in T_values:
        sel = times <= T + 1e-12
        if np.sum(sel) < 2:
            raise ValueError(f"too few samples below T = {T} to integrate")
        averages.append(np.trapezoid(potentials[sel], times[sel]) / T)

    slope = float(np.polyfit(np.log(T_values), np.log(averages), 1)[0])
    return MorawetzFit(T_values=tuple(float(T) for T in T_values),
                       averages=tuple(averages), slope=slope,
                       predicted=predicted_decay_exponent(b))


@dataclass(frozen=True)
class ScatteringVerdict:
    met: bool
    infimum: float
    t_at_infimum: float
    R: float
    epsilon: float
    tail_start: float


def scattering_indicator(times: np.ndarray, ball_masses: np.ndarray,
                         R: float, epsilon: float,
                         tail_fraction: float = 0.5) -> ScatteringVerdict:
    """Criterion monitor: met when the tail infimum of the mass in the ball of
    radius R drops to epsilon^2.  The tail is the last ``tail_fraction`` of
    the observed window."""
    times = np.asarray(times, dtype=float)
    ball_masses = np.asarray(ball_masses, dtype=float)
    t_start = times[0] + (1 - tail_fraction) * (times[-1] - times[0])
    sel = times >= t_start
    tail_t, tail_m = times[sel], ball_masses[sel]
    k = int(np.argmin(tail_m))
    return ScatteringVerdict(
        met=bool(tail_m[k] <= epsilon ** 2),
        infimum=float(tail_m[k]), t_at_infimum=float(tail_t[k]),
        R=float(R), epsilon=float(epsilon), tail_start=float(t_start))


@dataclass(frozen=True)
class StrichartzProxy:
    """Finite-window discrete stand-in for one space-time norm.

    This is NOT the supremum over all admissible pairs and NOT an
    infinite-time norm; every report carries the PROXY label.
    """

    value: float
    pair: AdmissiblePair
    window: tuple[float, float]
    label: str = "PROXY"


def strichartz_proxy(times: np.ndarray, fields: list[np.ndarray], grid: RadialGrid,
                     pair: AdmissiblePair,
                     window: tuple[float, float] | None = None) -> StrichartzProxy:
    """( sum_t dt ||u(t)||_{L^r}^q )^{1/q} over the snapshot window (max over
    t when q = inf).  Rejects inadmissible pairs."""
    if not is_admissible(pair, grid.N):
        raise ValueError(f"pair (q={pair.q}, r={pair.r}, s={pair.s}) is not "
                         f"admissible in dimension {grid.N}")
    times = np.asarray(times, dtype=float)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    sel = (times >= window[0] - 1e-12) & (times <= window[1] + 1e-12)
    idx = np.flatnonzero(sel)
    if idx.size == 0:
        raise ValueError(f"no snapshots inside window {window}")

    r = float(pair.r) if pair.r != math.inf else math.inf
    space = np.array([lp_norm(fields[i], grid, r) for i in idx])
    if pair.q == math.inf:
        value = float(np.max(space))
    else:
        q = float(pair.q)
        t = times[idx]
        dt = np.gradient(t) if idx.size > 1 else np.array([0.0])
        value = float(np.sum(dt * space ** q) ** (1 / q))
    return StrichartzProxy(value=value, pair=pair, window=window)


# ---------------------------------------------------------------------------
# Per-snapshot record and CSV layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of the time-series output (fixed column order; 17 digits)."""

    t: float
    mass: float
    energy: float
    grad_l2: float
    grad_product: float
    potential: float
    virial: float                             # Z at the primary virial radius
    ball_masses: dict[float, float] = field(default_factory=dict)
    boundary_fraction: float = 0.0

    def csv_values(self) -> list[float]:
        vals = [self.t, self.mass, self.energy, self.grad_l2,
                self.grad_product, self.potential, self.virial]
        vals.extend(self.ball_masses[R] for R in sorted(self.ball_masses))
        vals.append(self.boundary_fraction)
        return vals


def csv_header(ball_radii: list[float]) -> list[str]:
    head = ["t", "mass", "energy", "grad_L2", "grad_product", "potential", "Z"]
    head.extend(f"mass_in_ball_R{R:g}" for R in sorted(ball_radii))
    head.append("boundary_fraction")
    return head


def format_csv_row(record: DiagnosticsRecord) -> str:
    return ",".join(f"{v:.17g}" for v in record.csv_values())


def snapshot_record(u: np.ndarray, t: float, grid: RadialGrid, op: RadialLaplacian,
                    params: ModelParams, ball_radii: list[float] = (),
                    virial_weight: VirialWeight | None = None,
                    boundary_band: float = 0.05) -> DiagnosticsRecord:
    """Evaluate the full diagnostic set on one snapshot."""
    lu = op.apply(u)
    grad = l2_norm(lu, grid)
    m = mass(u, grid)
    pot = potential_integral(u, grid, params.b, params.alpha)
    s_c = params.s_c
    return DiagnosticsRecord(
        t=float(t), mass=m,
        energy=0.5 * grad ** 2 - pot / (float(params.alpha) + 2),
        grad_l2=grad,
        grad_product=grad ** s_c * m ** ((2 - s_c) / 2),
        potential=pot,
        virial=virial_quantity(u, virial_weight) if virial_weight is not None else 0.0,
        ball_masses={float(R): mass_in_ball(u, grid, R) for R in ball_radii},
        boundary_fraction=boundary_mass_fraction(u, grid, boundary_band))


# ---------------------------------------------------------------------------
# Post-processed virial bound check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirialBoundCheck:
    C: float                      # fitted per-run constant
    radii: tuple[float, ...]
    suprema: dict[float, float]   # sup_t |Z(t; R)| per radius
    violations: int               # count of (t, R) with |Z| > C R


def virial_supremum_check(fields: list[np.ndarray], grid: RadialGrid,
                          radii: list[float]) -> VirialBoundCheck:
    """Verify |Z(t)| <= C R across radii with one per-run constant.

    C is fitted from the run as max_t ||d_r u|| ||u|| times the maximal slope
    of the virial profile, the discrete Cauchy-Schwarz majorant, so a
    violation would indicate a broken quadrature identity rather than bad
    dynamics.
    """
    weights = {R: build_virial_weight(R, grid) for R in radii}
    slope = max(wt.max_slope_ratio for wt in weights.values())
    cs = max(l2_norm(radial_derivative(u, grid), grid) * l2_norm(u, grid)
             for u in fields)
    C = slope * cs

    suprema = {}
    violations = 0
    for R, wt in weights.items():
        zs = np.array([abs(virial_quantity(u, wt)) for u in fields])
        suprema[float(R)] = float(np.max(zs))
        violations += int(np.sum(zs > C * R * (1 + 1e-12)))
    return VirialBoundCheck(C=float(C), radii=tuple(float(R) for R in radii),
                            suprema=suprema, violations=violations)
