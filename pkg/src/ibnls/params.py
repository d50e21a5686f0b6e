"""Equation parameters, critical-index algebra, and exact exponent arithmetic.

The model is the focusing inhomogeneous biharmonic NLS

    i u_t + Lap^2 u - |x|^{-b} |u|^alpha u = 0,   x in R^N,

whose scaling-critical Sobolev index is s_c = N/2 - (4-b)/alpha.  The
intercritical window 0 < s_c < 2 corresponds to

    (8-2b)/N < alpha < (8-2b)/(N-4)   (upper bound dropped for N = 3, 4).

All exponent bookkeeping in this module (admissible space-time pairs, the
five-exponent Hoelder systems used for the singular-weight estimates) is done
in exact rational arithmetic: these relations are identities over Q and drift
under floating point.  Floats enter only through ``ModelParams.s_c``, the
value consumed by the numerics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]
Real = Union[int, float, Fraction]

INF = math.inf


def _frac(x, name: str) -> Fraction:
    """Convert to Fraction, rejecting floats (binary dust defeats exactness)."""
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(
            f"{name} must be an exact rational (int, Fraction, or 'p/q' string), got {x!r}"
        )
    return Fraction(x)


def _frac_lenient(x) -> Fraction:
    """Exact conversion for classification; floats map to their binary value."""
    return Fraction(x)


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple (N, b, alpha) of the equation.

    ``strict`` enforces N >= 5 (the regime of the scattering theory); with
    ``strict=False`` dimensions 3 and 4 are accepted for exploratory runs and
    the energy-critical upper bound on alpha is dropped.
    """

    N: int
    b: Real
    alpha: Real
    strict: bool = True

    @property
    def s_c(self) -> float:
        return critical_index(self)

    def s_c_exact(self) -> Fraction:
        """Critical index as an exact rational; requires rational b, alpha."""
        b = _frac(self.b, "b")
        alpha = _frac(self.alpha, "alpha")
        return Fraction(self.N, 2) - (4 - b) / alpha

    def alpha_window(self) -> tuple[float, float]:
        """Open intercritical window for alpha; upper bound inf when N <= 4."""
        lo = (8 - 2 * float(self.b)) / self.N
        hi = (8 - 2 * float(self.b)) / (self.N - 4) if self.N >= 5 else INF
        return lo, hi


def critical_index(params: ModelParams) -> float:
    """s_c = N/2 - (4-b)/alpha, the scale-invariant Sobolev regularity."""
    if not float(params.alpha) > 0:
        raise ValueError(f"alpha must be positive, got {params.alpha}")
    return params.N / 2 - (4 - float(params.b)) / float(params.alpha)


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{'pass' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        return "\n".join(lines)


def validate_intercritical(params: ModelParams) -> ValidationReport:
    """Check the intercritical parameter constraints; failures are data, not faults."""
    N, b, alpha = params.N, float(params.b), float(params.alpha)
    checks = []

    n_min = 5 if params.strict else 3
    checks.append(ConstraintCheck(
        "dimension", N >= n_min,
        f"N >= {n_min} required ({'strict' if params.strict else 'exploratory'} mode), got N = {N}"))

    b_cap = min(N / 2, 4.0)
    checks.append(ConstraintCheck(
        "decay", 0 < b < b_cap,
        f"0 < b < min{{N/2, 4}} = {b_cap} required, got b = {b}"))

    lo = (8 - 2 * b) / N
    checks.append(ConstraintCheck(
        "alpha_lower", alpha > lo,
        f"alpha > (8-2b)/N = {lo} required, got alpha = {alpha}"))

    if N >= 5:
        hi = (8 - 2 * b) / (N - 4)
        checks.append(ConstraintCheck(
            "alpha_upper", alpha < hi,
            f"alpha < (8-2b)/(N-4) = {hi} required, got alpha = {alpha}"))

    if alpha > 0:
        s_c = critical_index(params)
        upper_ok = s_c < 2 if N >= 5 else True
        checks.append(ConstraintCheck(
            "critical_index", 0 < s_c and upper_ok,
            f"0 < s_c < 2 required, got s_c = {s_c}"))
    else:
        checks.append(ConstraintCheck("critical_index", False,
                                      f"alpha must be positive, got {alpha}"))

    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------------------
# Admissible space-time pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissiblePair:
    """Space-time exponent pair (q, r) at Sobolev level s (s = 0: plain pairs).

    The defining scaling relation is 4/q + N/r = N/2 - s.  ``q`` may be
    ``math.inf``; so may ``r`` in dimensions N <= 3 at s = 0.
    """

    q: Real
    r: Real
    s: Real = 0

    def scaling_defect(self, N: int) -> Fraction:
        """4/q + N/r - N/2 + s, exactly (0 iff the relation holds)."""
        q_term = Fraction(0) if self.q == INF else 4 / _frac_lenient(self.q)
        r_term = Fraction(0) if self.r == INF else N / _frac_lenient(self.r)
        return q_term + r_term - Fraction(N, 2) + _frac_lenient(self.s)


def is_admissible(pair: AdmissiblePair, N: int) -> bool:
    """Exact membership test for the dimension-dependent admissible range.

    s = 0: 2 <= r < 2N/(N-4) for N >= 5, 2 <= r < inf for N = 4,
    2 <= r <= inf for N <= 3.  s != 0: 2N/(N-2s) <= r < 2N/(N-4) for N >= 5
    (lower endpoint included), upper bound dropped for N <= 4.  In all cases
    the scaling relation must hold exactly and q must lie in [2, inf].
    """
    q, r, s = pair.q, pair.r, pair.s
    if not (q == INF or float(q) > 0) or not (r == INF or float(r) > 0):
        raise ValueError(f"q, r must be positive or infinite, got q={q}, r={r}")

    if q != INF and _frac_lenient(q) < 2:
        return False
    if pair.scaling_defect(N) != 0:
        return False

    s_f = _frac_lenient(s)
    r_hi = Fraction(2 * N, N - 4) if N >= 5 else INF

    if s_f == 0:
        if r == INF:
            return N <= 3
        r_f = _frac_lenient(r)
        if r_f < 2:
            return False
        return True if r_hi == INF else r_f < r_hi

    # s != 0: lower endpoint 2N/(N - 2s) is included
    if N - 2 * s_f <= 0:
        return False
    r_lo = Fraction(2 * N) / (N - 2 * s_f)
    if r == INF:
        return False
    r_f = _frac_lenient(r)
    if r_f < r_lo:
        return False
    return True if r_hi == INF else r_f < r_hi


# ---------------------------------------------------------------------------
# Five-exponent Hoelder system (N = 5) for the singular-weight estimate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentSystem:
    """Exponents of the Hoelder/Sobolev split of |x|^{-(b+1)} |u|^alpha u in 5D.

    ``l`` is 2 - s_c on the unit ball and -s_c on its exterior; the aggregate
    theta_tilde * eta plays the role of the small interpolation power.
    """

    eta: Fraction
    theta_tilde: Fraction
    region: str
    l: Fraction
    r1: Fraction
    r2: Fraction
    r3: Fraction
    r4: Fraction
    r5: Fraction
    alpha1: Fraction
    alpha2: Fraction


@dataclass(frozen=True)
class ExponentReport:
    system: ExponentSystem
    checks: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        return "\n".join(
            f"[{'pass' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in self.checks)


def verify_exponent_system(params: ModelParams, eta, theta_tilde,
                           region: str = "ball") -> ExponentReport:
    """Construct the 5D exponent system and verify its identities exactly.

    Verified, all in rational arithmetic:
      holder_sum          1/r1 + tt*eta/r2 + a1/r3 + a2/r4 + 1/r5 = 7/10
      power_budget        alpha1 + alpha2 + tt*eta = alpha
      admissibility       the three space-time pairs used downstream lie in
                          their admissible ranges
      time_interpolation  a1*eta/(4a) + a2*(4-b-eta)/(4a) + (1-eta)/8 = 1/2
      alpha1_range        0 < alpha1 < alpha - tt*eta
      weight_integrable   5/r1 > b+1 on the ball, 5/r1 < b+1 outside

    Preconditions: N = 5, 7-2b <= alpha < 8-2b, rational inputs, eta and
    theta_tilde positive.  There is no magic smallness constant: any positive
    rationals for which every check passes are accepted.
    """
    if params.N != 5:
        raise ValueError(f"exponent system is specific to N = 5, got N = {params.N}")
    if region not in ("ball", "exterior"):
        raise ValueError(f"region must be 'ball' or 'exterior', got {region!r}")

    b = _frac(params.b, "b")
    alpha = _frac(params.alpha, "alpha")
    eta = _frac(eta, "eta")
    tt = _frac(theta_tilde, "theta_tilde")

    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if tt <= 0:
        raise ValueError(f"theta_tilde must be positive, got {tt}")
    if not (0 < b < Fraction(5, 2)):
        raise ValueError(f"need 0 < b < 5/2, got b = {b}")
    if not (7 - 2 * b <= alpha < 8 - 2 * b):
        raise ValueError(f"need 7 - 2b <= alpha < 8 - 2b, got alpha = {alpha} at b = {b}")

    s_c = Fraction(5, 2) - (4 - b) / alpha
    l = (2 - s_c) if region == "ball" else -s_c

    inv_r1 = (b + 1 + l * tt * eta) / 5
    inv_r2 = (4 - b) / (5 * alpha) - l / 5
    inv_r3 = (4 - b - eta) / (5 * alpha)
    inv_r4 = eta / (5 * alpha)
    inv_r5 = eta / 10
    for name, inv in (("r1", inv_r1), ("r2", inv_r2), ("r3", inv_r3),
                      ("r4", inv_r4), ("r5", inv_r5)):
        if inv <= 0:
            raise ValueError(f"1/{name} = {inv} is not positive; system degenerate")

    den = 8 - 2 * b - 4 * eta
    alpha1 = (5 - 2 * b) / den * alpha - (3 * alpha + tt * (8 - 2 * b) - 2 * tt * eta) / den * eta
    alpha2 = 3 / den * alpha - (alpha - 2 * tt * eta) / den * eta

    system = ExponentSystem(
        eta=eta, theta_tilde=tt, region=region, l=l,
        r1=1 / inv_r1, r2=1 / inv_r2, r3=1 / inv_r3, r4=1 / inv_r4, r5=1 / inv_r5,
        alpha1=alpha1, alpha2=alpha2)

    checks = []

    holder = inv_r1 + tt * eta * inv_r2 + alpha1 * inv_r3 + alpha2 * inv_r4 + inv_r5
    checks.append(ConstraintCheck(
        "holder_sum", holder == Fraction(7, 10),
        f"1/r1 + tt*eta/r2 + a1/r3 + a2/r4 + 1/r5 = {holder} (want 7/10)"))

    budget = alpha1 + alpha2 + tt * eta
    checks.append(ConstraintCheck(
        "power_budget", budget == alpha,
        f"alpha1 + alpha2 + tt*eta = {budget} (want alpha = {alpha})"))

    pairs = (
        ("sobolev_pair", AdmissiblePair(4 * alpha / eta, 5 * alpha / (4 - b - eta), s_c)),
        ("plain_pair_1", AdmissiblePair(4 * alpha / (4 - b - eta),
                                        5 * alpha / (alpha * s_c + eta), Fraction(0))),
        ("plain_pair_2", AdmissiblePair(Fraction(8) / (1 - eta),
                                        Fraction(10) / (4 + eta), Fraction(0))),
    )
    for name, pair in pairs:
        ok = is_admissible(pair, 5)
        checks.append(ConstraintCheck(
            f"admissible_{name}", ok,
            f"(q, r, s) = ({pair.q}, {pair.r}, {pair.s}) "
            f"{'lies' if ok else 'does NOT lie'} in the admissible range"))

    # Time-exponent interpolation across L^{4a/eta}, L^{4a/(4-b-eta)}, L^{8/(1-eta)}
    # with powers alpha1, alpha2, 1; must land on L^2 in time.
    interp = alpha1 * eta / (4 * alpha) + alpha2 * (4 - b - eta) / (4 * alpha) + (1 - eta) / 8
    checks.append(ConstraintCheck(
        "time_interpolation", interp == Fraction(1, 2),
        f"a1*eta/(4a) + a2*(4-b-eta)/(4a) + (1-eta)/8 = {interp} (want 1/2)"))

    checks.append(ConstraintCheck(
        "alpha1_range", 0 < alpha1 < alpha - tt * eta,
        f"alpha1 = {alpha1}, must lie in (0, alpha - tt*eta) = (0, {alpha - tt * eta})"))

    five_over_r1 = 5 * inv_r1
    if region == "ball":
        ok = five_over_r1 > b + 1
        want = f"5/r1 = {five_over_r1} > b+1 = {b + 1} (ball)"
    else:
        ok = five_over_r1 < b + 1
        want = f"5/r1 = {five_over_r1} < b+1 = {b + 1} (exterior)"
    checks.append(ConstraintCheck("weight_integrable", ok, want))

    return ExponentReport(system, tuple(checks))


def embedding_window(params: ModelParams) -> tuple[Fraction, Fraction]:
    """Open interval (2N/(N+8), 2N/(N+4)) of Lebesgue exponents for which the
    weighted nonlinearity maps H^2 boundedly.

    Also evaluates, for ten rationals sampled strictly inside the window, the
    embedding exponent N*r*(alpha+1)/(N - r*b) and asserts it lies in
    (2, 2N/(N-4)) (upper bound dropped for N <= 4); raises if any sample
    falls outside, which cannot happen for valid intercritical parameters.
    """
    report = validate_intercritical(params)
    if not report.ok:
        raise ValueError("valid intercritical parameters required:\n" + str(report))

    N = params.N
    b = _frac_lenient(params.b)
    alpha = _frac_lenient(params.alpha)
    lo = Fraction(2 * N, N + 8)
    hi = Fraction(2 * N, N + 4)

    cap = Fraction(2 * N, N - 4) if N >= 5 else INF
    for k in range(1, 11):
        r = lo + Fraction(k, 11) * (hi - lo)
        emb = N * r * (alpha + 1) / (N - r * b)
        if not (2 < emb and (cap == INF or emb < cap)):
            raise ArithmeticError(
                f"embedding exponent {emb} at r = {r} escapes (2, {cap})")
    return lo, hi
