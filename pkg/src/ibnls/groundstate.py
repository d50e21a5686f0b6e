"""Ground-state profiles of the stationary equation and their thresholds.

The solver computes a real radial profile Q of

    (Lap^2 + 1) Q = |x|^{-b} |Q|^alpha Q

by Petviashvili iteration: with N(Q) = |x|^{-b}|Q|^alpha Q and the
stabilizing exponent gamma = (alpha+1)/alpha,

    m_n = <(Lap^2 + 1) Q_n, Q_n> / <N(Q_n), Q_n>,
    Q_{n+1} = m_n^gamma (Lap^2 + 1)^{-1} N(Q_n),

where the resolvent is diagonal in the Laplacian eigenbasis with entries
1/(lambda_k^2 + 1).  At a fixed point m = 1.  The +1 frequency shift keeps
the resolvent symbol strictly positive; the opposite shift (exposed through
``GroundStateControls.shift`` for experimentation) makes the symbol vanish on
the continuous spectrum and the iteration is not expected to converge there.

No positivity is imposed on Q: fourth-order problems lack a maximum
principle and the profile may have oscillatory tails.  Realness is enforced
by projecting out the imaginary part each sweep.

Convergence requires both a small successive change and a small equation
residual; successive change alone can stall away from a solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (RadialGrid, RadialLaplacian, SpectralBasis, l2_norm,
                   potential_integral)
from .params import ModelParams, validate_intercritical


class PetviashviliError(RuntimeError):
    """Iteration failed; carries the multiplier history for post-mortems."""

    def __init__(self, message: str, multipliers: list[float]):
        super().__init__(message)
        self.multipliers = multipliers


@dataclass(frozen=True)
class GroundStateControls:
    """Iteration knobs.

    The residual is evaluated in float64 through two tridiagonal applies, so
    it bottoms out near eps * lambda_max^2 / 10 (about 1e-6 at dr ~ 0.01 in
    5D); on substantially finer grids scale ``residual_tol`` to that floor.
    """

    max_iter: int = 2000
    tol: float = 1e-10            # successive relative change
    residual_tol: float = 1e-6    # equation residual gate
    damping: float = 1.0          # fraction of the Petviashvili update applied
    shift: float = 1.0            # frequency shift; -1 exposes the degenerate sign
    seed_width: float = 1.0


@dataclass(frozen=True, eq=False)
class GroundState:
    """Converged profile with the scalar quantities entering the thresholds."""

    q: np.ndarray
    params: ModelParams
    grid: RadialGrid
    mass: float                   # ||Q||_{L2}^2
    energy: float
    l2: float                     # ||Q||_{L2}
    grad_l2: float                # ||Lap Q||_{L2}
    potential: float              # int |x|^{-b} |Q|^{alpha+2}
    residual: float
    multiplier: float
    iterations: int
    controls: GroundStateControls

    @property
    def identity_gap(self) -> float:
        """Relative defect of ||Lap Q||^2 + ||Q||^2 = int |x|^{-b}|Q|^{alpha+2}."""
        lhs = self.grad_l2 ** 2 + self.controls.shift * self.l2 ** 2
        return abs(lhs - self.potential) / self.potential


def gaussian_seed(grid: RadialGrid, width: float = 1.0, amplitude: float = 1.0) -> np.ndarray:
    return amplitude * np.exp(-((grid.r / width) ** 2))


def energy_functional(u: np.ndarray, grid: RadialGrid, op: RadialLaplacian,
                      params: ModelParams) -> float:
    """E[u] = 1/2 ||Lap u||^2 - 1/(alpha+2) int |x|^{-b} |u|^{alpha+2}."""
    kin = 0.5 * l2_norm(op.apply(u), grid) ** 2
    pot = potential_integral(u, grid, params.b, params.alpha) / (float(params.alpha) + 2)
    return kin - pot


def solve_ground_state(params: ModelParams, grid: RadialGrid, basis: SpectralBasis,
                       op: RadialLaplacian, controls: GroundStateControls | None = None,
                       seed: np.ndarray | None = None) -> GroundState:
    """Petviashvili iteration for the stationary profile.

    Raises PetviashviliError on collapse to zero or when max_iter is reached
    without meeting both the successive-change and residual gates.
    """
    report = validate_intercritical(params)
    if not report.ok:
        raise ValueError("valid intercritical parameters required:\n" + str(report))
    controls = controls or GroundStateControls()

    alpha = float(params.alpha)
    b = float(params.b)
    gamma_exp = (alpha + 1) / alpha
    weight = grid.r ** (-b)
    resolvent = 1.0 / (basis.eigenvalues ** 2 + controls.shift)

    q = np.real(seed).astype(float) if seed is not None else gaussian_seed(
        grid, controls.seed_width)
    q0_norm = l2_norm(q, grid)
    if q0_norm == 0:
        raise ValueError("seed must be nonzero")

    multipliers: list[float] = []
    residual = np.inf
    for n in range(1, controls.max_iter + 1):
        nl = weight * np.abs(q) ** alpha * q
        lq = op.apply(q)
        numer = float(np.sum(grid.w * (lq ** 2 + controls.shift * q ** 2)))
        denom = float(np.sum(grid.w * nl * q))
        if abs(denom) < 1e-300:
            raise PetviashviliError("nonlinear pairing vanished (field collapsed)",
                                    multipliers)
        m = numer / denom
        multipliers.append(m)

        update = basis.from_coeffs(resolvent * basis.to_coeffs(nl))
        update = np.real(update)                      # project out imaginary dust
        q_next = np.sign(m) * abs(m) ** gamma_exp * update
        if controls.damping != 1.0:
            q_next = (1 - controls.damping) * q + controls.damping * q_next

        change = l2_norm(q_next - q, grid) / max(l2_norm(q, grid), 1e-300)
        q = q_next

        qnorm = l2_norm(q, grid)
        if qnorm < 1e-12 * q0_norm:
            raise PetviashviliError(f"profile collapsed to zero at iteration {n}",
                                    multipliers)

        nl = weight * np.abs(q) ** alpha * q
        residual = l2_norm(op.apply_squared(q) + controls.shift * q - nl, grid) / qnorm
        if change < controls.tol and residual < controls.residual_tol:
            break
    else:
        raise PetviashviliError(
            f"no convergence after {controls.max_iter} iterations "
            f"(last change {change:.3e}, residual {residual:.3e})", multipliers)

    l2 = l2_norm(q, grid)
    grad = l2_norm(op.apply(q), grid)
    pot = potential_integral(q, grid, b, alpha)
    return GroundState(
        q=q, params=params, grid=grid,
        mass=l2 ** 2,
        energy=energy_functional(q, grid, op, params),
        l2=l2, grad_l2=grad, potential=pot,
        residual=residual, multiplier=multipliers[-1], iterations=n,
        controls=controls)


@dataclass(frozen=True)
class ThresholdQuantities:
    """The two scalar comparison products, with provenance."""

    mass_energy: float            # E[Q]^{s_c} M[Q]^{2-s_c}
    gradient: float               # ||Lap Q||^{s_c} ||Q||^{2-s_c}
    provenance: dict = field(default_factory=dict)


def threshold_quantities(gs: GroundState, params: ModelParams | None = None) -> ThresholdQuantities:
    """Threshold products of a converged ground state.

    Refuses profiles whose residual exceeds the residual gate (e.g. stale
    data loaded from disk).
    """
    params = params or gs.params
    if gs.residual > gs.controls.residual_tol:
        raise ValueError(
            f"ground state residual {gs.residual:.3e} exceeds the gate "
            f"{gs.controls.residual_tol:.1e}; refusing threshold evaluation")
    s_c = params.s_c
    if gs.energy < 0 and s_c != round(s_c):
        raise ValueError(
            f"E[Q] = {gs.energy} < 0 with non-integer s_c = {s_c}: "
            "fractional power of a negative number is undefined")
    return ThresholdQuantities(
        mass_energy=gs.energy ** s_c * gs.mass ** (2 - s_c),
        gradient=gs.grad_l2 ** s_c * gs.l2 ** (2 - s_c),
        provenance={
            "N": params.N, "b": float(params.b), "alpha": float(params.alpha),
            "s_c": s_c, "grid_M": gs.grid.M, "grid_R_max": gs.grid.R_max,
            "residual": gs.residual, "iterations": gs.iterations,
            "shift": gs.controls.shift,
        })
