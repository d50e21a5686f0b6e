"""Split-step time evolution: exact spectral linear flow, exact phase flow.

Rewriting the equation as u_t = i Lap^2 u - i |x|^{-b} |u|^alpha u, both
subflows integrate exactly:

  linear    coefficients pick up exp(i lambda_k^2 tau) in the Laplacian
            eigenbasis (Lap^2 realized as the square of the discrete
            Laplacian), a weighted-norm isometry;
  nonlinear u_j <- u_j exp(-i tau r_j^{-b} |u_j|^alpha): |u_j| is invariant
            under this subflow, so the phase rotation is its exact solution.

A Strang step composes half nonlinear, full linear, half nonlinear; mass is
conserved to roundoff per step and energy drifts at O(dt^2).  Because both
substeps are exact group elements, stepping back with -dt inverts a forward
step exactly up to roundoff.

Step size: the linear step has no stability limit (it is exact); dt controls
only the splitting error, dominated by the nonlinear phase.  The
conservative bound ``suggested_dt`` resolves even the fastest linear mode,
which at production grid sizes is orders of magnitude below what accuracy
requires -- the canned studies therefore pin dt explicitly (default 2e-3 for
the canonical scenario) and verify second-order behavior by Richardson
tests rather than relying on the pessimistic bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .diagnostics import DiagnosticsRecord, VirialWeight
from .grid import RadialGrid, RadialLaplacian, SpectralBasis, h2_norm, l2_norm
from .params import ModelParams


def suggested_dt(basis: SpectralBasis, safety: float = 0.5) -> float:
    """Step resolving the fastest linear phase, dt = safety / lambda_max^2.

    Far smaller than accuracy requires on fine grids (the linear step is
    exact); see the module docstring.
    """
    return safety / basis.lambda_max ** 2


def linear_step(u: np.ndarray, basis: SpectralBasis, tau: float) -> np.ndarray:
    """Exact free flow exp(i tau Lap^2) in the eigenbasis."""
    c = basis.to_coeffs(u.astype(np.complex128, copy=False))
    c *= np.exp(1j * tau * basis.eigenvalues ** 2)
    return basis.from_coeffs(c)


def nonlinear_step(u: np.ndarray, grid: RadialGrid, params: ModelParams,
                   tau: float) -> np.ndarray:
    """Exact potential flow: pointwise phase exp(-i tau r^{-b} |u|^alpha)."""
    phase = tau * grid.r ** (-float(params.b)) * np.abs(u) ** float(params.alpha)
    return u * np.exp(-1j * phase)


def strang_step(u: np.ndarray, basis: SpectralBasis, grid: RadialGrid,
                params: ModelParams, dt: float, nonlinearity: bool = True) -> np.ndarray:
    if not nonlinearity:
        return linear_step(u, basis, dt)
    u = nonlinear_step(u, grid, params, dt / 2)
    u = linear_step(u, basis, dt)
    return nonlinear_step(u, grid, params, dt / 2)


@dataclass(frozen=True, eq=False)
class EvolutionState:
    u: np.ndarray
    t: float
    dt: float
    step: int


@dataclass(eq=False)
class Trajectory:
    """Snapshots and diagnostics of one evolution.

    ``status`` is "completed", "blowup_guard", or "boundary_guard"; a guard
    trip is a finding, not a failure, and the records collected up to the
    trip are retained.
    """

    params: ModelParams
    grid: RadialGrid
    dt: float
    times: list[float] = field(default_factory=list)
    records: list[DiagnosticsRecord] = field(default_factory=list)
    fields: list[np.ndarray] = field(default_factory=list)
    status: str = "completed"
    guard_message: str = ""

    @property
    def potentials(self) -> np.ndarray:
        return np.array([rec.potential for rec in self.records])

    def ball_series(self, R: float) -> np.ndarray:
        return np.array([rec.ball_masses[float(R)] for rec in self.records])

    def field_at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.fields[k]


def evolve(u0: np.ndarray, params: ModelParams, grid: RadialGrid,
           basis: SpectralBasis, op: RadialLaplacian, T: float, dt: float,
           snapshot_every: int = 100, ball_radii: list[float] = (),
           virial_weight: VirialWeight | None = None,
           blowup_guard: float | None = None,
           boundary_guard: float | None = None,
           boundary_band: float = 0.05,
           store_fields: bool = True,
           nonlinearity: bool = True,
           observers: list | None = None) -> Trajectory:
    """Advance u0 to time T, recording diagnostics every ``snapshot_every``
    steps (guards are also checked at that cadence).

    ``blowup_guard`` aborts when ||Lap u|| exceeds it (protects sweeps above
    threshold); ``boundary_guard`` aborts when the outer-band mass fraction
    exceeds it.  On a truncated domain every dispersing solution eventually
    populates the wall, so the boundary monitor defaults to record-only
    (None): the fraction is written into every record and the caller decides.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    steps = int(round(T / dt))

    traj = Trajectory(params=params, grid=grid, dt=dt)
    u = u0.astype(np.complex128, copy=True)

    def snapshot(step: int) -> bool:
        t = step * dt
        rec = diagnostics.snapshot_record(
            u, t, grid, op, params, ball_radii=ball_radii,
            virial_weight=virial_weight, boundary_band=boundary_band)
        traj.times.append(t)
        traj.records.append(rec)
        if store_fields:
            traj.fields.append(u.copy())
        for obs in observers or ():
            obs(EvolutionState(u=u, t=t, dt=dt, step=step))
        if blowup_guard is not None and rec.grad_l2 > blowup_guard:
            traj.status = "blowup_guard"
            traj.guard_message = (
                f"||Lap u|| = {rec.grad_l2:.6g} exceeded the guard "
                f"{blowup_guard:.6g} at t = {t:.6g} (norm growth)")
            return False
        if boundary_guard is not None and rec.boundary_fraction > boundary_guard:
            traj.status = "boundary_guard"
            traj.guard_message = (
                f"boundary mass fraction {rec.boundary_fraction:.3e} exceeded "
                f"{boundary_guard:.3e} at t = {t:.6g} (R_max too small)")
            return False
        return True

    if not snapshot(0):
        return traj
    for step in range(1, steps + 1):
        u = strang_step(u, basis, grid, params, dt, nonlinearity=nonlinearity)
        if step % snapshot_every == 0 or step == steps:
            if not snapshot(step):
                return traj
    return traj


# ---------------------------------------------------------------------------
# Scattering signature: back-propagated profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BackPropagation:
    """Free-flow pullbacks v(t_k) = exp(-i t_k Lap^2) u(t_k) and the Cauchy
    increments ||v(t_{k+1}) - v(t_k)||_{H^2}; decreasing increments signal
    convergence to a free profile.

    On a truncated domain the comparison is meaningful only before dispersed
    waves return from the Dirichlet wall and refocus (radial geometry makes
    the refocusing coherent); the sampling times should end inside that
    window.  A standing wave produces increments of constant magnitude over
    equal gaps, so it never satisfies the strict-decrease signature.
    """

    times: tuple[float, ...]
    increments: tuple[float, ...]

    @property
    def monotone_decreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.increments, self.increments[1:]))

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.increments, self.increments[1:]))


def back_propagated_profile(fields: list[np.ndarray], times: list[float],
                            basis: SpectralBasis, op: RadialLaplacian) -> BackPropagation:
    if len(fields) != len(times) or len(fields) < 2:
        raise ValueError("need at least two snapshots with matching times")
    profiles = [linear_step(u, basis, -t) for u, t in zip(fields, times)]
    increments = [h2_norm(b - a, op) for a, b in zip(profiles, profiles[1:])]
    return BackPropagation(times=tuple(float(t) for t in times),
                           increments=tuple(increments))


def standing_wave_orbit(q: np.ndarray, times: list[float],
                        shift: float = 1.0) -> list[np.ndarray]:
    """Exact solitary-wave orbit u(t) = exp(-i shift t) Q of the semi-discrete
    flow (Q solving (Lap^2 + shift) Q = |x|^{-b}|Q|^alpha Q makes this exact;
    no time stepping is involved).

    Split-step trajectories launched from Q depart from this orbit on an O(1)
    horizon: the intercritical solitary wave is dynamically unstable, and the
    splitting error seeds the instability.  Control experiments therefore use
    this exact orbit rather than a stepped run.
    """
    return [np.exp(-1j * shift * t) * q.astype(np.complex128) for t in times]


def time_reverse(u: np.ndarray, params: ModelParams, grid: RadialGrid,
                 basis: SpectralBasis, steps: int, dt: float) -> np.ndarray:
    """Run ``steps`` forward then ``steps`` backward; returns the final field
    (equal to u up to roundoff: the splitting is symmetric)."""
    v = u.astype(np.complex128, copy=True)
    for _ in range(steps):
        v = strang_step(v, basis, grid, params, dt)
    for _ in range(steps):
        v = strang_step(v, basis, grid, params, -dt)
    return v
