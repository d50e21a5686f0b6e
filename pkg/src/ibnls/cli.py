"""Command-line front end: config ingestion, run orchestration, persistence.

Subcommands
    groundstate   solve the stationary profile, persist field + sidecar
    evolve        single evolution with full diagnostics
    sweep         dichotomy sweep over amplitudes c (initial data c*Q)
    morawetz      time-averaged potential decay study
    check-pairs   classify admissible pairs in exact arithmetic
    exponents     verify the 5D exponent systems in exact arithmetic
    report        summarize a completed run directory

Output formats: CSV for time series (17 significant digits, fixed column
order), JSON for summaries and the manifest, the binary field container for
profiles.  The manifest is written last; its presence marks a completed run.
Exit codes: 0 success, 1 validation failure, 2 IO failure, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, fieldio, propagator
from .grid import build_grid, build_laplacian, eigendecompose, l2_norm
from .groundstate import (GroundStateControls, PetviashviliError,
                          gaussian_seed, solve_ground_state,
                          threshold_quantities)
from .params import (AdmissiblePair, ModelParams, is_admissible,
                     validate_intercritical, verify_exponent_system)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

STUDIES = ("groundstate", "evolve", "sweep", "morawetz")

# The canonical scenario: N=5, b=1, alpha=2 (s_c = 1) on [0, 30].  dt is
# pinned rather than derived: the split-step error is governed by the
# nonlinear phase rate max r^{-b}|u|^alpha (~1.3e3 for ground-state-sized
# data at M=512), not by the exactly-integrated linear phase.
DEFAULT_CONFIG = {
    "params": {"N": 5, "b": 1.0, "alpha": 2.0, "strict_mode": True},
    "grid": {"R_max": 30.0, "M": 512},
    "solver": {"dt": 1e-4, "T": 100.0, "snapshot_every": 5000,
               "blowup_guard": 10.0, "boundary_guard": None,
               "nonlinearity": True},
    "ground_state": {"max_iter": 2000, "tol": 1e-10, "residual_tol": 1e-6,
                     "damping": 1.0, "shift": 1.0, "seed_width": 1.0},
    "study": "evolve",
    "initial_data": {"type": "scaled_ground_state", "c": 0.5},
    "diagnostics": {"ball_radii": [10.0], "virial_radii": [10.0],
                    "criterion_grid": [[10.0, 0.1], [10.0, 0.3],
                                       [20.0, 0.1], [20.0, 0.3]],
                    "morawetz_T_list": [10.0, 20.0, 40.0, 80.0],
                    "tail_fraction": 0.5, "boundary_band": 0.05},
    "sweep": {"amplitudes": [0.5, 0.9, 1.0]},
}


class ConfigError(Exception):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def _check_number(errors, section, key, value, lo=None, hi=None, integer=False):
    name = f"{section}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{name}: expected a number, got {value!r}")
        return
    if integer and int(value) != value:
        errors.append(f"{name}: expected an integer, got {value!r}")
        return
    if lo is not None and not value > lo:
        errors.append(f"{name}: must be > {lo}, got {value}")
    if hi is not None and not value < hi:
        errors.append(f"{name}: must be < {hi}, got {value}")


def validate_config(raw: dict) -> dict:
    """Normalize and validate a config dict; raises ConfigError listing every
    violated field and bound."""
    errors: list[str] = []
    cfg = copy.deepcopy(DEFAULT_CONFIG)

    for section in ("params", "grid"):
        if section not in raw:
            errors.append(f"missing required section '{section}'")
    study = raw.get("study", cfg["study"])
    if study not in STUDIES:
        errors.append(f"study: must be one of {STUDIES}, got {study!r}")
    if errors:
        raise ConfigError(errors)

    for section, content in raw.items():
        if section not in cfg:
            errors.append(f"unknown section '{section}'")
            continue
        if isinstance(cfg[section], dict):
            if not isinstance(content, dict):
                errors.append(f"section '{section}' must be an object")
                continue
            for key, value in content.items():
                if key not in cfg[section]:
                    errors.append(f"unknown field '{section}.{key}'")
                else:
                    cfg[section][key] = value
        else:
            cfg[section] = content

    p = cfg["params"]
    _check_number(errors, "params", "N", p["N"], lo=0, integer=True)
    _check_number(errors, "params", "b", p["b"])
    _check_number(errors, "params", "alpha", p["alpha"], lo=0)
    if not errors:
        params = ModelParams(N=int(p["N"]), b=p["b"], alpha=p["alpha"],
                             strict=bool(p["strict_mode"]))
        report = validate_intercritical(params)
        errors.extend(f"params: {c.detail}" for c in report.failures())

    g = cfg["grid"]
    _check_number(errors, "grid", "R_max", g["R_max"], lo=0)
    _check_number(errors, "grid", "M", g["M"], lo=1, integer=True)

    s = cfg["solver"]
    _check_number(errors, "solver", "dt", s["dt"], lo=0)
    _check_number(errors, "solver", "T", s["T"], lo=0)
    _check_number(errors, "solver", "snapshot_every", s["snapshot_every"], lo=0, integer=True)
    _check_number(errors, "solver", "blowup_guard", s["blowup_guard"], lo=0)
    if s["boundary_guard"] is not None:
        _check_number(errors, "solver", "boundary_guard", s["boundary_guard"], lo=0)

    ini = cfg["initial_data"]
    kind = ini.get("type")
    if kind == "scaled_ground_state":
        _check_number(errors, "initial_data", "c", ini.get("c", 0.0))
    elif kind == "gaussian":
        _check_number(errors, "initial_data", "width", ini.get("width", 0.0), lo=0)
        _check_number(errors, "initial_data", "amplitude", ini.get("amplitude", 0.0))
    elif kind == "file":
        path = ini.get("path", "")
        if not Path(path).exists():
            errors.append(f"initial_data.path: file does not exist: {path!r}")
    else:
        errors.append(
            f"initial_data.type: must be scaled_ground_state | gaussian | file, got {kind!r}")

    d = cfg["diagnostics"]
    for R in d["ball_radii"]:
        if not 0 < R <= g["R_max"]:
            errors.append(f"diagnostics.ball_radii: radius {R} outside (0, R_max = {g['R_max']}]")
    for R in d["virial_radii"]:
        if not 0 < R <= g["R_max"] / 2:
            errors.append(
                f"diagnostics.virial_radii: radius {R} outside (0, R_max/2 = {g['R_max'] / 2}]")

    if errors:
        raise ConfigError(errors)
    return cfg


def normalized_json(cfg: dict) -> str:
    """Canonical serialization; identical configs serialize bit-identically."""
    return json.dumps(cfg, indent=2, sort_keys=True)


def load_config(path: str | None) -> dict:
    if path is None:
        return validate_config(copy.deepcopy(DEFAULT_CONFIG))
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON in {path}: {exc}"])
    return validate_config(raw)


# ---------------------------------------------------------------------------
# Run machinery
# ---------------------------------------------------------------------------

@dataclass
class Setup:
    params: ModelParams
    grid: object
    op: object
    basis: object


def build_setup(cfg: dict) -> Setup:
    params = ModelParams(N=int(cfg["params"]["N"]), b=cfg["params"]["b"],
                         alpha=cfg["params"]["alpha"],
                         strict=bool(cfg["params"]["strict_mode"]))
    grid = build_grid(cfg["grid"]["R_max"], int(cfg["grid"]["M"]), params.N)
    op = build_laplacian(grid)
    basis = eigendecompose(op)
    return Setup(params=params, grid=grid, op=op, basis=basis)


def ground_state_for(cfg: dict, setup: Setup, out: Path):
    """Load the run directory's ground state if present, else solve and persist."""
    base = out / "groundstate"
    if base.with_suffix(".field").exists() and base.with_suffix(".json").exists():
        gs, thr = fieldio.read_ground_state(base)
        same_grid = gs.grid.M == setup.grid.M and gs.grid.R_max == setup.grid.R_max
        same_params = (gs.params.N == setup.params.N
                       and float(gs.params.b) == float(setup.params.b)
                       and float(gs.params.alpha) == float(setup.params.alpha))
        if same_grid and same_params:
            return gs, thr
    gc = cfg["ground_state"]
    controls = GroundStateControls(
        max_iter=int(gc["max_iter"]), tol=gc["tol"], residual_tol=gc["residual_tol"],
        damping=gc["damping"], shift=gc["shift"], seed_width=gc["seed_width"])
    gs = solve_ground_state(setup.params, setup.grid, setup.basis, setup.op, controls)
    thr = threshold_quantities(gs)
    fieldio.write_ground_state(base, gs, thr)
    return gs, thr


def initial_field(cfg: dict, setup: Setup, gs) -> np.ndarray:
    ini = cfg["initial_data"]
    if ini["type"] == "scaled_ground_state":
        return ini["c"] * gs.q.astype(np.complex128)
    if ini["type"] == "gaussian":
        return gaussian_seed(setup.grid, ini["width"], ini["amplitude"]).astype(np.complex128)
    u, fgrid, _, _ = fieldio.read_field(ini["path"])
    if fgrid.M != setup.grid.M or fgrid.R_max != setup.grid.R_max:
        raise ConfigError([f"initial_data.path: field grid (M={fgrid.M}, "
                           f"R_max={fgrid.R_max}) does not match the run grid"])
    return u


def run_evolution(cfg: dict, setup: Setup, u0: np.ndarray, gs,
                  T: float | None = None) -> propagator.Trajectory:
    s, d = cfg["solver"], cfg["diagnostics"]
    virial_R = d["virial_radii"][0] if d["virial_radii"] else None
    vw = diagnostics.build_virial_weight(virial_R, setup.grid) if virial_R else None
    guard = s["blowup_guard"] * gs.grad_l2 if gs is not None else \
        s["blowup_guard"] * max(l2_norm(setup.op.apply(u0), setup.grid), 1e-30)
    return propagator.evolve(
        u0, setup.params, setup.grid, setup.basis, setup.op,
        T=T if T is not None else s["T"], dt=s["dt"],
        snapshot_every=int(s["snapshot_every"]),
        ball_radii=list(d["ball_radii"]), virial_weight=vw,
        blowup_guard=guard, boundary_guard=s["boundary_guard"],
        boundary_band=d["boundary_band"], nonlinearity=bool(s["nonlinearity"]))


def write_trajectory_csv(path: Path, traj: propagator.Trajectory, ball_radii):
    lines = [",".join(diagnostics.csv_header(list(ball_radii)))]
    lines.extend(diagnostics.format_csv_row(rec) for rec in traj.records)
    path.write_text("\n".join(lines) + "\n")


def trajectory_summary(cfg: dict, traj: propagator.Trajectory, setup: Setup,
                       gs, thr) -> dict:
    d = cfg["diagnostics"]
    rec0 = traj.records[0]
    drift_mass = max(abs(r.mass - rec0.mass) / rec0.mass for r in traj.records)
    drift_energy = (max(abs(r.energy - rec0.energy) for r in traj.records)
                    / max(abs(rec0.energy), 1e-300))
    below = diagnostics.check_below_threshold(
        traj.fields[0], setup.grid, setup.op, thr, setup.params) if traj.fields else None

    verdicts = []
    times = np.asarray(traj.times)
    for R, eps in d["criterion_grid"]:
        if float(R) not in traj.records[0].ball_masses:
            continue
        v = diagnostics.scattering_indicator(
            times, traj.ball_series(R), R, eps, d["tail_fraction"])
        verdicts.append({"R": v.R, "epsilon": v.epsilon, "met": v.met,
                         "infimum": v.infimum, "t_at_infimum": v.t_at_infimum})

    back = None
    if traj.fields and len(traj.fields) >= 7 and traj.status == "completed":
        k = np.linspace(len(traj.times) // 2, len(traj.times) - 1, 6).astype(int)
        bp = propagator.back_propagated_profile(
            [traj.fields[i] for i in k], [traj.times[i] for i in k],
            setup.basis, setup.op)
        back = {"times": list(bp.times), "increments": list(bp.increments),
                "monotone_decreasing": bp.monotone_decreasing}

    return {
        "status": traj.status,
        "guard_message": traj.guard_message,
        "final_time": traj.times[-1],
        "mass_drift": drift_mass,
        "energy_drift": drift_energy,
        "max_grad_product": max(r.grad_product for r in traj.records),
        "gradient_threshold": thr.gradient if thr else None,
        "below_threshold_at_t0": None if below is None else {
            "mass_energy": below.below_mass_energy,
            "gradient": below.below_gradient},
        "max_boundary_fraction": max(r.boundary_fraction for r in traj.records),
        "scattering_verdicts": verdicts,
        "back_propagation": back,
    }


# ---------------------------------------------------------------------------
# Studies
# ---------------------------------------------------------------------------

def study_groundstate(cfg: dict, out: Path, args) -> dict:
    setup = build_setup(cfg)
    gs, thr = ground_state_for(cfg, setup, out)
    print(f"ground state: {gs.iterations} iterations, residual {gs.residual:.3e}, "
          f"|m-1| = {abs(gs.multiplier - 1):.3e}")
    print(f"  M[Q] = {gs.mass:.8g}  E[Q] = {gs.energy:.8g}  ||Lap Q|| = {gs.grad_l2:.8g}")
    print(f"  thresholds: mass-energy {thr.mass_energy:.8g}, gradient {thr.gradient:.8g}")
    return {"residual": gs.residual, "iterations": gs.iterations,
            "multiplier": gs.multiplier, "identity_gap": gs.identity_gap,
            "mass": gs.mass, "energy": gs.energy, "grad_l2": gs.grad_l2,
            "thresholds": {"mass_energy": thr.mass_energy, "gradient": thr.gradient},
            "armed_checks": {"residual_gate": gs.residual <= gs.controls.residual_tol,
                             "identity_gate": gs.identity_gap <= 1e-6}}


def study_evolve(cfg: dict, out: Path, args) -> dict:
    setup = build_setup(cfg)
    gs, thr = ground_state_for(cfg, setup, out)
    u0 = initial_field(cfg, setup, gs)
    traj = run_evolution(cfg, setup, u0, gs)
    write_trajectory_csv(out / "trajectory.csv", traj, cfg["diagnostics"]["ball_radii"])
    fieldio.write_field(out / "final.field", traj.fields[-1] if traj.fields else u0,
                        setup.grid, setup.params, t=traj.times[-1])
    summary = trajectory_summary(cfg, traj, setup, gs, thr)
    summary["armed_checks"] = {"completed_or_guarded": traj.status in
                               ("completed", "blowup_guard", "boundary_guard")}
    print(f"evolve: status {traj.status} at t = {traj.times[-1]:g} "
          f"(mass drift {summary['mass_drift']:.2e})")
    if traj.guard_message:
        print(f"  guard: {traj.guard_message}")
    return summary


def _sweep_row(cfg, setup, gs, thr, c: float) -> dict:
    u0 = c * gs.q.astype(np.complex128)
    try:
        below = diagnostics.check_below_threshold(u0, setup.grid, setup.op, thr,
                                                  setup.params)
        below_dict = {"mass_energy": below.below_mass_energy,
                      "gradient": below.below_gradient}
    except ValueError as exc:        # negative energy at fractional s_c
        below_dict = {"error": str(exc)}
    try:
        traj = run_evolution(cfg, setup, u0, gs)
        summary = trajectory_summary(cfg, traj, setup, gs, thr)
    except Exception as exc:         # row failures are recorded, sweep continues
        return {"c": c, "failed": True, "error": f"{type(exc).__name__}: {exc}",
                "below_threshold_at_t0": below_dict}
    summary["below_threshold_at_t0"] = below_dict
    summary["c"] = c
    summary["failed"] = False
    return summary


def study_sweep(cfg: dict, out: Path, args) -> dict:
    setup = build_setup(cfg)
    gs, thr = ground_state_for(cfg, setup, out)
    rows_dir = out / "rows"
    rows_dir.mkdir(exist_ok=True)

    amplitudes = list(cfg["sweep"]["amplitudes"])
    pending = []
    for c in amplitudes:
        row_path = rows_dir / f"row_c{c:g}.json"
        if args.resume and row_path.exists():
            continue
        pending.append((c, row_path))

    def run_row(item):
        c, row_path = item
        row = _sweep_row(cfg, setup, gs, thr, c)
        row_path.write_text(json.dumps(row, indent=2, sort_keys=True))
        return row

    if pending:
        with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
            list(pool.map(run_row, pending))

    rows = []
    for c in sorted(set(amplitudes)):
        row_path = rows_dir / f"row_c{c:g}.json"
        rows.append(json.loads(row_path.read_text()))

    header = ["c", "below_mass_energy", "below_gradient", "status",
              "tail_infimum_first", "final_time"]
    lines = [",".join(header)]
    for row in rows:
        below = row.get("below_threshold_at_t0", {})
        verd = row.get("scattering_verdicts") or [{}]
        lines.append(",".join([
            f"{row['c']:.17g}",
            str(below.get("mass_energy", "")), str(below.get("gradient", "")),
            row.get("status", "failed" if row.get("failed") else ""),
            f"{verd[0].get('infimum', float('nan')):.17g}",
            f"{row.get('final_time', float('nan')):.17g}"]))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    print(f"sweep: {len(rows)} rows -> {out / 'sweep.csv'}")
    return {"rows": rows,
            "armed_checks": {"all_rows_present": len(rows) == len(set(amplitudes))}}


def study_morawetz(cfg: dict, out: Path, args) -> dict:
    setup = build_setup(cfg)
    gs, thr = ground_state_for(cfg, setup, out)
    u0 = initial_field(cfg, setup, gs)
    below = diagnostics.check_below_threshold(u0, setup.grid, setup.op, thr, setup.params)
    if not (below.below_mass_energy and below.below_gradient):
        raise ConfigError(["morawetz study requires below-threshold initial data "
                           "(both strict inequalities must hold at t = 0)"])
    T_list = [float(T) for T in cfg["diagnostics"]["morawetz_T_list"]]
    traj = run_evolution(cfg, setup, u0, gs, T=max(T_list))
    write_trajectory_csv(out / "trajectory.csv", traj, cfg["diagnostics"]["ball_radii"])
    fit = diagnostics.morawetz_average(np.asarray(traj.times), traj.potentials,
                                       T_list, float(setup.params.b))
    print("T, A(T) pairs:")
    for T, A in zip(fit.T_values, fit.averages):
        print(f"  {T:10g}  {A:.8g}")
    print(f"fitted log-log slope: {fit.slope:+.4f}")
    print(f"predicted decay exponent -min{{2,b}}/(1+min{{2,b}}): {fit.predicted:+.4f}")
    return {"T_values": list(fit.T_values), "averages": list(fit.averages),
            "fitted_slope": fit.slope, "predicted_exponent": fit.predicted,
            "status": traj.status,
            "armed_checks": {"slope_nonpositive": fit.slope <= 0.0}}


# ---------------------------------------------------------------------------
# Config-light subcommands
# ---------------------------------------------------------------------------

def _parse_rational(x) -> Fraction | float:
    if x in ("inf", "Infinity", None):
        return math.inf
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(10 ** 12)


def cmd_check_pairs(args) -> int:
    entries = json.loads(Path(args.pairs).read_text()) if args.pairs else [
        {"q": "inf", "r": 2, "s": 0, "N": 5},
        {"q": 2, "r": 10, "s": 0, "N": 5},
        {"q": 4, "r": "10/3", "s": 0, "N": 5},
        {"q": 8, "r": "10/4", "s": 0, "N": 5},
        {"q": "16/3", "r": "20/7", "s": "1/2", "N": 5},
    ]
    print(f"{'q':>10} {'r':>10} {'s':>8} {'N':>3}  admissible")
    for e in entries:
        pair = AdmissiblePair(_parse_rational(e["q"]), _parse_rational(e["r"]),
                              _parse_rational(e.get("s", 0)))
        ok = is_admissible(pair, int(e["N"]))
        print(f"{str(e['q']):>10} {str(e['r']):>10} {str(e.get('s', 0)):>8} "
              f"{e['N']:>3}  {ok}")
    return EXIT_OK


def cmd_exponents(args) -> int:
    if args.tuples:
        entries = json.loads(Path(args.tuples).read_text())
    else:
        entries = [{"b": 2, "alpha": "7/2", "eta": "1/100",
                    "theta_tilde": "1/100", "region": region}
                   for region in ("ball", "exterior")]
    all_ok = True
    for e in entries:
        params = ModelParams(N=5, b=Fraction(str(e["b"])),
                             alpha=Fraction(str(e["alpha"])))
        rep = verify_exponent_system(params, Fraction(str(e["eta"])),
                                     Fraction(str(e["theta_tilde"])),
                                     e.get("region", "ball"))
        all_ok &= rep.ok
        print(f"b={e['b']} alpha={e['alpha']} eta={e['eta']} "
              f"theta_tilde={e['theta_tilde']} region={e.get('region', 'ball')}: "
              f"{'all identities hold' if rep.ok else 'FAILED'}")
        if not rep.ok or args.verbose:
            print("  " + str(rep).replace("\n", "\n  "))
    return EXIT_OK if all_ok else EXIT_VALIDATION


def cmd_report(args) -> int:
    out = Path(args.out)
    manifest_path = out / "manifest.json"
    if not out.is_dir() or not manifest_path.exists():
        print(f"no completed run at {out} (manifest missing)", file=sys.stderr)
        return EXIT_IO
    manifest = json.loads(manifest_path.read_text())
    summary = manifest.get("summary", {})
    print(f"run: study={manifest['config']['study']} version={manifest['code_version']}")
    print(f"started {manifest['started']}  finished {manifest['finished']}")
    print(f"outputs ({len(manifest['outputs'])}):")
    for name, digest in sorted(manifest["outputs"].items()):
        print(f"  {name}  sha256:{digest[:16]}...")
    if summary.get("status"):
        print(f"status: {summary['status']}")
        if summary.get("guard_message"):
            print(f"  guard finding: {summary['guard_message']}")
    if "mass_drift" in summary:
        print(f"mass drift: {summary['mass_drift']:.3e}   "
              f"energy drift: {summary['energy_drift']:.3e}")
    if summary.get("fitted_slope") is not None:
        print(f"morawetz: fitted slope {summary['fitted_slope']:+.4f}, "
              f"predicted {summary['predicted_exponent']:+.4f}")
    checks = summary.get("armed_checks", {})
    for name, ok in sorted(checks.items()):
        print(f"check {name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if all(checks.values()) else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def run_study(study: str, cfg: dict, out: Path, args) -> dict:
    runner = {"groundstate": study_groundstate, "evolve": study_evolve,
              "sweep": study_sweep, "morawetz": study_morawetz}[study]
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    summary = runner(cfg, out, args)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))

    outputs = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            outputs[str(path.relative_to(out))] = _sha256(path)
    manifest = {
        "config": cfg, "code_version": __version__,
        "started": started, "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "outputs": outputs, "summary": summary,
    }
    # written last: presence signals completion
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ibnls",
        description="Inhomogeneous biharmonic NLS: radial simulator and diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", default=None, help="JSON config (defaults: canonical)")
        sp.add_argument("--out", default=f"runs/{name}", help="output directory")
        sp.add_argument("--resume", action="store_true",
                        help="skip completed sweep rows")
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweep rows")
        sp.add_argument("--strict", action="store_true",
                        help="force strict-mode parameter validation (N >= 5)")
        return sp

    for name, help_text in (
            ("groundstate", "solve and persist the ground state"),
            ("evolve", "run one evolution with diagnostics"),
            ("sweep", "dichotomy sweep over initial amplitudes"),
            ("morawetz", "time-averaged potential decay study")):
        add_run_command(name, help_text)

    sp = sub.add_parser("check-pairs", help="classify admissible pairs exactly")
    sp.add_argument("--pairs", default=None, help="JSON list of {q, r, s, N}")

    sp = sub.add_parser("exponents", help="verify 5D exponent systems exactly")
    sp.add_argument("--tuples", default=None,
                    help="JSON list of {b, alpha, eta, theta_tilde, region}")
    sp.add_argument("--verbose", action="store_true")

    sp = sub.add_parser("report", help="summarize a completed run directory")
    sp.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    if args.command == "check-pairs":
        return cmd_check_pairs(args)
    if args.command == "exponents":
        return cmd_exponents(args)
    if args.command == "report":
        return cmd_report(args)

    try:
        cfg = load_config(args.config)
        if args.strict:
            cfg["params"]["strict_mode"] = True
        cfg["study"] = args.command
    except ConfigError as exc:
        print("config validation failed:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        run_study(args.command, cfg, out, args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"validation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except PetviashviliError as exc:
        print(f"ground-state solver failed: {exc} "
              f"(multiplier history tail: {exc.multipliers[-5:]})", file=sys.stderr)
        return EXIT_INTERNAL
    except (ArithmeticError, AssertionError) as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"IO failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
