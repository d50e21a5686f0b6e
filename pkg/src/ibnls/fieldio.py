"""Binary container for radial fields plus JSON sidecars for ground states.

Layout of a ``.field`` file (all little-endian):

    offset  size  content
    0       8     magic b"RADFLD1\\0"
    8       4     uint32  N        (dimension)
    12      8     uint64  M        (cell count)
    20      8     float64 R_max
    28      8     float64 b
    36      8     float64 alpha
    44      8     float64 t        (snapshot time)
    52      1     uint8   itemsize (8 = complex64, 16 = complex128)
    53      M*itemsize   payload, complex little-endian, node order

Ground states persist as profile.field + profile.json with the solver
controls, residual, and threshold products.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .grid import RadialGrid, build_grid
from .groundstate import (GroundState, GroundStateControls, ThresholdQuantities)
from .params import ModelParams

MAGIC = b"RADFLD1\x00"
_HEADER = struct.Struct("<IQddddB")


def write_field(path, u: np.ndarray, grid: RadialGrid, params: ModelParams,
                t: float = 0.0, dtype=np.complex128) -> None:
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.complex64), np.dtype(np.complex128)):
        raise ValueError(f"payload must be complex64 or complex128, got {dtype}")
    payload = np.asarray(u, dtype=dtype)
    if payload.shape != (grid.M,):
        raise ValueError(f"field shape {payload.shape} does not match grid M = {grid.M}")
    header = _HEADER.pack(grid.N, grid.M, grid.R_max, float(params.b),
                          float(params.alpha), float(t), dtype.itemsize)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(payload.astype(payload.dtype.newbyteorder("<")).tobytes())


def read_field(path) -> tuple[np.ndarray, RadialGrid, ModelParams, float]:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a radial field container (bad magic {magic!r})")
        N, M, R_max, b, alpha, t, itemsize = _HEADER.unpack(fh.read(_HEADER.size))
        dtype = np.dtype(np.complex64 if itemsize == 8 else np.complex128)
        raw = fh.read(M * itemsize)
    if len(raw) != M * itemsize:
        raise ValueError(f"{path}: truncated payload ({len(raw)} of {M * itemsize} bytes)")
    u = np.frombuffer(raw, dtype=dtype.newbyteorder("<")).astype(np.complex128)
    grid = build_grid(R_max, M, N)
    return u, grid, ModelParams(N=N, b=b, alpha=alpha), t


def write_ground_state(base_path, gs: GroundState,
                       thresholds: ThresholdQuantities) -> tuple[Path, Path]:
    base = Path(base_path)
    field_path = base.with_suffix(".field")
    json_path = base.with_suffix(".json")
    write_field(field_path, gs.q.astype(np.complex128), gs.grid, gs.params, t=0.0)
    sidecar = {
        "params": {"N": gs.params.N, "b": float(gs.params.b),
                   "alpha": float(gs.params.alpha), "s_c": gs.params.s_c},
        "controls": {
            "max_iter": gs.controls.max_iter, "tol": gs.controls.tol,
            "residual_tol": gs.controls.residual_tol,
            "damping": gs.controls.damping, "shift": gs.controls.shift,
            "seed_width": gs.controls.seed_width,
        },
        "residual": gs.residual,
        "iterations": gs.iterations,
        "multiplier": gs.multiplier,
        "quantities": {
            "mass": gs.mass, "energy": gs.energy, "l2": gs.l2,
            "grad_l2": gs.grad_l2, "potential": gs.potential,
        },
        "thresholds": {
            "mass_energy": thresholds.mass_energy,
            "gradient": thresholds.gradient,
            "provenance": thresholds.provenance,
        },
    }
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return field_path, json_path


def read_ground_state(base_path) -> tuple[GroundState, ThresholdQuantities]:
    base = Path(base_path)
    u, grid, params, _ = read_field(base.with_suffix(".field"))
    meta = json.loads(base.with_suffix(".json").read_text())
    controls = GroundStateControls(**meta["controls"])
    q = meta["quantities"]
    gs = GroundState(
        q=np.real(u), params=params, grid=grid,
        mass=q["mass"], energy=q["energy"], l2=q["l2"],
        grad_l2=q["grad_l2"], potential=q["potential"],
        residual=meta["residual"], multiplier=meta["multiplier"],
        iterations=meta["iterations"], controls=controls)
    thr = ThresholdQuantities(
        mass_energy=meta["thresholds"]["mass_energy"],
        gradient=meta["thresholds"]["gradient"],
        provenance=meta["thresholds"]["provenance"])
    return gs, thr
