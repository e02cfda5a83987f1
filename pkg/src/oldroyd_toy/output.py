"""CSV reports, binary checkpoints, grayscale images and run manifests."""

from __future__ import annotations

import csv
import json
import os
import struct
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord
from .models import State
from .spectral import Grid, SpectralField, make_grid, to_physical

CHECKPOINT_MAGIC = b"OBTOY1"
_HEADER = struct.Struct("<6siiqddd")

RUN_COLUMNS = list(DiagnosticsRecord.CORE)
EXTENDED_COLUMNS = list(DiagnosticsRecord.EXTENDED)
SWEEP_COLUMNS = [
    "a",
    "linf_diff",
    "linf_diff_u1",
    "linf_diff_u2",
    "linf_diff_t1",
    "linf_diff_t2",
    "ratio_to_prev",
]
RATE_COLUMNS = ["a", "gap", "fitted_slope"]


class CorruptCheckpointError(ValueError):
    """Checkpoint file is truncated, has the wrong magic, or inconsistent sizes."""


def fmt(value) -> str:
    """Shortest round-trip text for a number; empty for ``None``."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _atomic_write(path: Path, write) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".part")
    write(tmp)
    os.replace(tmp, path)
    return path


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])

    return _atomic_write(path, write)


def write_records_csv(records: Sequence[DiagnosticsRecord], path: str | Path) -> Path:
    extended = any(r.besov_u is not None for r in records)
    header = RUN_COLUMNS + (EXTENDED_COLUMNS if extended else [])
    return _write_rows(
        Path(path), header, ([getattr(r, c) for c in header] for r in records)
    )


def write_sweep_csv(result, path: str | Path) -> Path:
    rows = []
    for a, per, ratio in zip(result.a_values, result.per_field, result.ratios):
        rows.append([a, per.max(), *per, ratio])
    return _write_rows(Path(path), SWEEP_COLUMNS, rows)


def write_rate_csv(
    pairs: Sequence[tuple[float, float]], slope: float | None, path: str | Path
) -> Path:
    rows = [[a, g, None] for a, g in pairs] + [[None, None, slope]]
    return _write_rows(Path(path), RATE_COLUMNS, rows)


def write_table_csv(
    header: Sequence[str], rows: Iterable[Sequence], path: str | Path
) -> Path:
    return _write_rows(Path(path), header, rows)


def read_csv(path: str | Path) -> list[dict[str, float | None]]:
    with open(path, newline="") as fh:
        return [
            {k: (float(v) if v != "" else None) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


# -- checkpoints -----------------------------------------------------------------


@dataclass
class Checkpoint:
    state: State
    step: int = 0
    a: float = 0.0
    dt: float = 0.0


def write_checkpoint(
    state: State, path: str | Path, step: int = 0, a: float = 0.0, dt: float = 0.0
) -> Path:
    """Write ``state`` as header plus four little-endian complex128 planes ``(u1, u2, t1, t2)``."""
    g = state.grid
    header = _HEADER.pack(CHECKPOINT_MAGIC, g.nx, g.ny, step, state.t, a, dt)
    planes = state.stacked().astype("<c16", copy=False)

    def write(tmp):
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(planes).tobytes())

    return _atomic_write(Path(path), write)


def load_checkpoint(path: str | Path) -> Checkpoint:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CorruptCheckpointError(
            f"{path}: file too short for header ({len(data)} bytes)"
        )
    magic, nx, ny, step, t, a, dt = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise CorruptCheckpointError(f"{path}: bad magic {magic!r}")
    try:
        grid = make_grid(nx, ny)
    except ValueError as exc:
        raise CorruptCheckpointError(f"{path}: invalid grid in header: {exc}") from exc
    expected = _HEADER.size + 4 * nx * ny * 16
    if len(data) != expected:
        raise CorruptCheckpointError(
            f"{path}: expected {expected} bytes, found {len(data)}"
        )
    planes = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(4, nx, ny)
    return Checkpoint(State.from_arrays(grid, planes.astype(complex), t), step, a, dt)


def read_checkpoint(path: str | Path) -> State:
    return load_checkpoint(path).state


# -- images ----------------------------------------------------------------------


def write_field_image(
    f: SpectralField | np.ndarray, path: str | Path, grid: Grid | None = None
) -> Path:
    """Binary PGM (P5), ``nx`` wide and ``ny`` tall, rows from ``y = 0``, min-max scaled."""
    samples = (
        to_physical(f) if isinstance(f, SpectralField) else np.asarray(f, dtype=float)
    )
    lo, hi = float(samples.min()), float(samples.max())
    if hi > lo:
        pixels = np.rint((samples - lo) / (hi - lo) * 255.0)
    else:
        pixels = np.full(samples.shape, 128.0)
    rows = pixels.T.astype(np.uint8)
    nx, ny = samples.shape
    header = f"P5\n# min={lo!r} max={hi!r}\n{nx} {ny}\n255\n".encode("ascii")

    def write(tmp):
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(rows.tobytes())

    return _atomic_write(Path(path), write)


def read_pgm(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read a P5 image written by :func:`write_field_image` as ``(pixels[y, x], meta)``."""
    data = Path(path).read_bytes()
    lines = data.split(b"\n", 4)
    if lines[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    meta = dict(kv.split("=") for kv in lines[1].decode()[1:].split())
    width, height = map(int, lines[2].split())
    pixels = np.frombuffer(lines[4], dtype=np.uint8).reshape(height, width)
    return pixels, {k: float(v) for k, v in meta.items()}


# -- manifest --------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config: str
    version: str
    wall_seconds: float = 0.0
    outputs: list[str] = field(default_factory=list)
    status: str = "ok"
    summary: dict = field(default_factory=dict)

    def write(self, path: str | Path) -> Path:
        text = json.dumps(asdict(self), indent=2, sort_keys=True)
        return _atomic_write(Path(path), lambda tmp: Path(tmp).write_text(text + "\n"))
