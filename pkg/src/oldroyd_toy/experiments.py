"""Scripted studies: damping sweeps, temporal convergence, vortex snapshots, decay traces."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .models import State, vorticity
from .spectral import SpectralField, l2_norm, to_physical
from .steppers import BlowUpError, SolverConfig, initial_state, run

log = logging.getLogger(__name__)

FIELD_NAMES = ("u1", "u2", "t1", "t2")
DEFAULT_A_VALUES = tuple(1.0 / 2**k for k in range(6))


def field_differences(s: State, ref: State, norm: str = "linf") -> np.ndarray:
    """Per-component distance ``(u1, u2, t1, t2)`` between two states."""
    out = []
    for f, g in zip(s.fields(), ref.fields()):
        d = f - g
        out.append(
            float(np.abs(to_physical(d)).max()) if norm == "linf" else l2_norm(d)
        )
    return np.array(out)


@dataclass
class SweepSpec:
    """A family of runs differing only in damping, compared against an undamped reference.

    Attributes:
        base: Configuration shared by all comparison runs.
        a_values: Damping values, strictly decreasing and non-negative.
        dt_ref: Time step of the ``a = 0`` reference run.
        compare_time: Time at which runs are compared (overrides ``base.t_end``).
        norm: ``"linf"`` (physical sup norm) or ``"l2"``.
    """

    base: SolverConfig
    a_values: Sequence[float] = DEFAULT_A_VALUES
    dt_ref: float = 1e-6
    compare_time: float = 1.0
    norm: str = "linf"

    def __post_init__(self):
        self.a_values = tuple(float(a) for a in self.a_values)
        if not self.a_values:
            raise ValueError("a_values must not be empty")
        if any(a < 0 for a in self.a_values):
            raise ValueError("a_values must be non-negative")
        if any(b >= a for a, b in zip(self.a_values, self.a_values[1:])):
            raise ValueError("a_values must be strictly decreasing")
        if not 0 < self.dt_ref <= self.base.dt:
            raise ValueError(
                f"dt_ref={self.dt_ref} must be positive and not exceed dt={self.base.dt}"
            )
        if not self.compare_time > 0:
            raise ValueError("compare_time must be positive")
        if self.norm not in ("linf", "l2"):
            raise ValueError(f"unknown comparison norm {self.norm!r}")

    def run_config(self, a: float) -> SolverConfig:
        return self.base.with_(a=a, t_end=self.compare_time, record_every=1)

    def reference_config(self) -> SolverConfig:
        return self.base.with_(
            a=0.0, dt=self.dt_ref, t_end=self.compare_time, record_every=1
        )


@dataclass
class SweepResult:
    a_values: list[float]
    per_field: np.ndarray
    complete: bool = True
    error: str | None = None

    @property
    def diffs(self) -> np.ndarray:
        return self.per_field.max(axis=1) if len(self.per_field) else np.zeros(0)

    @property
    def ratios(self) -> list[float | None]:
        d = self.diffs
        return [None] + [
            float(d[i - 1] / d[i]) if d[i] > 0 else None for i in range(1, len(d))
        ]

    @property
    def slope(self) -> float | None:
        pairs = [(a, g) for a, g in zip(self.a_values, self.diffs) if a > 0 and g > 0]
        return diag.rate_fit(pairs) if len(pairs) >= 3 else None


def _final_state(cfg: SolverConfig) -> State:
    return run(cfg, records=False).state


def damping_sweep(
    spec: SweepSpec, reference: State | None = None, workers: int = 1
) -> SweepResult:
    """Distance at ``compare_time`` between each damped run and the undamped reference.

    A precomputed reference final state may be supplied. Runs are independent;
    with ``workers > 1`` they execute in separate processes and are merged in
    the order of ``a_values``.
    """
    if reference is None:
        log.info("reference run: dt=%g", spec.dt_ref)
        reference = _final_state(spec.reference_config())
    cfgs = [spec.run_config(a) for a in spec.a_values]
    rows: list[np.ndarray] = []
    done: list[float] = []
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                states = list(pool.map(_final_state, cfgs))
        else:
            states = (_final_state(c) for c in cfgs)
        for a, s in zip(spec.a_values, states):
            rows.append(field_differences(s, reference, spec.norm))
            done.append(a)
            log.info("a=%g diff=%.6g", a, rows[-1].max())
    except BlowUpError as exc:
        return SweepResult(
            done, np.array(rows).reshape(-1, 4), complete=False, error=str(exc)
        )
    return SweepResult(done, np.array(rows).reshape(-1, 4))


@dataclass
class ConvergenceResult:
    """Errors on a time-step ladder.

    ``errors`` are measured against the finest rung; ``increments`` are the
    distances between consecutive rungs, whose log-log slope against ``dt``
    estimates the order without bias from the finite reference.
    """

    dts: list[float]
    errors: list[float]
    increments: list[float]

    @property
    def order(self) -> float:
        pairs = list(zip(self.dts[:-1], self.increments))
        if len(pairs) < 2:
            raise ValueError("need at least two increments to fit an order")
        x = np.log([p[0] for p in pairs])
        y = np.log([p[1] for p in pairs])
        return float(np.polyfit(x, y, 1)[0])


def temporal_convergence(
    cfg: SolverConfig, ladder: Sequence[float]
) -> ConvergenceResult:
    ladder = [float(d) for d in ladder]
    if len(ladder) < 3:
        raise ValueError("ladder needs at least three rungs")
    if any(b >= a for a, b in itertools.pairwise(ladder)):
        raise ValueError("invalid ladder: time steps must be strictly decreasing")
    states = [_final_state(cfg.with_(dt=d)) for d in ladder]
    errors = [float(field_differences(s, states[-1]).max()) for s in states[:-1]]
    increments = [
        float(field_differences(s, t).max()) for s, t in itertools.pairwise(states)
    ]
    return ConvergenceResult(ladder, errors, increments)


@dataclass
class Snapshot:
    t: float
    omega: SpectralField
    files: list[Path] = field(default_factory=list)


def vortex_dynamics(
    cfg: SolverConfig,
    times: Sequence[float],
    out_dir: str | Path | None = None,
    initial: State | None = None,
) -> list[Snapshot]:
    """Vorticity snapshots at the requested times (``0`` allowed), optionally written to disk."""
    from .output import write_field_image

    times = sorted(float(t) for t in times)
    if any(t < 0 for t in times):
        raise ValueError("snapshot times must be non-negative")
    state = initial if initial is not None else initial_state(cfg)
    snaps = []
    for t in times:
        span = t - state.t
        if span > 1e-12:
            state = run(
                cfg.with_(t_end=span, dt=min(cfg.dt, span)),
                initial=state,
                records=False,
            ).state
        snap = Snapshot(t, vorticity(state.u))
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            stem = f"omega_{cfg.model.value}_a{cfg.a:g}_t{t:g}"
            img = write_field_image(snap.omega, out / f"{stem}.pgm")
            raw = out / f"{stem}.npy"
            np.save(raw, to_physical(snap.omega))
            snap.files = [img, raw]
        snaps.append(snap)
    return snaps


def enstrophy(omega: SpectralField) -> float:
    """``||omega||_{L^2}^2``."""
    return l2_norm(omega) ** 2


def decay_trace(
    cfg: SolverConfig, initial: State | None = None
) -> list[diag.DiagnosticsRecord]:
    """Time series of energies and Besov norms, sampled every ``record_every`` steps."""
    return run(cfg, initial=initial, extended=True).records


def is_nonincreasing(values: Sequence[float], rtol: float = 1e-13) -> bool:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return True
    scale = max(float(np.abs(v).max()), math.ulp(1.0))
    return bool(np.all(np.diff(v) <= rtol * scale))
