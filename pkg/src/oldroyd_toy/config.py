"""TOML-style configuration: flat top-level solver keys plus optional sections.

Example::

    model = "nonlinear"
    nx = 128
    ny = 128
    dt = 1e-4
    t_end = 1.0
    ic = "trig"
    m = 3.8

    [sweep]
    a_values = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]
    dt_ref = 1e-6
    compare_time = 1.0
"""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field

import tomli
import tomli_w

from .experiments import SweepSpec
from .steppers import SolverConfig

SOLVER_KEYS = {
    "model": str,
    "nx": int,
    "ny": int,
    "dt": float,
    "t_end": float,
    "a": float,
    "ic": str,
    "m": float,
    "tau_offset": bool,
    "dealias": str,
    "record_every": int,
    "trunc_n": int,
    "q_form": str,
}
TOP_KEYS = {**SOLVER_KEYS, "out_dir": str}
SECTIONS = {
    "sweep": {"a_values": list, "dt_ref": float, "compare_time": float, "norm": str},
    "convergence": {"dt_ladder": list},
    "heat_gap": {"a_values": list, "mode": str, "quadrature_n": int},
    "vortices": {"times": list},
}
SECTION_ALIASES = {"heat-gap": "heat_gap"}


class ConfigError(ValueError):
    """Parse or validation failure, carrying the offending line or key."""

    def __init__(self, message: str, key: str | None = None, lineno: int | None = None):
        self.key = key
        self.lineno = lineno
        super().__init__(message)


@dataclass
class HeatGapSpec:
    a_values: list[float] = field(
        default_factory=lambda: [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
    )
    mode: str = "torus"
    quadrature_n: int = 64

    def __post_init__(self):
        if self.mode not in ("torus", "continuum"):
            raise ValueError(f"mode must be 'torus' or 'continuum', got {self.mode!r}")
        if not self.a_values or any(not 0 < a <= 1 for a in self.a_values):
            raise ValueError("a_values must be non-empty and lie in (0, 1]")
        if self.quadrature_n < 2:
            raise ValueError("quadrature_n must be at least 2")


@dataclass
class ExperimentConfig:
    """Everything one config file can describe."""

    solver: SolverConfig
    sweep: SweepSpec | None = None
    dt_ladder: list[float] | None = None
    heat_gap: HeatGapSpec | None = None
    vortex_times: list[float] | None = None
    out_dir: str | None = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.solver.as_dict().items() if v is not None}
        if self.out_dir is not None:
            d["out_dir"] = self.out_dir
        if self.sweep is not None:
            d["sweep"] = {
                "a_values": list(self.sweep.a_values),
                "dt_ref": self.sweep.dt_ref,
                "compare_time": self.sweep.compare_time,
                "norm": self.sweep.norm,
            }
        if self.dt_ladder is not None:
            d["convergence"] = {"dt_ladder": list(self.dt_ladder)}
        if self.heat_gap is not None:
            d["heat_gap"] = {
                "a_values": list(self.heat_gap.a_values),
                "mode": self.heat_gap.mode,
                "quadrature_n": self.heat_gap.quadrature_n,
            }
        if self.vortex_times is not None:
            d["vortices"] = {"times": list(self.vortex_times)}
        return d

    def to_text(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:12]


def _line_of(text: str, key: str, section: str | None) -> int | None:
    """1-based line of ``key`` inside ``section``; a key of ``[name`` finds a section header."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if key.startswith("[") and s.startswith(key):
            return i
        if s.startswith("["):
            current = s.strip("[] ")
        elif current == section and re.match(rf"{re.escape(key)}\s*=", s):
            return i
    return None


def _coerce(value, kind, key: str, text: str, section: str | None):
    def fail(msg):
        raise ConfigError(f"{key}: {msg}", key=key, lineno=_line_of(text, key, section))

    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail(f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            fail(f"expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            fail(f"expected true or false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            fail(f"expected a string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
        ):
            fail(f"expected a list of numbers, got {value!r}")
        return [float(v) for v in value]
    raise AssertionError(kind)


def _validated(build, text: str, section: str | None, known):
    try:
        return build()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        m = re.match(r"[a-z_0-9]+", msg)
        key = m.group(0) if m and m.group(0) in known else None
        raise ConfigError(
            f"invalid value for '{key}': {msg}" if key else msg,
            key=key,
            lineno=_line_of(text, key, section) if key else None,
        ) from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; unknown keys are rejected."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(
            f"parse error: {exc}", lineno=getattr(exc, "lineno", None)
        ) from exc

    top: dict = {}
    sections: dict[str, dict] = {}
    headers: dict[str, str] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            written, key = key, SECTION_ALIASES.get(key, key)
            if key in sections:
                raise ConfigError(
                    f"section [{written}] given twice",
                    key=key,
                    lineno=_line_of(text, f"[{written}]", None),
                )
            if key not in SECTIONS:
                raise ConfigError(
                    f"unknown section [{written}]",
                    key=written,
                    lineno=_line_of(text, f"[{written}]", None),
                )
            known = SECTIONS[key]
            sec = {}
            for k, v in value.items():
                if k not in known:
                    raise ConfigError(
                        f"unknown key '{k}' in [{written}]",
                        key=k,
                        lineno=_line_of(text, k, written),
                    )
                sec[k] = _coerce(v, known[k], k, text, written)
            sections[key] = sec
            headers[key] = written
        elif key in TOP_KEYS:
            top[key] = _coerce(value, TOP_KEYS[key], key, text, None)
        else:
            raise ConfigError(
                f"unknown key '{key}'", key=key, lineno=_line_of(text, key, None)
            )

    out_dir = top.pop("out_dir", None)
    solver = _validated(lambda: SolverConfig(**top), text, None, SOLVER_KEYS)
    cfg = ExperimentConfig(solver, out_dir=out_dir)
    if "sweep" in sections:
        sec = dict(sections["sweep"])
        if "a_values" not in sec:
            sec["a_values"] = [1.0 / 2**k for k in range(6)]
        cfg.sweep = _validated(
            lambda: SweepSpec(solver, **sec), text, "sweep", SECTIONS["sweep"]
        )
    if "convergence" in sections:
        ladder = sections["convergence"].get("dt_ladder")
        if (
            ladder is None
            or len(ladder) < 3
            or any(b >= a for a, b in itertools.pairwise(ladder))
        ):
            raise ConfigError(
                "dt_ladder: need at least three strictly decreasing time steps",
                key="dt_ladder",
                lineno=_line_of(text, "dt_ladder", "convergence"),
            )
        cfg.dt_ladder = ladder
    if "heat_gap" in sections:
        cfg.heat_gap = _validated(
            lambda: HeatGapSpec(**sections["heat_gap"]),
            text,
            headers["heat_gap"],
            SECTIONS["heat_gap"],
        )
    if "vortices" in sections:
        cfg.vortex_times = sections["vortices"].get("times", [])
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
