"""Right-hand sides of the linear and nonlinear toy models, and initial data.

The stress is the trace-free symmetric tensor ``[[t1, t2], [t2, -t1]]``, so
only the pair ``(t1, t2) = (tau11, tau12)`` is stored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    dealias_mask,
    derivative,
    leray_project,
    to_physical,
    to_spectral,
    truncate,
)


class ModelKind(str, enum.Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class VelocityField:
    u1: SpectralField
    u2: SpectralField

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    def components(self) -> tuple[SpectralField, SpectralField]:
        return (self.u1, self.u2)


@dataclass(frozen=True)
class StressField:
    t1: SpectralField
    t2: SpectralField

    @property
    def grid(self) -> Grid:
        return self.t1.grid

    def components(self) -> tuple[SpectralField, SpectralField]:
        return (self.t1, self.t2)


@dataclass(frozen=True)
class State:
    u: VelocityField
    tau: StressField
    t: float = 0.0

    def __post_init__(self):
        grids = {f.grid for f in self.fields()}
        if len(grids) != 1:
            raise ValueError("all state fields must share one grid")
        if not self.t >= 0.0:
            raise ValueError(f"time must be non-negative, got {self.t}")

    @property
    def grid(self) -> Grid:
        return self.u.u1.grid

    def fields(self) -> tuple[SpectralField, ...]:
        return (self.u.u1, self.u.u2, self.tau.t1, self.tau.t2)

    @classmethod
    def zeros(cls, grid: Grid) -> State:
        z = SpectralField.zeros(grid)
        return cls(VelocityField(z, z), StressField(z, z), 0.0)

    @classmethod
    def from_arrays(cls, grid: Grid, coeffs: np.ndarray, t: float = 0.0) -> State:
        """Build from stacked coefficients ``(u1, u2, t1, t2)`` of shape ``(4, nx, ny)``."""
        f = [SpectralField(grid, np.array(c, dtype=complex)) for c in coeffs]
        return cls(VelocityField(f[0], f[1]), StressField(f[2], f[3]), t)

    def stacked(self) -> np.ndarray:
        return np.stack([f.coeffs for f in self.fields()])


def vorticity(u: VelocityField) -> SpectralField:
    """Scalar curl ``d1 u2 - d2 u1``."""
    return derivative(u.u2, 1) - derivative(u.u1, 2)


def biot_savart(omega: SpectralField) -> VelocityField:
    """Divergence-free velocity whose vorticity is ``omega`` minus its mean.

    Per mode ``u = (i k2, -i k1) omega / |k|^2``; modes where the derivative
    wavenumber vanishes (``k = 0`` and the Nyquist corners) are dropped.
    """
    g = omega.grid
    k1, k2 = g.k1_eff, g.k2_eff
    ksq = k1**2 + k2**2
    zero = ksq == 0
    inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, ksq))
    u1 = 1j * k2 * inv * omega.coeffs
    u2 = -1j * k1 * inv * omega.coeffs
    return VelocityField(SpectralField(g, u1), SpectralField(g, u2))


def _dealias(f: SpectralField, rule: str, n: int | None) -> SpectralField:
    mask = dealias_mask(f.grid, rule, n)
    return SpectralField(f.grid, np.where(mask, f.coeffs, 0.0))


def q_term(
    omega: SpectralField,
    tau: StressField,
    dealias: str = "pin",
    trunc_n: int | None = None,
    form: str = "printed",
) -> StressField:
    """Frame-rotation coupling ``omega * (-2 t2, t1 - t2)``, evaluated pointwise.

    ``form="derived"`` switches to ``omega * (t2, -t1)``, the vector obtained by
    expanding ``tau Omega - Omega tau`` directly for a trace-free stress.
    """
    w = to_physical(omega)
    t1 = to_physical(tau.t1)
    t2 = to_physical(tau.t2)
    if form == "printed":
        q1, q2 = -2.0 * w * t2, w * (t1 - t2)
    elif form == "derived":
        q1, q2 = w * t2, -w * t1
    else:
        raise ValueError(f"unknown q_term form {form!r}")
    g = omega.grid
    return StressField(
        _dealias(to_spectral(g, q1), dealias, trunc_n),
        _dealias(to_spectral(g, q2), dealias, trunc_n),
    )


def advect(
    u: VelocityField, f: SpectralField, dealias: str = "pin", trunc_n: int | None = None
) -> SpectralField:
    """Pseudo-spectral transport term ``(u . grad) f``."""
    g = f.grid
    prod = to_physical(u.u1) * to_physical(derivative(f, 1)) + to_physical(
        u.u2
    ) * to_physical(derivative(f, 2))
    return _dealias(to_spectral(g, prod), dealias, trunc_n)


def stress_forcing(tau: StressField) -> tuple[SpectralField, SpectralField]:
    """Momentum forcing ``(d1 t1 + d2 t2, d1 t2 - d2 t1)``."""
    t1, t2 = tau.t1, tau.t2
    return (
        derivative(t1, 1) + derivative(t2, 2),
        derivative(t2, 1) - derivative(t1, 2),
    )


def velocity_forcing(u: VelocityField) -> StressField:
    """Stress forcing ``(2 d1 u1, d1 u2 + d2 u1)``."""
    return StressField(
        2.0 * derivative(u.u1, 1),
        derivative(u.u2, 1) + derivative(u.u1, 2),
    )


def signed_power(c: np.ndarray, p: float) -> np.ndarray:
    """``c**p`` for integral ``p``; ``sign(c) |c|**p`` otherwise."""
    if float(p).is_integer():
        return c ** int(p)
    return np.sign(c) * np.abs(c) ** p


def trig_fields(grid: Grid, m: float, offset: bool = False) -> tuple[np.ndarray, ...]:
    """Physical samples ``(u1, u2, t1, t2)`` of the trigonometric initial data."""
    if not m > 1:
        raise ValueError(f"exponent m must exceed 1, got {m}")
    X, Y = grid.mesh
    cx, cy, sx, sy = np.cos(X), np.cos(Y), np.sin(X), np.sin(Y)
    h = 0.5 * m
    u1 = -h * signed_power(cx, m) * signed_power(cy, m - 1) * sy
    u2 = h * signed_power(cx, m - 1) * signed_power(cy, m - 1) * sx
    t1 = -h * signed_power(cx, m) * signed_power(cy, m - 1) * sy
    t2 = h * signed_power(cx, m - 1) * signed_power(cy, m) * sx
    if offset:
        t1 = t1 + 1.0
        t2 = t2 + 1.0
    return u1, u2, t1, t2


def _finish(grid: Grid, u1, u2, t1, t2, trunc_n: int | None) -> State:
    n = min(grid.nx, grid.ny) // 2 if trunc_n is None else trunc_n
    f = [
        truncate(c if isinstance(c, SpectralField) else to_spectral(grid, c), n)
        for c in (u1, u2, t1, t2)
    ]
    p1, p2 = leray_project(f[0], f[1])
    return State(VelocityField(p1, p2), StressField(f[2], f[3]), 0.0)


def trig_ic(
    grid: Grid, m: float = 3.8, offset: bool = False, trunc_n: int | None = None
) -> State:
    """Trigonometric initial state, box-truncated with a projected velocity."""
    return _finish(grid, *trig_fields(grid, m, offset), trunc_n)


GAUSSIAN_MIN_SIZE = 64


def gaussian_vorticity(grid: Grid) -> np.ndarray:
    """Two Gaussian vortices centred at ``(+-pi/4, 0)`` in coordinates wrapped to ``[-pi, pi)``."""
    X, Y = grid.mesh
    x = (X + np.pi) % (2.0 * np.pi) - np.pi
    y = (Y + np.pi) % (2.0 * np.pi) - np.pi
    return np.exp(-5.0 * ((x + np.pi / 4) ** 2 + y**2)) + np.exp(
        -5.0 * ((x - np.pi / 4) ** 2 + y**2)
    )


def gaussian_vortex_ic(
    grid: Grid, m: float = 4.0, offset: bool = True, trunc_n: int | None = None
) -> State:
    """Two-vortex velocity paired with the offset trigonometric stress."""
    if min(grid.nx, grid.ny) < GAUSSIAN_MIN_SIZE:
        raise ValueError(
            f"grid too coarse for the Gaussian vortices: need at least {GAUSSIAN_MIN_SIZE} points per axis"
        )
    u = biot_savart(to_spectral(grid, gaussian_vorticity(grid)))
    _, _, t1, t2 = trig_fields(grid, m, offset)
    return _finish(grid, u.u1, u.u2, t1, t2, trunc_n)
