"""Semi-implicit Fourier time stepping for the linear and nonlinear toy models.

Per step, the stress is advanced with diffusion and damping implicit and every
other term taken from level ``n``; the velocity is then advanced with the new
stress in the Leray-projected momentum equation::

    tau_{n+1} = [tau_n + dt (D u_n - N_tau(u_n, tau_n))] / (1 + dt (|k|^2 + a))
    u_{n+1}   = u_n + dt P [div tau_{n+1} - N_u(u_n)]

where ``N_tau = (u.grad) tau + Q`` and ``N_u = (u.grad) u`` vanish for the
linear model. The integrator works on real-FFT half spectra internally.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.fft as sfft

from . import diagnostics as diag
from .models import ModelKind, State, gaussian_vortex_ic, trig_ic
from .spectral import (
    Grid,
    dealias_mask,
    full_to_half,
    half_to_full,
    make_grid,
    projection_symbols,
)

BLOWUP_LIMIT = 1e8


class BlowUpError(RuntimeError):
    """Raised when the discrete solution stops being finite or exceeds the sup-norm limit."""

    def __init__(self, step: int, t: float, last_norms: dict | None = None):
        self.step = step
        self.t = t
        self.last_norms = last_norms or {}
        super().__init__(
            f"blow-up at step {step} (t={t:.6g}); last finite norms: {self.last_norms}"
        )


@dataclass(frozen=True)
class SolverConfig:
    model: ModelKind = ModelKind.LINEAR
    dt: float = 1e-4
    a: float = 1.0
    t_end: float = 1.0
    nx: int = 128
    ny: int = 128
    dealias: str = "pin"
    trunc_n: int | None = None
    record_every: int = 1
    ic: str = "trig"
    m: float = 3.8
    tau_offset: bool = False
    q_form: str = "printed"

    def __post_init__(self):
        try:
            object.__setattr__(self, "model", ModelKind(self.model))
        except ValueError:
            raise ValueError(
                f"model must be 'linear' or 'nonlinear', got {self.model!r}"
            ) from None
        for key in ("dt", "a", "t_end", "m"):
            if not math.isfinite(getattr(self, key)):
                raise ValueError(f"{key} must be finite")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.dt > self.t_end:
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"a must lie in [0, 1], got {self.a}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.ic not in ("trig", "gaussian"):
            raise ValueError(f"ic must be 'trig' or 'gaussian', got {self.ic!r}")
        if self.dealias not in ("pin", "two_thirds"):
            raise ValueError(
                f"dealias must be 'pin' or 'two_thirds', got {self.dealias!r}"
            )
        if self.q_form not in ("printed", "derived"):
            raise ValueError(
                f"q_form must be 'printed' or 'derived', got {self.q_form!r}"
            )
        if not self.m > 1:
            raise ValueError(f"m must exceed 1, got {self.m}")
        make_grid(self.nx, self.ny)
        if (
            self.trunc_n is not None
            and not 0 <= self.trunc_n <= min(self.nx, self.ny) // 2
        ):
            raise ValueError(f"trunc_n out of range: {self.trunc_n}")

    @property
    def grid(self) -> Grid:
        return make_grid(self.nx, self.ny)

    def with_(self, **changes) -> SolverConfig:
        return replace(self, **changes)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        return d


def initial_state(cfg: SolverConfig) -> State:
    grid = cfg.grid
    if cfg.ic == "gaussian":
        return gaussian_vortex_ic(
            grid, m=cfg.m, offset=cfg.tau_offset, trunc_n=cfg.trunc_n
        )
    return trig_ic(grid, m=cfg.m, offset=cfg.tau_offset, trunc_n=cfg.trunc_n)


def step_schedule(t_end: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the length of a trailing partial step (0 if none)."""
    ratio = t_end / dt
    n = round(ratio)
    if abs(n - ratio) <= 1e-9 * max(ratio, 1.0):
        return n, 0.0
    n = math.floor(ratio)
    return n, t_end - n * dt


class Integrator:
    """Mutable stepping kernel holding half-spectrum copies of ``(u, tau)``."""

    def __init__(self, cfg: SolverConfig, state: State):
        self.cfg = cfg
        g = state.grid
        if g != cfg.grid:
            raise ValueError(f"state grid {g} does not match config grid {cfg.grid}")
        self.grid = g
        self.nonlinear = cfg.model is ModelKind.NONLINEAR
        self.U = full_to_half(np.stack([state.u.u1.coeffs, state.u.u2.coeffs]))
        self.T = full_to_half(np.stack([state.tau.t1.coeffs, state.tau.t2.coeffs]))
        self.t = state.t
        self.steps = 0

        h = full_to_half
        self.d1 = 1j * h(g.k1_eff)
        self.d2 = 1j * h(g.k2_eff)
        self.ksq = h(g.ksq).real
        p11, p12, p22 = projection_symbols(g.k1_eff, g.k2_eff)
        self.p11, self.p12, self.p22 = h(p11).real, h(p12).real, h(p22).real
        mask = h(dealias_mask(g, cfg.dealias, cfg.trunc_n)).real
        self.mask = None if mask.all() else mask
        self._inv: dict[float, np.ndarray] = {}
        self._spec = np.empty((12,) + self.U.shape[1:], dtype=complex)
        self._prod = np.empty((4,) + g.shape)

    def implicit_factor(self, dt: float) -> np.ndarray:
        inv = self._inv.get(dt)
        if inv is None:
            inv = 1.0 / (1.0 + dt * (self.ksq + self.cfg.a))
            self._inv[dt] = inv
        return inv

    def _nonlinear_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """Dealiased ``(N_u, N_tau)`` from the current level, as half spectra."""
        U1, U2 = self.U
        T1, T2 = self.T
        d1, d2 = self.d1, self.d2
        spec = self._spec
        spec[0] = U1
        spec[1] = U2
        np.multiply(d1, U1, out=spec[2])
        np.multiply(d2, U1, out=spec[3])
        np.multiply(d1, U2, out=spec[4])
        np.multiply(d2, U2, out=spec[5])
        spec[6] = T1
        spec[7] = T2
        np.multiply(d1, T1, out=spec[8])
        np.multiply(d2, T1, out=spec[9])
        np.multiply(d1, T2, out=spec[10])
        np.multiply(d2, T2, out=spec[11])
        u1, u2, a11, a12, a21, a22, t1, t2, b11, b12, b21, b22 = sfft.irfft2(
            spec, s=self.grid.shape
        )
        omega = a21 - a12
        prod = self._prod
        prod[0] = u1 * a11 + u2 * a12
        prod[1] = u1 * a21 + u2 * a22
        if self.cfg.q_form == "printed":
            q1, q2 = -2.0 * omega * t2, omega * (t1 - t2)
        else:
            q1, q2 = omega * t2, -omega * t1
        prod[2] = u1 * b11 + u2 * b12 + q1
        prod[3] = u1 * b21 + u2 * b22 + q2
        nl = sfft.rfft2(prod)
        if self.mask is not None:
            nl *= self.mask
        return nl[:2], nl[2:]

    def step(self, dt: float | None = None) -> None:
        dt = self.cfg.dt if dt is None else dt
        inv = self.implicit_factor(dt)
        U1, U2 = self.U
        d1, d2 = self.d1, self.d2
        rhs1 = 2.0 * d1 * U1
        rhs2 = d1 * U2 + d2 * U1
        if self.nonlinear:
            n_u, n_tau = self._nonlinear_terms()
            rhs1 -= n_tau[0]
            rhs2 -= n_tau[1]
        T1 = (self.T[0] + dt * rhs1) * inv
        T2 = (self.T[1] + dt * rhs2) * inv
        s1 = d1 * T1 + d2 * T2
        s2 = d1 * T2 - d2 * T1
        if self.nonlinear:
            s1 -= n_u[0]
            s2 -= n_u[1]
        self.U[0] += dt * (self.p11 * s1 + self.p12 * s2)
        self.U[1] += dt * (self.p12 * s1 + self.p22 * s2)
        self.T[0] = T1
        self.T[1] = T2
        self.steps += 1
        self.t += dt

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.U.sum() + self.T.sum()))

    def sup_norm(self) -> float:
        phys = sfft.irfft2(np.concatenate([self.U, self.T]), s=self.grid.shape)
        return float(np.abs(phys).max())

    def state(self) -> State:
        full = half_to_full(np.concatenate([self.U, self.T]), self.grid.ny)
        return State.from_arrays(self.grid, full, self.t)


def _check_model(cfg: SolverConfig, kind: ModelKind) -> None:
    if cfg.model is not kind:
        raise ValueError(f"config model is {cfg.model.value}, expected {kind.value}")


def step_linear(s: State, cfg: SolverConfig) -> State:
    _check_model(cfg, ModelKind.LINEAR)
    return _one_step(s, cfg)


def step_nonlinear(s: State, cfg: SolverConfig) -> State:
    _check_model(cfg, ModelKind.NONLINEAR)
    return _one_step(s, cfg)


def _one_step(s: State, cfg: SolverConfig) -> State:
    it = Integrator(cfg, s)
    it.step()
    if not it.is_finite():
        raise BlowUpError(1, it.t, diag.norms(s).as_dict())
    out = it.state()
    return State(out.u, out.tau, s.t + cfg.dt)


Sink = Callable[[diag.DiagnosticsRecord, State], None]


@dataclass
class RunResult:
    state: State
    records: list[diag.DiagnosticsRecord]
    steps: int


def make_record(
    state: State, cfg: SolverConfig, prev: State | None = None, extended: bool = False
) -> diag.DiagnosticsRecord:
    rec = diag.norms(state)
    if prev is not None:
        rec.energy_residual = diag.energy_residual(
            prev, state, cfg.a, cfg.model, cfg.dealias, cfg.trunc_n, cfg.q_form
        )
    if extended:
        rec.besov_u = diag.besov_norm(state.u)
        rec.besov_tau = diag.besov_norm(state.tau)
        rec.gamma_linf = diag.linf(diag.gamma(state))
    return rec


def run(
    cfg: SolverConfig,
    sinks: Iterable[Sink] = (),
    initial: State | None = None,
    extended: bool = False,
    records: bool = True,
    check_every: int = 100,
) -> RunResult:
    """Integrate from ``initial`` (default: the configured initial data) to ``t_end``.

    Records are taken at step 0, every ``record_every`` steps and at the final
    time; each is passed to every sink together with the state. With
    ``records=False`` only the final state is produced.
    """
    sinks = list(sinks)
    state0 = initial_state(cfg) if initial is None else initial
    it = Integrator(cfg, state0)
    n_full, remainder = step_schedule(cfg.t_end, cfg.dt)
    n_total = n_full + (1 if remainder > 0 else 0)
    out: list[diag.DiagnosticsRecord] = []
    last_norms: dict = {}

    def emit(state: State, prev: State | None) -> None:
        nonlocal last_norms
        rec = make_record(state, cfg, prev, extended)
        last_norms = {k: v for k, v in rec.as_dict().items() if v is not None}
        out.append(rec)
        for sink in sinks:
            sink(rec, state)

    want = records or bool(sinks)
    if want:
        emit(it.state(), None)
    t0 = state0.t
    for n in range(1, n_total + 1):
        is_record = want and (n % cfg.record_every == 0 or n == n_total)
        prev = it.state() if is_record else None
        if n <= n_full:
            it.step(cfg.dt)
            it.t = t0 + n * cfg.dt
        else:
            it.step(remainder)
            it.t = t0 + cfg.t_end
        if not it.is_finite() or (
            (n % check_every == 0 or n == n_total) and it.sup_norm() > BLOWUP_LIMIT
        ):
            raise BlowUpError(n, it.t, last_norms)
        if is_record:
            emit(it.state(), prev)
    return RunResult(it.state(), out, n_total)
