"""Norms, energy bookkeeping, Littlewood-Paley blocks and damping-rate estimates.

L2 norms are integrals over [0, 2pi)^2 approximated by the collocation rule
``(2pi/n)^2 * sum(samples**2)``, computed through Parseval. Dyadic blocks use
sharp shells: block ``-1`` holds ``|k| <= 1`` and block ``j >= 0`` holds
``2**j < |k| <= 2**(j+1)``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import optimize

from .models import ModelKind, State, StressField, q_term, vorticity
from .spectral import Grid, SpectralField, l2_inner, to_physical


@dataclass
class DiagnosticsRecord:
    t: float
    l2_u: float
    l2_tau: float
    h1_u: float
    h1_tau: float
    linf_omega: float
    energy: float
    energy_residual: float = 0.0
    besov_u: float | None = None
    besov_tau: float | None = None
    gamma_linf: float | None = None

    CORE = (
        "t",
        "l2_u",
        "l2_tau",
        "h1_u",
        "h1_tau",
        "linf_omega",
        "energy",
        "energy_residual",
    )
    EXTENDED = ("besov_u", "besov_tau", "gamma_linf")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _sumsq(fs: Iterable[SpectralField]) -> float:
    return sum(l2_inner(f, f) for f in fs)


def _gradsq(fs: Iterable[SpectralField]) -> float:
    """``||grad f||^2`` summed over components, with the Laplacian symbol."""
    total = 0.0
    for f in fs:
        g = f.grid
        total += (
            g.cell_area * float(np.sum(g.ksq * np.abs(f.coeffs) ** 2)) / (g.nx * g.ny)
        )
    return total


def linf(f: SpectralField) -> float:
    return float(np.abs(to_physical(f)).max())


def energy(s: State) -> float:
    return 0.5 * (_sumsq(s.u.components()) + _sumsq(s.tau.components()))


def norms(s: State) -> DiagnosticsRecord:
    """Core norms of a state; the energy residual is left at zero."""
    lu, lt = _sumsq(s.u.components()), _sumsq(s.tau.components())
    gu, gt = _gradsq(s.u.components()), _gradsq(s.tau.components())
    return DiagnosticsRecord(
        t=s.t,
        l2_u=math.sqrt(lu),
        l2_tau=math.sqrt(lt),
        h1_u=math.sqrt(lu + gu),
        h1_tau=math.sqrt(lt + gt),
        linf_omega=linf(vorticity(s.u)),
        energy=0.5 * (lu + lt),
    )


def energy_residual(
    prev: State,
    next: State,
    a: float,
    model: ModelKind | str = ModelKind.LINEAR,
    dealias: str = "pin",
    trunc_n: int | None = None,
    q_form: str = "printed",
) -> float:
    """Defect of the energy identity over one step.

    ``(E_next - E_prev)/dt + ||grad tau||^2 + a ||tau||^2`` at the new level,
    plus ``<Q, tau>`` for the nonlinear model. Vanishes at first order in dt.
    """
    dt = next.t - prev.t
    if dt <= 0.0:
        return 0.0
    taus = next.tau.components()
    r = (energy(next) - energy(prev)) / dt + _gradsq(taus) + a * _sumsq(taus)
    if ModelKind(model) is ModelKind.NONLINEAR:
        q = q_term(vorticity(next.u), next.tau, dealias, trunc_n, q_form)
        r += l2_inner(q.t1, next.tau.t1) + l2_inner(q.t2, next.tau.t2)
    return float(r)


# -- Littlewood-Paley blocks ---------------------------------------------------


def block_index(grid: Grid) -> np.ndarray:
    """Dyadic block label of every lattice mode."""
    ksq = grid.ksq
    with np.errstate(divide="ignore"):
        j = np.ceil(0.5 * np.log2(np.where(ksq > 0, ksq, 1.0))) - 1
    return np.where(ksq <= 1, -1, j).astype(int)


def block_fields(f: SpectralField) -> dict[int, SpectralField]:
    labels = block_index(f.grid)
    return {
        int(j): SpectralField(f.grid, np.where(labels == j, f.coeffs, 0.0))
        for j in range(-1, int(labels.max()) + 1)
    }


@dataclass
class BlockSpectrum:
    """Per-block norms ``||Delta_j f||_{L^p}`` for ``j = -1, 0, 1, ...``."""

    p: float
    indices: np.ndarray
    values: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return {int(j): float(v) for j, v in zip(self.indices, self.values)}


def _as_components(f) -> tuple[SpectralField, ...]:
    if isinstance(f, SpectralField):
        return (f,)
    if hasattr(f, "components"):
        return tuple(f.components())
    return tuple(f)


def lp_blocks(f, p: float = math.inf) -> BlockSpectrum:
    """Block norms of a scalar field or of a vector field (pointwise Euclidean)."""
    comps = _as_components(f)
    if p not in (2, math.inf):
        raise ValueError(f"p must be 2 or inf, got {p}")
    per_comp = [block_fields(c) for c in comps]
    indices = sorted(per_comp[0])
    values = []
    for j in indices:
        if p == 2:
            values.append(math.sqrt(_sumsq(b[j] for b in per_comp)))
        else:
            mag = np.sqrt(sum(to_physical(b[j]) ** 2 for b in per_comp))
            values.append(float(mag.max()))
    return BlockSpectrum(p, np.array(indices), np.array(values))


def besov_norm(f, s: float = 0.0, p: float = math.inf, r: float = 1) -> float:
    """Non-homogeneous Besov norm ``||(2^{js} ||Delta_j f||_p)_j||_{l^r}``."""
    blocks = lp_blocks(f, p)
    weighted = 2.0 ** (s * blocks.indices) * blocks.values
    if r == 1:
        return float(weighted.sum())
    if r == math.inf:
        return float(weighted.max())
    raise ValueError(f"r must be 1 or inf, got {r}")


# -- structural variable ---------------------------------------------------------

RIESZ_CONVENTION = "R = -(-Lap)^-1 curl div; symbol (-2 k1 k2, k1^2 - k2^2)/|k|^2 on (t1, t2); Gamma = omega - R tau"


def riesz_multiplier(k1: np.ndarray, k2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symbol pair of ``-(-Lap)^{-1} curl div`` acting on ``(t1, t2)``; zero at ``k = 0``."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    ksq = k1**2 + k2**2
    zero = ksq == 0
    inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, ksq))
    return -2.0 * k1 * k2 * inv, (k1**2 - k2**2) * inv


def riesz_tau(tau: StressField) -> SpectralField:
    """Apply the order-zero operator ``-(-Lap)^{-1} curl div`` to the stress.

    The odd cross term uses the derivative wavenumbers, so the Nyquist lines
    stay conjugate symmetric.
    """
    g = tau.grid
    m1, _ = riesz_multiplier(g.k1_eff, g.k2_eff)
    _, m2 = riesz_multiplier(g.k1, g.k2)
    m1 = m1 * (g.ksq > 0)
    return SpectralField(g, m1 * tau.t1.coeffs + m2 * tau.t2.coeffs)


def gamma(s: State) -> SpectralField:
    """``omega - R tau``."""
    return vorticity(s.u) - riesz_tau(s.tau)


# -- damped heat gap -------------------------------------------------------------


def _per_mode_peak(kappa: float, a: float) -> float:
    """Time maximising ``(1 - e^{-a t}) e^{-kappa t}``: ``e^{-a t} = kappa/(a + kappa)``."""
    return math.log1p(a / kappa) / a


def _golden_max(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    res = optimize.minimize_scalar(
        lambda s: -fn(math.exp(s)),
        bounds=(math.log(lo), math.log(hi)),
        method="bounded",
        options={"xatol": tol},
    )
    return math.exp(res.x)


def heat_gap_discrete(spectrum: Sequence[tuple[float, float]], a: float) -> float:
    """``sup_t (1 - e^{-a t}) ||e^{t Lap} f||`` for a lattice spectrum ``[(|k|, amp), ...]``."""
    if not spectrum:
        raise ValueError("spectrum must not be empty")
    if not a > 0:
        raise ValueError(f"damping must be positive, got {a}")
    kappa = np.array([float(k) ** 2 for k, _ in spectrum])
    amp = np.array([abs(float(c)) for _, c in spectrum])
    if np.any((kappa == 0) & (amp > 0)):
        raise ValueError("spectrum must be mean-free (no amplitude at |k| = 0)")
    keep = kappa > 0
    kappa, amp = kappa[keep], amp[keep]
    if kappa.size == 0:
        return 0.0

    def objective(t: float) -> float:
        return -math.expm1(-a * t) * math.sqrt(
            float(np.sum((amp * np.exp(-kappa * t)) ** 2))
        )

    seeds = [_per_mode_peak(k, a) for k in kappa]
    hi = 50.0 / a
    lo = max(min(seeds) / 10.0, 1e-12)
    candidates = seeds + [_golden_max(objective, lo, min(max(seeds) * 10.0, hi))]
    return max(objective(t) for t in candidates)


def heat_profile_continuum(t: float, quadrature_n: int = 64) -> float:
    """``(int_{|xi| <= 1} e^{-2 |xi|^2 t} dxi)^{1/2}`` by Gauss-Legendre in ``s = |xi|^2``."""
    # integrand decays like e^{-2 s t}; beyond s = 20/t it is below e^{-40}
    upper = min(1.0, 20.0 / t) if t > 0 else 1.0
    x, w = np.polynomial.legendre.leggauss(quadrature_n)
    s = 0.5 * upper * (x + 1.0)
    integral = np.pi * 0.5 * upper * float(np.sum(w * np.exp(-2.0 * s * t)))
    return math.sqrt(integral)


def heat_gap_continuum(a: float, quadrature_n: int = 64) -> float:
    """``sup_t (1 - e^{-a t}) ||e^{t Lap} f0||_{L^2}`` for indicator data on the unit disc."""
    if not a > 0:
        raise ValueError(f"damping must be positive, got {a}")

    def objective(t: float) -> float:
        return -math.expm1(-a * t) * heat_profile_continuum(t, quadrature_n)

    ts = np.geomspace(1e-3 / a, 1e3 / a, 121)
    vals = [objective(t) for t in ts]
    i = int(np.argmax(vals))
    t_best = _golden_max(objective, ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)])
    return max(objective(t_best), vals[i])


def rate_fit(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(gap)`` against ``log(a)``."""
    if len(pairs) < 3:
        raise ValueError("need at least three (a, gap) pairs")
    a = np.array([p[0] for p in pairs], dtype=float)
    g = np.array([p[1] for p in pairs], dtype=float)
    if np.any(a <= 0) or np.any(g <= 0):
        raise ValueError("rate_fit needs strictly positive entries")
    slope, _ = np.polyfit(np.log(a), np.log(g), 1)
    return float(slope)
