"""Fourier machinery on the periodic square [0, 2pi)^2.

Fields are stored on the full wavenumber lattice in FFT order, as arrays of
shape ``(nx, ny)`` indexed ``[k1, k2]`` (``k2`` fastest). Physical samples use
the same layout, ``samples[i, j] = f(2*pi*i/nx, 2*pi*j/ny)``.

Conventions:
- forward transform is unnormalized, the inverse carries ``1/(nx*ny)``;
- first-derivative multipliers vanish on the Nyquist wavenumber ``-n/2``;
- second-order symbols (the Laplacian) use the true integer wavenumbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

MIN_SIZE = 8
MAX_SIZE = 4096


class GridMismatchError(ValueError):
    """Raised when fields living on different grids are combined."""


@dataclass(frozen=True)
class Grid:
    """Uniform collocation grid on the 2pi-periodic torus.

    Attributes:
        nx: Number of points (and modes) along x, even.
        ny: Number of points (and modes) along y, even.
    """

    nx: int
    ny: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def lx(self) -> float:
        return 2.0 * np.pi

    @property
    def ly(self) -> float:
        return 2.0 * np.pi

    @cached_property
    def kx(self) -> np.ndarray:
        """Integer wavenumbers along x in FFT order."""
        return np.fft.fftfreq(self.nx, 1.0 / self.nx).astype(np.int64)

    @cached_property
    def ky(self) -> np.ndarray:
        return np.fft.fftfreq(self.ny, 1.0 / self.ny).astype(np.int64)

    @cached_property
    def k1(self) -> np.ndarray:
        return np.broadcast_to(self.kx[:, None], self.shape).astype(float)

    @cached_property
    def k2(self) -> np.ndarray:
        return np.broadcast_to(self.ky[None, :], self.shape).astype(float)

    @cached_property
    def k1_eff(self) -> np.ndarray:
        """First-derivative wavenumber along x (zero on the Nyquist line)."""
        k = self.k1.copy()
        k[self.nx // 2, :] = 0.0
        return k

    @cached_property
    def k2_eff(self) -> np.ndarray:
        k = self.k2.copy()
        k[:, self.ny // 2] = 0.0
        return k

    @cached_property
    def ksq(self) -> np.ndarray:
        """|k|^2 with true integer wavenumbers; symbol of -Laplacian."""
        return self.k1**2 + self.k2**2

    @cached_property
    def x(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.nx) / self.nx

    @cached_property
    def y(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.ny) / self.ny

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Collocation points as ``(X, Y)`` with ``indexing='ij'``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def cell_area(self) -> float:
        return (2.0 * np.pi) ** 2 / (self.nx * self.ny)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes lying on a Nyquist line of either axis."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.nx // 2, :] = True
        mask[:, self.ny // 2] = True
        return mask

    def box_mask(self, n: int) -> np.ndarray:
        """Modes with ``max(|k1|, |k2|) <= n``."""
        return np.maximum(np.abs(self.k1), np.abs(self.k2)) <= n

    @cached_property
    def two_thirds_mask(self) -> np.ndarray:
        return (3 * np.abs(self.k1) < self.nx) & (3 * np.abs(self.k2) < self.ny)


def make_grid(nx: int, ny: int) -> Grid:
    """Build a grid, rejecting odd or out-of-range sizes."""
    for name, n in (("nx", nx), ("ny", ny)):
        if int(n) != n:
            raise ValueError(f"{name} must be an integer, got {n!r}")
        if n % 2:
            raise ValueError(f"{name} must be even, got odd size {n}")
        if not MIN_SIZE <= n <= MAX_SIZE:
            raise ValueError(f"{name} must lie in [{MIN_SIZE}, {MAX_SIZE}], got {n}")
    return Grid(int(nx), int(ny))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A real scalar field held as Fourier coefficients on the full lattice."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    def _check(self, other: SpectralField) -> None:
        if other.grid != self.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> SpectralField:
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, c: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * c)

    __rmul__ = __mul__

    def physical(self) -> np.ndarray:
        return to_physical(self)

    @classmethod
    def zeros(cls, grid: Grid) -> SpectralField:
        return cls(grid, np.zeros(grid.shape, dtype=complex))


def half_to_full(half: np.ndarray, ny: int) -> np.ndarray:
    """Expand a real-FFT half spectrum (last axis ``ny//2 + 1``) to the full lattice.

    Works on stacked arrays; the expansion is exact, so the result is
    conjugate symmetric bit for bit.
    """
    nx = half.shape[-2]
    nh = ny // 2 + 1
    full = np.empty(half.shape[:-1] + (ny,), dtype=complex)
    full[..., :nh] = half
    rows = (-np.arange(nx)) % nx
    cols = ny - np.arange(nh, ny)
    full[..., nh:] = np.conj(half[..., rows, :][..., cols])
    return full


def hermitize(half: np.ndarray, ny: int) -> np.ndarray:
    """Symmetrize the self-paired ``k2 = 0`` and Nyquist columns of a half spectrum."""
    nx = half.shape[-2]
    rows = (-np.arange(nx)) % nx
    out = half.copy()
    for c in {0, ny // 2}:
        col = half[..., :, c]
        out[..., :, c] = 0.5 * (col + np.conj(col[..., rows]))
    return out


def full_to_half(full: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(full[..., : full.shape[-1] // 2 + 1])


def to_spectral(grid: Grid, samples: np.ndarray) -> SpectralField:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.shape:
        raise ValueError(
            f"sample shape {samples.shape} does not match grid {grid.shape}"
        )
    return SpectralField(
        grid, half_to_full(hermitize(sfft.rfft2(samples), grid.ny), grid.ny)
    )


def to_physical(f: SpectralField) -> np.ndarray:
    return sfft.irfft2(full_to_half(f.coeffs), s=f.grid.shape)


def conjugate_partner(coeffs: np.ndarray) -> np.ndarray:
    """Return ``conj(c(-k))`` laid out at ``k`` (equals ``c`` for real fields)."""
    return np.conj(np.roll(coeffs[::-1, ::-1], 1, axis=(0, 1)))


def symmetry_defect(f: SpectralField) -> float:
    """Relative violation of conjugate symmetry."""
    scale = np.abs(f.coeffs).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(f.coeffs - conjugate_partner(f.coeffs)).max() / scale)


def derivative(f: SpectralField, axis: int) -> SpectralField:
    """Spectral partial derivative along ``axis`` (1 for x, 2 for y)."""
    if axis == 1:
        k = f.grid.k1_eff
    elif axis == 2:
        k = f.grid.k2_eff
    else:
        raise ValueError(f"axis must be 1 or 2, got {axis!r}")
    return SpectralField(f.grid, 1j * k * f.coeffs)


def truncate(f: SpectralField, n: int) -> SpectralField:
    """Zero all modes outside the box ``max(|k1|, |k2|) <= n``."""
    limit = min(f.grid.nx, f.grid.ny) // 2
    if not 0 <= n <= limit:
        raise ValueError(f"truncation index must lie in [0, {limit}], got {n}")
    return SpectralField(f.grid, np.where(f.grid.box_mask(n), f.coeffs, 0.0))


def dealias_mask(grid: Grid, rule: str = "pin", n: int | None = None) -> np.ndarray:
    """Mask applied to nonlinear products.

    ``"pin"`` is the box truncation with index ``n`` (default ``min(nx, ny)//2``,
    i.e. every representable mode); ``"two_thirds"`` is the Orszag rule.
    """
    if rule == "pin":
        return grid.box_mask(min(grid.nx, grid.ny) // 2 if n is None else n)
    if rule == "two_thirds":
        return grid.two_thirds_mask
    raise ValueError(f"unknown dealias rule {rule!r}")


def projection_symbols(
    k1: np.ndarray, k2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entries ``(P11, P12, P22)`` of ``I - k k^T/|k|^2``; identity where ``k = 0``."""
    ksq = k1**2 + k2**2
    zero = ksq == 0
    inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, ksq))
    return 1.0 - k1 * k1 * inv, -k1 * k2 * inv, 1.0 - k2 * k2 * inv


def leray_project(
    v1: SpectralField, v2: SpectralField
) -> tuple[SpectralField, SpectralField]:
    """Project a vector field onto its divergence-free part.

    The discrete divergence uses the derivative wavenumbers, so the output is
    annihilated exactly by :func:`divergence`. The mean (``k = 0``) passes
    through unchanged.
    """
    v1._check(v2)
    g = v1.grid
    p11, p12, p22 = projection_symbols(g.k1_eff, g.k2_eff)
    w1 = p11 * v1.coeffs + p12 * v2.coeffs
    w2 = p12 * v1.coeffs + p22 * v2.coeffs
    return SpectralField(g, w1), SpectralField(g, w2)


def divergence(v1: SpectralField, v2: SpectralField) -> SpectralField:
    v1._check(v2)
    return derivative(v1, 1) + derivative(v2, 2)


def divergence_defect(v1: SpectralField, v2: SpectralField) -> float:
    """``max_k |k . v(k)| / ||v||`` with ``||v||`` the coefficient l2 norm."""
    g = v1.grid
    kv = np.abs(g.k1_eff * v1.coeffs + g.k2_eff * v2.coeffs).max()
    norm = np.sqrt(np.sum(np.abs(v1.coeffs) ** 2 + np.abs(v2.coeffs) ** 2))
    return 0.0 if norm == 0.0 else float(kv / norm)


def l2_inner(f: SpectralField, g: SpectralField) -> float:
    """Real inner product ``int f g dx`` over the torus, via Parseval."""
    f._check(g)
    n = f.grid.nx * f.grid.ny
    return float(f.grid.cell_area * np.real(np.vdot(f.coeffs, g.coeffs)) / n)


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(max(l2_inner(f, f), 0.0)))
