"""Independent reference computations shared by the unit and acceptance tests."""

import numpy as np

from oldroyd_toy.models import State


def single_mode_state(grid, i, j, coeffs):
    """Real state carrying ``coeffs`` at lattice index (i, j) and the conjugates at its partner."""
    arrays = np.zeros((4,) + grid.shape, dtype=complex)
    pi, pj = (-i) % grid.nx, (-j) % grid.ny
    for c, val in enumerate(coeffs):
        if (pi, pj) == (i, j):
            arrays[c, i, j] = val.real
        else:
            arrays[c, i, j] = val
            arrays[c, pi, pj] = np.conj(val)
    return State.from_arrays(grid, arrays)


def numpy_reference_step(s: State, dt: float, a: float, nonlinear: bool) -> np.ndarray:
    """Independent full-lattice step written with plain numpy FFTs."""
    n = s.grid.nx
    k = np.fft.fftfreq(n, 1.0 / n)
    ke = np.where(k == -n // 2, 0.0, k)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    E1, E2 = np.meshgrid(ke, ke, indexing="ij")
    u1, u2, t1, t2 = s.stacked()

    def real(f):
        return np.fft.ifft2(f).real

    def dx(f):
        return 1j * E1 * f

    def dy(f):
        return 1j * E2 * f

    r1 = 2 * dx(u1)
    r2 = dx(u2) + dy(u1)
    if nonlinear:
        U1, U2 = real(u1), real(u2)
        w = real(dx(u2) - dy(u1))
        T1, T2 = real(t1), real(t2)
        r1 = r1 - np.fft.fft2(U1 * real(dx(t1)) + U2 * real(dy(t1)) - 2 * w * T2)
        r2 = r2 - np.fft.fft2(U1 * real(dx(t2)) + U2 * real(dy(t2)) + w * (T1 - T2))
    den = 1 + dt * (K1**2 + K2**2 + a)
    nt1, nt2 = (t1 + dt * r1) / den, (t2 + dt * r2) / den
    f1 = dx(nt1) + dy(nt2)
    f2 = dx(nt2) - dy(nt1)
    if nonlinear:
        f1 = f1 - np.fft.fft2(U1 * real(dx(u1)) + U2 * real(dy(u1)))
        f2 = f2 - np.fft.fft2(U1 * real(dx(u2)) + U2 * real(dy(u2)))
    esq = E1**2 + E2**2
    dot = np.where(esq > 0, (E1 * f1 + E2 * f2) / np.where(esq > 0, esq, 1), 0)
    return np.stack([u1 + dt * (f1 - E1 * dot), u2 + dt * (f2 - E2 * dot), nt1, nt2])


def mode_oracle(k1, k2, ksq, coeffs, dt, a, steps):
    """Recurrence with derivative wavenumbers (k1, k2) and Laplacian symbol ``ksq``."""
    u1, u2, t1, t2 = (complex(c) for c in coeffs)
    den = 1.0 + dt * (ksq + a)
    esq = k1 * k1 + k2 * k2
    for _ in range(steps):
        t1, t2 = (
            (t1 + dt * 2j * k1 * u1) / den,
            (t2 + dt * (1j * k1 * u2 + 1j * k2 * u1)) / den,
        )
        s1 = 1j * (k1 * t1 + k2 * t2)
        s2 = 1j * (k1 * t2 - k2 * t1)
        if esq > 0:
            dot = (k1 * s1 + k2 * s2) / esq
            s1, s2 = s1 - k1 * dot, s2 - k2 * dot
        u1, u2 = u1 + dt * s1, u2 + dt * s2
    return np.array([u1, u2, t1, t2])
