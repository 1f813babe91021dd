"""Radial grid, wavefunction representation and basic operator actions.

The wavefunction is stored as reduced partial waves u_l(r) = r R_l(r) on a
uniform radial grid r_j = (j+1) dr, j = 0 .. n_r-1, with hard Dirichlet
zeros at r = 0 and at the box edge r_max = (n_r+1) dr.  Only the m = 0
sector is kept (linear polarization).  The z and p_z actions use the
standard l <-> l+-1 coupling

    c_l = (l+1) / sqrt((2l+1)(2l+3)).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "RadialGrid",
    "PotentialSpec",
    "WaveState",
    "EigenResult",
    "coupling_coefficients",
    "build_ground_state",
    "apply_z",
    "apply_pz",
    "inner",
    "norm",
    "z_truncation_loss",
    "save_state",
    "load_state",
]


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid with an outer absorbing-mask region."""

    dr: float
    n_r: int
    absorber_fraction: float = 0.2

    def __post_init__(self):
        if self.dr <= 0:
            raise ValueError(f"dr must be > 0, got {self.dr}")
        if self.n_r < 16:
            raise ValueError(f"n_r must be >= 16, got {self.n_r}")
        if not (0.0 <= self.absorber_fraction < 0.5):
            raise ValueError(
                f"absorber_fraction must lie in [0, 0.5), got {self.absorber_fraction}"
            )

    @classmethod
    def from_rmax(cls, dr: float, rmax: float, absorber_fraction: float = 0.2):
        return cls(dr, int(round(rmax / dr)) - 1, absorber_fraction)

    @property
    def rmax(self) -> float:
        return (self.n_r + 1) * self.dr

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.n_r + 1)

    def mask(self) -> np.ndarray:
        """Multiplicative absorber: cos^(1/8) ramp over the outer region."""
        m = np.ones(self.n_r)
        if self.absorber_fraction > 0:
            r = self.r
            r0 = (1.0 - self.absorber_fraction) * self.rmax
            sel = r > r0
            m[sel] = np.cos(0.5 * np.pi * (r[sel] - r0) / (self.rmax - r0)) ** 0.125
        return m


@dataclass(frozen=True)
class PotentialSpec:
    """Field-free potential: coulomb(Z), harmonic(Omega) or free."""

    variant: str
    charge: float = 1.0
    freq: float = 1.0

    def __post_init__(self):
        if self.variant not in ("coulomb", "harmonic", "free"):
            raise ValueError(f"unknown potential variant {self.variant!r}")
        if self.variant == "coulomb" and self.charge <= 0:
            raise ValueError(f"coulomb charge must be > 0, got {self.charge}")
        if self.variant == "harmonic" and self.freq <= 0:
            raise ValueError(f"oscillator frequency must be > 0, got {self.freq}")

    @classmethod
    def coulomb(cls, charge: float = 1.0):
        return cls("coulomb", charge=charge)

    @classmethod
    def harmonic(cls, freq: float):
        return cls("harmonic", freq=freq)

    @classmethod
    def free(cls):
        return cls("free")

    def values(self, r: np.ndarray) -> np.ndarray:
        """V(r) without the centrifugal term."""
        if self.variant == "coulomb":
            return -self.charge / r
        if self.variant == "harmonic":
            return 0.5 * self.freq**2 * r**2
        return np.zeros_like(r)


@dataclass
class WaveState:
    """Partial-wave coefficients u_l(r_j), complex, shape (n_l, n_r)."""

    grid: RadialGrid
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != self.grid.n_r:
            raise ValueError(
                f"coeffs must have shape (n_l, {self.grid.n_r}), got {self.coeffs.shape}"
            )

    @property
    def n_l(self) -> int:
        return self.coeffs.shape[0]

    def copy(self) -> "WaveState":
        return WaveState(self.grid, self.coeffs.copy(), self.time)


@dataclass(frozen=True)
class EigenResult:
    state: WaveState
    energy: float


def coupling_coefficients(n_l: int) -> np.ndarray:
    l = np.arange(n_l)
    return (l + 1) / np.sqrt((2 * l + 1) * (2 * l + 3))


def radial_hamiltonian(grid: RadialGrid, pot: PotentialSpec, l: int):
    """Tridiagonal (diag, offdiag) of -1/2 d2/dr2 + l(l+1)/2r^2 + V(r)."""
    r = grid.r
    diag = 1.0 / grid.dr**2 + l * (l + 1) / (2.0 * r**2) + pot.values(r)
    off = np.full(grid.n_r - 1, -0.5 / grid.dr**2)
    return diag, off


def build_ground_state(grid: RadialGrid, pot: PotentialSpec, n_l: int) -> EigenResult:
    """Lowest eigenpair of the l = 0 radial Hamiltonian, normalized to 1."""
    if pot.variant == "free":
        raise ValueError("free potential has no bound ground state")
    if n_l < 1:
        raise ValueError(f"n_l must be >= 1, got {n_l}")
    diag, off = radial_hamiltonian(grid, pot, 0)
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    u = v[:, 0]
    u = u / np.sqrt(np.sum(u**2) * grid.dr)
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    coeffs = np.zeros((n_l, grid.n_r), dtype=np.complex128)
    coeffs[0] = u
    return EigenResult(WaveState(grid, coeffs, 0.0), float(w[0]))


def _check_compatible(a: WaveState, b: WaveState):
    if a.grid != b.grid or a.n_l != b.n_l:
        raise ValueError("wave states live on different grids")


def inner(a: WaveState, b: WaveState) -> complex:
    """<a|b> with the trapezoid-free uniform rule sum conj(a) b dr."""
    _check_compatible(a, b)
    return complex(np.sum(np.conj(a.coeffs) * b.coeffs) * a.grid.dr)


def norm(s: WaveState) -> float:
    return float(np.sqrt(np.sum(np.abs(s.coeffs) ** 2) * s.grid.dr))


def apply_z(s: WaveState) -> WaveState:
    """z = r cos(theta): couples u_l into u_(l+-1) with weight c_l r."""
    if s.n_l < 2:
        raise ValueError("apply_z needs at least two angular channels")
    cl = coupling_coefficients(s.n_l)
    r = s.grid.r
    out = np.zeros_like(s.coeffs)
    for l in range(s.n_l - 1):
        out[l + 1] += cl[l] * r * s.coeffs[l]
        out[l] += cl[l] * r * s.coeffs[l + 1]
    return WaveState(s.grid, out, s.time)


def z_truncation_loss(s: WaveState) -> float:
    """Norm of the z-action component lost to the truncated channel l_max+1."""
    cl_top = coupling_coefficients(s.n_l + 1)[s.n_l - 1]
    lost = cl_top * s.grid.r * s.coeffs[-1]
    return float(np.sqrt(np.sum(np.abs(lost) ** 2) * s.grid.dr))


def _ddr(u: np.ndarray, dr: float) -> np.ndarray:
    # central difference with Dirichlet zeros beyond both ends
    out = np.zeros_like(u)
    out[:-1] += u[1:]
    out[1:] -= u[:-1]
    return out / (2.0 * dr)


def apply_pz(s: WaveState) -> WaveState:
    """p_z = -i d/dz in the reduced partial-wave representation.

    Channel l receives c_(l-1) (u'_(l-1) - l u_(l-1)/r) from below and
    c_l (u'_(l+1) + (l+1) u_(l+1)/r) from above.
    """
    if s.n_l < 2:
        raise ValueError("apply_pz needs at least two angular channels")
    cl = coupling_coefficients(s.n_l)
    r = s.grid.r
    out = np.zeros_like(s.coeffs)
    for l in range(s.n_l - 1):
        ul, uu = s.coeffs[l], s.coeffs[l + 1]
        out[l + 1] += -1j * cl[l] * (_ddr(ul, s.grid.dr) - (l + 1) * ul / r)
        out[l] += -1j * cl[l] * (_ddr(uu, s.grid.dr) + (l + 1) * uu / r)
    return WaveState(s.grid, out, s.time)


_MAGIC = b"WAVS"
_VERSION = 1


def save_state(s: WaveState, path):
    """Binary dump: magic, u32 version, u32 n_l, u32 n_r, f64 dr, f64 pairs."""
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<III", _VERSION, s.n_l, s.grid.n_r))
        f.write(struct.pack("<d", s.grid.dr))
        flat = np.empty(2 * s.coeffs.size)
        flat[0::2] = s.coeffs.real.ravel()
        flat[1::2] = s.coeffs.imag.ravel()
        f.write(flat.astype("<f8").tobytes())


def load_state(path, absorber_fraction: float = 0.2, time: float = 0.0) -> WaveState:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a wave-state file")
        version, n_l, n_r = struct.unpack("<III", f.read(12))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        (dr,) = struct.unpack("<d", f.read(8))
        raw = np.frombuffer(f.read(16 * n_l * n_r), dtype="<f8")
    coeffs = (raw[0::2] + 1j * raw[1::2]).reshape(n_l, n_r)
    return WaveState(RadialGrid(dr, n_r, absorber_fraction), coeffs, time)
