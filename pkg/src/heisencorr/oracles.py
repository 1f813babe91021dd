"""Closed-form reference correlations used by tests and the acceptance suite.

These deliberately share no code with the grid machinery: they are the
independent targets the numerical pipeline is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SecondMoments", "hydrogen_1s_moments", "volkov_zz", "ho_zz"]


@dataclass(frozen=True)
class SecondMoments:
    """Ground-state second moments <z^2>, <z p_z>, <p_z z>, <p_z^2>."""

    m_zz: complex
    m_zp: complex
    m_pz: complex
    m_pp: complex

    def __post_init__(self):
        if not (self.m_zz.real > 0 and abs(self.m_zz.imag) < 1e-12):
            raise ValueError("<z^2> must be real positive")
        if not (self.m_pp.real > 0 and abs(self.m_pp.imag) < 1e-12):
            raise ValueError("<p_z^2> must be real positive")
        if abs(self.m_zp - np.conj(self.m_pz)) > 1e-12:
            raise ValueError("<z p_z> must equal conj(<p_z z>)")
        if abs((self.m_zp - self.m_pz) - 1j) > 1e-12:
            raise ValueError("canonical commutator requires <z p_z> - <p_z z> = i")


def hydrogen_1s_moments() -> SecondMoments:
    """Moments of the hydrogen 1s state: (1, i/2, -i/2, 1/3)."""
    return SecondMoments(1.0 + 0j, 0.5j, -0.5j, 1.0 / 3.0 + 0j)


def volkov_zz(mom: SecondMoments, t1, t2):
    """Free-electron (Volkov) coordinate correlation <z_V(t2) z_V(t1)>.

    The c-number excursion terms cancel against the mean product, leaving
    the bilinear form m_zz + t1 m_zp + t2 m_pz + t1 t2 m_pp.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    out = mom.m_zz + t1 * mom.m_zp + t2 * mom.m_pz + t1 * t2 * mom.m_pp
    return out if out.ndim else complex(out)


def ho_zz(omega_ho: float, t1, t2):
    """Ground-state correlation of a 3-D harmonic oscillator along z.

    <z(t2) z(t1)> = exp(-i Omega (t2 - t1)) / (2 Omega).
    """
    if omega_ho <= 0:
        raise ValueError(f"oscillator frequency must be > 0, got {omega_ho}")
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    out = np.exp(-1j * omega_ho * (t2 - t1)) / (2.0 * omega_ho)
    return out if out.ndim else complex(out)
