"""Closed-form laser pulse quantities.

The pulse is linearly polarized along z and defined through its vector
potential

    A(t) = -(E0/omega) * sin^2(pi t / T1) * sin(omega t),   0 <= t <= T1,

with T1 = n_cycles * 2 pi / omega, and A = 0 outside [0, T1].  All
quantities are in atomic units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PulseParams",
    "vector_potential",
    "electric_field",
    "excursion_integral",
    "a_squared_integral",
    "keldysh_gamma",
]


@dataclass(frozen=True)
class PulseParams:
    """Peak field e0, carrier frequency omega, cycle count n_cycles (a.u.)."""

    e0: float
    omega: float
    n_cycles: float = 1.0

    def __post_init__(self):
        if self.e0 < 0:
            raise ValueError(f"peak field must be >= 0, got {self.e0}")
        if self.omega <= 0:
            raise ValueError(f"carrier frequency must be > 0, got {self.omega}")
        if self.n_cycles <= 0:
            raise ValueError(f"cycle count must be > 0, got {self.n_cycles}")

    @property
    def cycle(self) -> float:
        """Optical cycle T = 2 pi / omega."""
        return 2.0 * np.pi / self.omega

    @property
    def duration(self) -> float:
        """Total pulse duration T1 = n_cycles * T."""
        return self.n_cycles * self.cycle


def vector_potential(p: PulseParams, t):
    """z-component of A(t); zero outside the pulse support [0, T1]."""
    t = np.asarray(t, dtype=float)
    t1 = p.duration
    inside = (t >= 0.0) & (t <= t1)
    ts = np.where(inside, t, 0.0)
    a = -(p.e0 / p.omega) * np.sin(np.pi * ts / t1) ** 2 * np.sin(p.omega * ts)
    a = np.where(inside, a, 0.0)
    return a if a.ndim else float(a)


def electric_field(p: PulseParams, t):
    """E(t) = -dA/dt, evaluated analytically; zero outside [0, T1]."""
    t = np.asarray(t, dtype=float)
    t1 = p.duration
    b = 2.0 * np.pi / t1  # envelope angular frequency
    inside = (t >= 0.0) & (t <= t1)
    ts = np.where(inside, t, 0.0)
    env = np.sin(0.5 * b * ts) ** 2
    denv = 0.5 * b * np.sin(b * ts)
    e = (p.e0 / p.omega) * (
        denv * np.sin(p.omega * ts) + p.omega * env * np.cos(p.omega * ts)
    )
    e = np.where(inside, e, 0.0)
    return e if e.ndim else float(e)


def _halfwave(x):
    # 1 - cos(x) written without cancellation
    return 2.0 * np.sin(0.5 * x) ** 2


def excursion_integral(p: PulseParams, t):
    """int_0^t A(tau) dtau by closed form.  Requires t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("excursion integral requires t >= 0")
    t1 = p.duration
    b = 2.0 * np.pi / t1
    w = p.omega
    tc = np.minimum(t, t1)  # A vanishes beyond T1, integral saturates

    # J = int sin^2(b tau / 2) sin(w tau) dtau
    #   = (1/2) int sin(w tau) - (1/2) int cos(b tau) sin(w tau)
    j = 0.5 * _halfwave(w * tc) / w
    if abs(w - b) < 1e-14 * w:
        # one-cycle pulse: envelope and carrier frequencies coincide
        j -= 0.25 * np.sin(w * tc) ** 2 / w
    else:
        j -= 0.25 * (_halfwave((w + b) * tc) / (w + b) + _halfwave((w - b) * tc) / (w - b))
    out = -(p.e0 / w) * j
    return out if out.ndim else float(out)


def a_squared_integral(p: PulseParams, t_a: float, t_b: float) -> float:
    """int_{t_a}^{t_b} A(tau)^2 / 2 dtau (global-phase accumulator).

    Evaluated by fixed-order Gauss-Legendre panels, absolute accuracy well
    below 1e-10 for the smooth sin^2 pulse at panel width ~ one cycle.
    """
    if t_b < t_a:
        raise ValueError("t_b must be >= t_a")
    lo = max(t_a, 0.0)
    hi = min(t_b, p.duration)
    if p.e0 == 0.0 or hi <= lo:
        return 0.0
    n_panels = max(4, int(np.ceil((hi - lo) / p.cycle * 8)))
    x, wts = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    tt = mid[:, None] + half[:, None] * x[None, :]
    vals = vector_potential(p, tt) ** 2
    return float(0.5 * np.sum(half[:, None] * wts[None, :] * vals))


def keldysh_gamma(p: PulseParams, ip: float) -> float:
    """Keldysh parameter omega * sqrt(2 Ip) / E0."""
    if p.e0 <= 0:
        raise ValueError("Keldysh parameter is undefined for zero peak field")
    if ip <= 0:
        raise ValueError(f"ionization potential must be > 0, got {ip}")
    return p.omega * np.sqrt(2.0 * ip) / p.e0
