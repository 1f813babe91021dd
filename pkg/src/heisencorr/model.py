"""Ionization-weighted analytic model of the driven two-time correlation.

The pulse-on correlation is approximated by dressing the field-free
autocorrelation C0 with laser-driven free motion of the ionized
fraction: with alpha(t) = c * P(t), P the cumulative ionization
probability and c one real fit constant,

    C_model(t2, t1) = C0(t2, t1)
        + P(t1) [a(t2) + t1 b(t2)] c + P(t2) [a(t1) + t2 b(t1)] c
        + P(t2) P(t1) [m_zz + t1 m_zp + t2 m_pz + t1 t2 m_pp] c^2

where a(t) = e^{i eps0 t} <z phi0 | U0(t,0) | z phi0> and
b(t) = e^{i eps0 t} <z phi0 | U0(t,0) | p_z phi0> are field-free
cross terms and the second moments are those of the initial state.
The decomposition C0 + c L + c^2 Q is kept explicit so that fitting c
against a reference matrix reduces to minimizing a quartic polynomial.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import pulse as pulse_mod
from .correlation import CorrelationMatrix, TimeGrid
from .errors import ConfigError
from .grid import (PotentialSpec, RadialGrid, apply_pz, apply_z,
                   build_ground_state)
from .oracles import SecondMoments
from .propagator import Propagator

__all__ = [
    "RateProvider",
    "IonizationProfile",
    "CrossTerms",
    "ModelDecomposition",
    "quasistatic_rate",
    "ionization_profile",
    "cross_terms",
    "assemble_model",
    "model_correlation",
]


def quasistatic_rate(e_abs):
    """Static-field tunneling rate for a hydrogenic 1s state.

    W = (4/|E|) exp(-2/(3|E|)), zero at zero field.  Any overall
    constant is absorbed by the fit parameter c, so only the temporal
    shape matters.
    """
    e_abs = np.asarray(e_abs, dtype=np.float64)
    if np.any(e_abs < 0):
        raise ValueError("field magnitude must be nonnegative")
    out = np.zeros_like(e_abs)
    nz = e_abs > 0
    with np.errstate(divide="ignore"):
        out[nz] = (4.0 / e_abs[nz]) * np.exp(-2.0 / (3.0 * e_abs[nz]))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RateProvider:
    """Instantaneous ionization rate W(t) for a given pulse.

    variant: quasistatic | yudin_ivanov | table.  The quasistatic
    provider is fully specified; yudin_ivanov is reserved for the
    nonadiabatic cycle-resolved rate, whose closed form must be
    transcribed from its original publication and is not available
    here; table interpolates externally computed rates linearly.
    """

    variant: str
    table_times: np.ndarray | None = None
    table_rates: np.ndarray | None = None

    def __post_init__(self):
        if self.variant not in ("quasistatic", "yudin_ivanov", "table"):
            raise ConfigError(f"unknown rate provider {self.variant!r}")
        if self.variant == "table":
            if self.table_times is None or self.table_rates is None:
                raise ConfigError("table rate provider needs time/rate columns")
            t = np.asarray(self.table_times, dtype=np.float64)
            w = np.asarray(self.table_rates, dtype=np.float64)
            if t.ndim != 1 or t.shape != w.shape or t.size < 2:
                raise ConfigError("rate table must be two equal-length columns")
            if not np.all(np.diff(t) > 0):
                raise ConfigError("rate table times must be strictly increasing")
            if np.any(w < 0):
                raise ConfigError("rate table contains negative rates")
            object.__setattr__(self, "table_times", t)
            object.__setattr__(self, "table_rates", w)

    @classmethod
    def quasistatic(cls) -> "RateProvider":
        return cls("quasistatic")

    @classmethod
    def from_table(cls, path) -> "RateProvider":
        data = np.loadtxt(path, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError(f"rate table {path} must have two columns")
        return cls("table", data[:, 0], data[:, 1])

    def rates(self, pls, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=np.float64)
        if self.variant == "quasistatic":
            return quasistatic_rate(np.abs(pulse_mod.electric_field(pls, times)))
        if self.variant == "table":
            if times.min() < self.table_times[0] or times.max() > self.table_times[-1]:
                raise ConfigError(
                    "requested times fall outside the rate table range "
                    f"[{self.table_times[0]}, {self.table_times[-1]}]"
                )
            return np.interp(times, self.table_times, self.table_rates)
        raise ConfigError(
            "the cycle-resolved nonadiabatic rate is not implemented: its "
            "closed form must be transcribed from the original reference; "
            "use rate=quasistatic or rate=table"
        )


@dataclass
class IonizationProfile:
    """Rate samples W(t_k) and cumulative probability P(t_k) on a TimeGrid."""

    tgrid: TimeGrid
    w: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        self.p = np.asarray(self.p, dtype=np.float64)
        n = self.tgrid.n_t
        if self.w.shape != (n,) or self.p.shape != (n,):
            raise ValueError("w and p must match the time grid length")
        if self.p[0] != 0.0:
            raise ValueError("cumulative probability must start at zero")
        if np.any(np.diff(self.p) < -1e-15):
            raise ValueError("cumulative probability must be non-decreasing")


def ionization_profile(pls, provider: RateProvider, tgrid: TimeGrid,
                       refine: int = 64) -> IonizationProfile:
    """P(t) = integral of W over [0, t], trapezoid on a refined grid.

    Each output interval is subdivided `refine` times for the
    quadrature, so the reported P values sit on quadrature nodes.
    P is not clamped: exceeding 1 only triggers a warning, because the
    model uses alpha = c P as a proportionality, not a probability.
    """
    if refine < 1:
        raise ValueError(f"refine must be >= 1, got {refine}")
    fine = np.linspace(0.0, tgrid.t_total, (tgrid.n_t - 1) * refine + 1)
    w_fine = provider.rates(pls, fine)
    p_fine = cumulative_trapezoid(w_fine, fine, initial=0.0)
    prof = IonizationProfile(tgrid, w_fine[::refine], p_fine[::refine])
    if prof.p[-1] > 1.0:
        warnings.warn(
            f"cumulative ionization probability reaches {prof.p[-1]:.3g} > 1; "
            "the rate provider is outside its perturbative regime",
            stacklevel=2,
        )
    return prof


@dataclass
class CrossTerms:
    """Field-free cross terms a(t) = <z0(t) z>, b(t) = <z0(t) p_z>."""

    tgrid: TimeGrid
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.complex128)
        self.b = np.asarray(self.b, dtype=np.complex128)
        n = self.tgrid.n_t
        if self.a.shape != (n,) or self.b.shape != (n,):
            raise ValueError("a and b must match the time grid length")


def cross_terms(pot: PotentialSpec, grid: RadialGrid, tgrid: TimeGrid,
                n_l: int = 17, dt: float = 0.02, initial=None,
                use_mask: bool = True) -> CrossTerms:
    """Propagate z phi0 and p_z phi0 field-free and record overlaps.

    a(t_k) = e^{i eps0 t_k} <z phi0 | U0(t_k, 0) | z phi0>
    b(t_k) = e^{i eps0 t_k} <z phi0 | U0(t_k, 0) | p_z phi0>

    with eps0 the ground-state eigenvalue on this grid (not the
    analytic value), so the phases match the propagator's spectrum.
    """
    if initial is None:
        initial = build_ground_state(grid, pot, n_l)
    phi0 = initial.state
    eps0 = initial.energy
    z_phi = apply_z(phi0)
    p_phi = apply_pz(phi0)
    bra = z_phi.coeffs

    n_sub = max(1, int(np.ceil(tgrid.spacing / dt)))
    h = tgrid.spacing / n_sub
    prop = Propagator(grid, pot, None, phi0.n_l, h, use_mask=use_mask)

    block = np.empty((phi0.n_l, grid.n_r, 2), dtype=np.complex128)
    block[:, :, 0] = z_phi.coeffs
    block[:, :, 1] = p_phi.coeffs
    a = np.empty(tgrid.n_t, dtype=np.complex128)
    b = np.empty(tgrid.n_t, dtype=np.complex128)
    times = tgrid.times
    for k in range(tgrid.n_t):
        if k > 0:
            prop.run_block(block, times[k - 1], n_sub)
        phase = np.exp(1j * eps0 * times[k])
        ov = np.einsum("lj,ljc->c", np.conj(bra), block) * grid.dr
        a[k] = phase * ov[0]
        b[k] = phase * ov[1]
    return CrossTerms(tgrid, a, b)


@dataclass
class ModelDecomposition:
    """C_model(c) = c0 + c * l_mat + c^2 * q_mat on one TimeGrid."""

    c0: CorrelationMatrix
    l_mat: np.ndarray
    q_mat: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.l_mat = np.asarray(self.l_mat, dtype=np.complex128)
        self.q_mat = np.asarray(self.q_mat, dtype=np.complex128)
        shape = self.c0.values.shape
        if self.l_mat.shape != shape or self.q_mat.shape != shape:
            raise ValueError("decomposition terms must match the c0 matrix shape")


def _same_tgrid(a: TimeGrid, b: TimeGrid):
    if a.n_t != b.n_t or abs(a.t_total - b.t_total) > 1e-12 * max(a.t_total, 1.0):
        raise ValueError(f"time grids differ: {a} vs {b}")


def assemble_model(c0: CorrelationMatrix, cross: CrossTerms,
                   prof: IonizationProfile, mom: SecondMoments) -> ModelDecomposition:
    """Build the linear and quadratic terms of the model decomposition.

    Entry (i, j) corresponds to (t2, t1) = (t_i, t_j):

        l_mat[i, j] = P(t_j) [a(t_i) + t_j b(t_i)]
                    + P(t_i) [a(t_j) + t_i b(t_j)]
        q_mat[i, j] = P(t_i) P(t_j)
                      [m_zz + t_j m_zp + t_i m_pz + t_i t_j m_pp]
    """
    _same_tgrid(c0.grid, cross.tgrid)
    _same_tgrid(c0.grid, prof.tgrid)
    t = c0.grid.times
    p = prof.p
    a = cross.a
    b = cross.b
    row = a[:, None] + t[None, :] * b[:, None]  # a(t_i) + t_j b(t_i)
    l_mat = p[None, :] * row + p[:, None] * row.T
    bilinear = (mom.m_zz + t[None, :] * mom.m_zp + t[:, None] * mom.m_pz
                + t[:, None] * t[None, :] * mom.m_pp)
    q_mat = p[:, None] * p[None, :] * bilinear
    meta = {"p_end": float(p[-1])}
    return ModelDecomposition(c0, l_mat, q_mat, meta)


def model_correlation(d: ModelDecomposition, c: float) -> CorrelationMatrix:
    """Evaluate the decomposition at one value of the fit constant c."""
    c = float(c)
    if not np.isfinite(c):
        raise ValueError(f"fit constant must be finite, got {c}")
    values = d.c0.values + c * d.l_mat + c * c * d.q_mat
    meta = dict(d.meta)
    meta["c"] = c
    return CorrelationMatrix(d.c0.kind, "model", d.c0.grid, values, meta)
