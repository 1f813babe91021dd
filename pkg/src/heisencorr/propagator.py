"""Split-step Crank-Nicolson propagator for batches of wavefunctions.

A Propagator is bound to one grid, potential, pulse and substep h; it
advances blocks of shape (n_l, n_r, m) in place.  The A(t)^2/2 term of
the velocity-gauge Hamiltonian is a pure global phase and is dropped:
every quantity this package computes is an inner product between states
carrying identical accumulated phase, so it cancels identically.
"""

from __future__ import annotations

import numpy as np

from . import kernels, pulse as pulse_mod
from .errors import NumericalError
from .grid import PotentialSpec, RadialGrid, WaveState, coupling_coefficients

__all__ = ["Propagator", "propagate"]


class Propagator:
    """Fixed-substep stepper; reusable across many states on one setup."""

    def __init__(self, grid: RadialGrid, pot: PotentialSpec, pls, n_l: int,
                 h: float, use_mask: bool = True):
        if n_l < 1:
            raise ValueError(f"n_l must be >= 1, got {n_l}")
        if h == 0.0:
            raise ValueError("substep h must be nonzero")
        self.grid = grid
        self.pot = pot
        self.pulse = pls
        self.n_l = n_l
        self.h = float(h)
        self.use_mask = use_mask

        r = grid.r
        l = np.arange(n_l)[:, None]
        diag = 1.0 / grid.dr**2 + l * (l + 1) / (2.0 * r[None, :] ** 2) \
            + pot.values(r)[None, :]
        self._atomic = kernels.atomic_cn_factor(self.h, diag, grid.dr)
        self._cl = coupling_coefficients(n_l)
        self._inv_r = 1.0 / r
        self._mask = grid.mask() if use_mask else None
        self._iarr = np.empty((grid.n_r, 4))
        self._darr = None
        self._work = None

    def _scratch(self, m2: int):
        if self._darr is None or self._darr.shape[2] != m2:
            self._darr = np.empty((self.grid.n_r, 2, m2))
            self._work = np.empty((self.grid.n_r, m2))
        return self._darr, self._work

    def step_block(self, psi: np.ndarray, t: float):
        """One Strang step of size h starting at time t, in place.

        psi must be a C-contiguous complex128 block (n_l, n_r, m); the
        kernels run on its real-valued view.
        """
        n_l, n_r, m = psi.shape
        psf = psi.view(np.float64).reshape(n_l, n_r, 2 * m)
        darr, work = self._scratch(2 * m)
        theta = 0.0
        if self.pulse is not None and self.pulse.e0 != 0.0:
            theta = pulse_mod.vector_potential(self.pulse, t + 0.5 * self.h) * self.h
        if theta != 0.0 and self.n_l > 1:
            self._coupling(psf, 0.5 * theta, darr)
        kernels.atomic_cn_apply(psf, *self._atomic, work)
        if theta != 0.0 and self.n_l > 1:
            self._coupling(psf, 0.5 * theta, darr)
        if self._mask is not None:
            kernels.scale_channels(psf, self._mask)

    def _coupling(self, psf, theta, darr):
        """Half of the coupling step: even(theta/2) odd(theta) even(theta/2)."""
        kernels.pair_sweep(psf, 0, 0.5 * theta, self._cl, self._inv_r,
                           self.grid.dr, self._iarr, darr)
        kernels.pair_sweep(psf, 1, theta, self._cl, self._inv_r,
                           self.grid.dr, self._iarr, darr)
        kernels.pair_sweep(psf, 0, 0.5 * theta, self._cl, self._inv_r,
                           self.grid.dr, self._iarr, darr)

    def run_block(self, psi: np.ndarray, t0: float, n_steps: int):
        """Advance a block by n_steps substeps starting at t0."""
        for i in range(n_steps):
            self.step_block(psi, t0 + i * self.h)


def propagate(state: WaveState, pot: PotentialSpec, pls, t_end: float,
              dt: float = 0.02, use_mask: bool = True) -> WaveState:
    """Propagate a single state forward from state.time to t_end.

    The actual substep is t span divided into ceil(span/dt) equal pieces.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    span = t_end - state.time
    if span < 0:
        raise ValueError(
            f"cannot propagate backwards: t_end={t_end} < state.time={state.time}"
        )
    if span == 0:
        return state.copy()
    n_steps = int(np.ceil(span / dt))
    h = span / n_steps
    prop = Propagator(state.grid, pot, pls, state.n_l, h, use_mask=use_mask)
    psi = state.coeffs[:, :, None].copy()  # never mutate the input state
    prop.run_block(psi, state.time, n_steps)
    out = WaveState(state.grid, psi[:, :, 0].copy(), t_end)
    if not np.all(np.isfinite(out.coeffs)):
        raise NumericalError("propagation produced non-finite amplitudes")
    return out
