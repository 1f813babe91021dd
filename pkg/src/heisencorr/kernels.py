"""Numba kernels for the split-step propagator.

States are propagated in blocks of shape (n_l, n_r, m): m independent
complex wavefunctions sharing one grid, with m innermost so the per-node
solves vectorize across the batch.  The kernels operate on the float64
view of the complex block, shape (n_l, n_r, 2m) with re/im interleaved:
all hot loops are then pure real multiply-adds, which the compiler
vectorizes (complex-typed loops do not).

One full step of size h is the symmetric splitting

    E(theta/2) O(theta) E(theta/2)  [atomic CN, h]  E(theta/2) O(theta) E(theta/2)

where the atomic part is the diagonal-in-l Crank-Nicolson half and the
coupling exp(-i theta p_z), theta = A(t_mid) h, is split over even (E)
and odd (O) channel pairs; each pair is advanced by an exactly unitary
Cayley step.  The pair system matrix is real, so one real 2x2 block-LDU
factorization per pair is shared by all right-hand sides, and the re/im
planes never mix inside the sweep.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "atomic_cn_factor",
    "atomic_cn_apply",
    "pair_sweep",
    "scale_channels",
    "block_inner",
]


def atomic_cn_factor(h: float, diag: np.ndarray, dr: float):
    """Prefactor the Crank-Nicolson tridiagonal solves for substep h.

    diag has shape (n_l, n_r) and holds the diagonal of each channel's
    field-free Hamiltonian; the off-diagonal is the constant -1/(2 dr^2).
    Returns the tuple of real arrays consumed by atomic_cn_apply; the
    off-diagonals of (I +- i h H / 2) are purely imaginary.
    """
    off = -0.5 / dr**2
    z = 0.5j * h
    ae = z * off  # off-diagonal of (I + i h H / 2)
    be = -z * off  # off-diagonal of (I - i h H / 2)
    ad = 1.0 + z * diag
    bd = 1.0 - z * diag
    n_l, n_r = diag.shape
    lf = np.empty((n_l, n_r), dtype=np.complex128)
    dinv = np.empty((n_l, n_r), dtype=np.complex128)
    for l in range(n_l):
        u = ad[l, 0]
        dinv[l, 0] = 1.0 / u
        lf[l, 0] = 0.0
        for j in range(1, n_r):
            lf[l, j] = ae * dinv[l, j - 1]
            u = ad[l, j] - lf[l, j] * ae
            dinv[l, j] = 1.0 / u
    return (
        bd.real.copy(), bd.imag.copy(), float(be.imag),
        lf.real.copy(), lf.imag.copy(),
        dinv.real.copy(), dinv.imag.copy(), float(ae.imag),
    )


@njit(cache=True, fastmath=True)
def atomic_cn_apply(psf, bdr, bdi, bei, lfr, lfi, dvr, dvi, aei, work):
    """In-place CN step for every channel of the block (prefactored Thomas).

    psf: float64 view (n_l, n_r, 2m); work: (n_r, 2m) float64 scratch.
    Solves (I + i h H/2) x = (I - i h H/2) psi channel by channel.
    """
    n_l, n_r, m2 = psf.shape
    m = m2 // 2
    for l in range(n_l):
        d_r = bdr[l, 0]
        d_i = bdi[l, 0]
        for k in range(m):
            pr = psf[l, 0, 2 * k]
            pi = psf[l, 0, 2 * k + 1]
            qr = psf[l, 1, 2 * k]
            qi = psf[l, 1, 2 * k + 1]
            work[0, 2 * k] = d_r * pr - d_i * pi - bei * qi
            work[0, 2 * k + 1] = d_r * pi + d_i * pr + bei * qr
        for j in range(1, n_r - 1):
            fr = lfr[l, j]
            fi = lfi[l, j]
            d_r = bdr[l, j]
            d_i = bdi[l, j]
            for k in range(m):
                pr = psf[l, j, 2 * k]
                pi = psf[l, j, 2 * k + 1]
                sr = psf[l, j - 1, 2 * k] + psf[l, j + 1, 2 * k]
                si = psf[l, j - 1, 2 * k + 1] + psf[l, j + 1, 2 * k + 1]
                rr = d_r * pr - d_i * pi - bei * si
                ri = d_r * pi + d_i * pr + bei * sr
                wr = work[j - 1, 2 * k]
                wi = work[j - 1, 2 * k + 1]
                work[j, 2 * k] = rr - (fr * wr - fi * wi)
                work[j, 2 * k + 1] = ri - (fr * wi + fi * wr)
        j = n_r - 1
        fr = lfr[l, j]
        fi = lfi[l, j]
        d_r = bdr[l, j]
        d_i = bdi[l, j]
        for k in range(m):
            pr = psf[l, j, 2 * k]
            pi = psf[l, j, 2 * k + 1]
            sr = psf[l, j - 1, 2 * k]
            si = psf[l, j - 1, 2 * k + 1]
            rr = d_r * pr - d_i * pi - bei * si
            ri = d_r * pi + d_i * pr + bei * sr
            wr = work[j - 1, 2 * k]
            wi = work[j - 1, 2 * k + 1]
            work[j, 2 * k] = rr - (fr * wr - fi * wi)
            work[j, 2 * k + 1] = ri - (fr * wi + fi * wr)
        vr = dvr[l, j]
        vi = dvi[l, j]
        for k in range(m):
            wr = work[j, 2 * k]
            wi = work[j, 2 * k + 1]
            psf[l, j, 2 * k] = vr * wr - vi * wi
            psf[l, j, 2 * k + 1] = vr * wi + vi * wr
        for j in range(n_r - 2, -1, -1):
            vr = dvr[l, j]
            vi = dvi[l, j]
            for k in range(m):
                xr = psf[l, j + 1, 2 * k]
                xi = psf[l, j + 1, 2 * k + 1]
                wr = work[j, 2 * k] + aei * xi
                wi = work[j, 2 * k + 1] - aei * xr
                psf[l, j, 2 * k] = vr * wr - vi * wi
                psf[l, j, 2 * k + 1] = vr * wi + vi * wr


@njit(cache=True, fastmath=True)
def pair_sweep(psf, parity, theta, cl, inv_r, dr, iarr, darr):
    """Cayley step exp(-i theta p_z) restricted to channel pairs.

    Pairs (l, l+1) for l = parity, parity+2, ...; unpaired channels pass
    through.  theta already contains the field and substep factors.  The
    2x2 block system is real, factored once per pair into iarr (n_r, 4)
    and shared by every column of the float view psf (n_l, n_r, 2m);
    darr (n_r, 2, 2m) float64 holds the forward sweep.
    """
    n_l, n_r, m2 = psf.shape
    for l in range(parity, n_l - 1, 2):
        w = 0.5 * theta * cl[l]
        q = w / (2.0 * dr)
        gam = float(l + 1) * w
        q2 = q * q
        # real block-Thomas factorization: store inverse pivots S_j^-1
        g = gam * inv_r[0]
        det = 1.0 + g * g
        iarr[0, 0] = 1.0 / det
        iarr[0, 1] = -g / det
        iarr[0, 2] = g / det
        iarr[0, 3] = 1.0 / det
        for j in range(1, n_r):
            g = gam * inv_r[j]
            s00 = 1.0 + q2 * iarr[j - 1, 3]
            s01 = g + q2 * iarr[j - 1, 2]
            s10 = -g + q2 * iarr[j - 1, 1]
            s11 = 1.0 + q2 * iarr[j - 1, 0]
            det = s00 * s11 - s01 * s10
            iarr[j, 0] = s11 / det
            iarr[j, 1] = -s01 / det
            iarr[j, 2] = -s10 / det
            iarr[j, 3] = s00 / det
        # forward sweep: d_j = S_j^-1 (f_j + q X d_{j-1}),  f = (I - w K) psi
        g = gam * inv_r[0]
        i00 = iarr[0, 0]
        i01 = iarr[0, 1]
        i10 = iarr[0, 2]
        i11 = iarr[0, 3]
        for k in range(m2):
            a0 = psf[l, 0, k]
            b0 = psf[l + 1, 0, k]
            fa = a0 - (q * psf[l + 1, 1, k] + g * b0)
            fb = b0 - (q * psf[l, 1, k] - g * a0)
            darr[0, 0, k] = i00 * fa + i01 * fb
            darr[0, 1, k] = i10 * fa + i11 * fb
        for j in range(1, n_r - 1):
            g = gam * inv_r[j]
            i00 = iarr[j, 0]
            i01 = iarr[j, 1]
            i10 = iarr[j, 2]
            i11 = iarr[j, 3]
            for k in range(m2):
                aj = psf[l, j, k]
                bj = psf[l + 1, j, k]
                fa = aj - (q * (psf[l + 1, j + 1, k] - psf[l + 1, j - 1, k]) + g * bj)
                fb = bj - (q * (psf[l, j + 1, k] - psf[l, j - 1, k]) - g * aj)
                za = fa + q * darr[j - 1, 1, k]
                zb = fb + q * darr[j - 1, 0, k]
                darr[j, 0, k] = i00 * za + i01 * zb
                darr[j, 1, k] = i10 * za + i11 * zb
        j = n_r - 1
        g = gam * inv_r[j]
        i00 = iarr[j, 0]
        i01 = iarr[j, 1]
        i10 = iarr[j, 2]
        i11 = iarr[j, 3]
        for k in range(m2):
            aj = psf[l, j, k]
            bj = psf[l + 1, j, k]
            fa = aj - (-q * psf[l + 1, j - 1, k] + g * bj)
            fb = bj - (-q * psf[l, j - 1, k] - g * aj)
            za = fa + q * darr[j - 1, 1, k]
            zb = fb + q * darr[j - 1, 0, k]
            darr[j, 0, k] = i00 * za + i01 * zb
            darr[j, 1, k] = i10 * za + i11 * zb
        # back substitution: x_j = d_j - q S_j^-1 X x_{j+1}
        for k in range(m2):
            psf[l, j, k] = darr[j, 0, k]
            psf[l + 1, j, k] = darr[j, 1, k]
        for j in range(n_r - 2, -1, -1):
            i00 = iarr[j, 0]
            i01 = iarr[j, 1]
            i10 = iarr[j, 2]
            i11 = iarr[j, 3]
            for k in range(m2):
                ta = q * psf[l + 1, j + 1, k]
                tb = q * psf[l, j + 1, k]
                psf[l, j, k] = darr[j, 0, k] - (i00 * ta + i01 * tb)
                psf[l + 1, j, k] = darr[j, 1, k] - (i10 * ta + i11 * tb)


@njit(cache=True, fastmath=True)
def scale_channels(psf, mask):
    """psf[l, j, :] *= mask[j] for every channel and batch column."""
    n_l, n_r, m2 = psf.shape
    for l in range(n_l):
        for j in range(n_r):
            v = mask[j]
            for k in range(m2):
                psf[l, j, k] = psf[l, j, k] * v


def block_inner(bra: np.ndarray, ket: np.ndarray, dr: float) -> np.ndarray:
    """<bra_k | ket_k> for every column k of two complex blocks."""
    return np.einsum("ljk,ljk->k", np.conj(bra), ket) * dr
