"""Two-time correlation matrices from checkpoint-and-repropagate TDSE runs.

C(t2, t1) = <U(t2,0) phi0 | Q U(t2,t1) Q | U(t1,0) phi0> - Qbar(t2) Qbar(t1)

computed with one marching pass: the base state and every already-created
row Q Psi(t_j) advance together in one batched block; at each checkpoint
t_i the block is dotted against Q Psi(t_i) (filling column t1 = t_j of
row t2 = t_i) and a new row is appended.  The t2 < t1 triangle follows
from conjugate symmetry (Q Hermitian), optionally verified directly by
adjoint backward propagation.
"""

from __future__ import annotations

import concurrent.futures
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import pulse as pulse_mod
from .errors import NumericalError
from .grid import (PotentialSpec, RadialGrid, WaveState, build_ground_state,
                   coupling_coefficients)
from .propagator import Propagator

__all__ = [
    "TimeGrid",
    "CorrelationMatrix",
    "MeanTrajectory",
    "mean_trajectory",
    "correlation_tdse",
    "velocity_from_zz",
    "signed_power",
    "write_correlation",
    "read_correlation",
    "write_correlation_binary",
    "read_correlation_binary",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output times t_k = k * t_total / (n_t - 1), k = 0 .. n_t-1."""

    n_t: int
    t_total: float

    def __post_init__(self):
        if self.n_t < 2:
            raise ValueError(f"n_t must be >= 2, got {self.n_t}")
        if self.t_total <= 0:
            raise ValueError(f"t_total must be > 0, got {self.t_total}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_total, self.n_t)

    @property
    def spacing(self) -> float:
        return self.t_total / (self.n_t - 1)


@dataclass
class CorrelationMatrix:
    """kind: zz|vv; source: tdse|model|free|oracle; entry (i,j) = C(t2=t_i, t1=t_j)."""

    kind: str
    source: str
    grid: TimeGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("zz", "vv"):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        if self.source not in ("tdse", "model", "free", "oracle"):
            raise ValueError(f"unknown correlation source {self.source!r}")
        self.values = np.asarray(self.values, dtype=np.complex128)
        n = self.grid.n_t
        if self.values.shape != (n, n):
            raise ValueError(
                f"values must have shape ({n}, {n}), got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("correlation matrix contains non-finite entries")


@dataclass
class MeanTrajectory:
    """Qbar(t_k) over the TimeGrid; physically real, stored complex."""

    grid: TimeGrid
    q_bar: np.ndarray

    def __post_init__(self):
        self.q_bar = np.asarray(self.q_bar, dtype=np.complex128)
        if self.q_bar.shape != (self.grid.n_t,):
            raise ValueError("q_bar length must match the time grid")
        tol = 1e-8 * np.max(np.abs(self.q_bar)) + 1e-12
        if np.max(np.abs(self.q_bar.imag)) > tol:
            raise NumericalError(
                "mean trajectory acquired a non-negligible imaginary part"
            )


def _apply_q(coeffs: np.ndarray, grid: RadialGrid, operator: str, a_t: float):
    """Q acting on raw partial-wave coefficients; Q = z or p_z + A(t)."""
    n_l = coeffs.shape[0]
    cl = coupling_coefficients(n_l)
    r = grid.r
    out = np.zeros_like(coeffs)
    if operator == "z":
        for l in range(n_l - 1):
            out[l + 1] += cl[l] * r * coeffs[l]
            out[l] += cl[l] * r * coeffs[l + 1]
    elif operator == "v_z":
        inv2dr = 0.5 / grid.dr
        for l in range(n_l - 1):
            ul, uu = coeffs[l], coeffs[l + 1]
            dl = np.zeros_like(ul)
            dl[:-1] += ul[1:] * inv2dr
            dl[1:] -= ul[:-1] * inv2dr
            du = np.zeros_like(uu)
            du[:-1] += uu[1:] * inv2dr
            du[1:] -= uu[:-1] * inv2dr
            out[l + 1] += -1j * cl[l] * (dl - (l + 1) * ul / r)
            out[l] += -1j * cl[l] * (du + (l + 1) * uu / r)
        out += a_t * coeffs
    else:
        raise ValueError(f"unknown operator {operator!r}")
    return out


def _resolve_initial(pot, grid, n_l, initial):
    if initial is not None:
        if initial.grid != grid or initial.n_l != n_l:
            raise ValueError("initial state does not match the requested grid")
        return initial.copy()
    return build_ground_state(grid, pot, n_l).state


def _march(pot, pls, grid, tgrid, operator, n_l, dt, initial, use_mask, rows):
    """One marching pass computing C[i, j] for j in rows, j <= i, plus means.

    Returns (partial C, mean array, final base norm).  Column 0 of the
    block is the base state; rows are appended as they are created.
    """
    times = tgrid.times
    n_t = tgrid.n_t
    n_sub = int(np.ceil(tgrid.spacing / dt))
    h = tgrid.spacing / n_sub
    a_of = (lambda t: pulse_mod.vector_potential(pls, t)) if pls is not None else (lambda t: 0.0)

    base = _resolve_initial(pot, grid, n_l, initial)
    prop = Propagator(grid, pot, pls, n_l, h, use_mask=use_mask)

    rows = sorted(rows)
    block = np.zeros((n_l, grid.n_r, 1 + len(rows)), dtype=np.complex128)
    block[:, :, 0] = base.coeffs
    col_of = {}
    next_col = 1

    cmat = np.zeros((n_t, n_t), dtype=np.complex128)
    mean = np.zeros(n_t, dtype=np.complex128)

    for i in range(n_t):
        q_base = _apply_q(block[:, :, 0], grid, operator, a_of(times[i]))
        mean[i] = np.sum(np.conj(block[:, :, 0]) * q_base) * grid.dr
        if col_of:
            active = sorted(col_of)
            cols = [col_of[j] for j in active]
            cmat[i, active] = np.einsum(
                "lj,ljc->c", np.conj(q_base), block[:, :, cols]) * grid.dr
        if i in rows and i not in col_of:
            block[:, :, next_col] = q_base
            col_of[i] = next_col
            next_col += 1
            # diagonal entry: <Q psi | Q psi> at creation time
            cmat[i, i] = np.sum(np.abs(q_base) ** 2) * grid.dr
        if i < n_t - 1:
            prop.run_block(block[:, :, :next_col], times[i], n_sub)

    base_norm = float(np.sqrt(np.sum(np.abs(block[:, :, 0]) ** 2) * grid.dr))
    return cmat, mean, base_norm


def _march_task(args):
    return _march(*args)


def mean_trajectory(pot, pls, grid, tgrid, n_l=17, dt=0.02, initial=None,
                    use_mask=True, operator="z") -> MeanTrajectory:
    """Qbar(t_k) from a single forward propagation with checkpoints."""
    _, mean, _ = _march(pot, pls, grid, tgrid, operator, n_l, dt, initial,
                        use_mask, rows=[])
    return MeanTrajectory(tgrid, mean)


def correlation_tdse(pot, pls, grid, tgrid, operator="z", n_l=17, dt=0.02,
                     initial=None, use_mask=True, norm_loss_max=0.2,
                     jobs=1, both_triangles=False) -> CorrelationMatrix:
    """Ab initio two-time correlation matrix (kind zz for z, vv for v_z).

    jobs > 1 distributes t1-rows over worker processes; row interleaving
    makes the arithmetic per row identical for any job count, so results
    are exactly reproducible.  both_triangles=True recomputes t2 < t1 by
    adjoint backward propagation instead of conjugate reflection (slow;
    meant for small grids).
    """
    if operator not in ("z", "v_z"):
        raise ValueError(f"unknown operator {operator!r}")
    if n_l < 2:
        raise ValueError(f"correlation needs l_max >= 1, got n_l={n_l}")
    n_t = tgrid.n_t
    all_rows = list(range(n_t))

    if jobs > 1:
        chunks = [all_rows[k::jobs] for k in range(jobs)]
        args = [(pot, pls, grid, tgrid, operator, n_l, dt, initial, use_mask, ch)
                for ch in chunks]
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_march_task, args))
        cmat = np.zeros((n_t, n_t), dtype=np.complex128)
        for (part, mean, base_norm), ch in zip(parts, chunks):
            cmat[:, ch] = part[:, ch]
        mean = parts[0][1]
        base_norm = parts[0][2]
    else:
        cmat, mean, base_norm = _march(pot, pls, grid, tgrid, operator, n_l,
                                       dt, initial, use_mask, all_rows)

    norm_loss = 1.0 - base_norm**2
    if norm_loss > norm_loss_max:
        raise NumericalError(
            f"absorber removed {norm_loss:.3f} of the norm during the base "
            f"propagation (threshold {norm_loss_max}); result untrustworthy"
        )
    MeanTrajectory(tgrid, mean)  # enforces the real-mean invariant

    if both_triangles:
        upper = _upper_triangle_direct(pot, pls, grid, tgrid, operator, n_l,
                                       dt, initial, use_mask)
        iu, ju = np.triu_indices(n_t, 1)
        cmat[iu, ju] = upper[iu, ju]
    else:
        iu, ju = np.triu_indices(n_t, 1)
        cmat[iu, ju] = np.conj(cmat[ju, iu])

    cmat -= np.outer(mean, mean)
    meta = {
        "operator": operator,
        "dt": dt,
        "n_l": n_l,
        "grid": {"dr": grid.dr, "n_r": grid.n_r,
                 "absorber_fraction": grid.absorber_fraction},
        "absorber_loss": norm_loss,
        "both_triangles": bool(both_triangles),
    }
    return CorrelationMatrix("zz" if operator == "z" else "vv", "tdse", tgrid,
                             cmat, meta)


def _upper_triangle_direct(pot, pls, grid, tgrid, operator, n_l, dt, initial,
                           use_mask):
    """C(t2, t1) for t2 < t1 by propagating Q Psi(t1) backward to t2.

    The backward stepper is the exact adjoint of the forward one (mask
    applied before each reversed substep), so up to roundoff this must
    reproduce the conjugate of the lower triangle.
    """
    times = tgrid.times
    n_t = tgrid.n_t
    n_sub = int(np.ceil(tgrid.spacing / dt))
    h = tgrid.spacing / n_sub
    a_of = (lambda t: pulse_mod.vector_potential(pls, t)) if pls is not None else (lambda t: 0.0)

    base = _resolve_initial(pot, grid, n_l, initial)
    fwd = Propagator(grid, pot, pls, n_l, h, use_mask=use_mask)
    bwd = Propagator(grid, pot, pls, n_l, -h, use_mask=False)
    mask = grid.mask() if use_mask else None

    # forward pass: checkpoint Psi(t_k) and Q Psi(t_k)
    checkpoints = []
    q_rows = []
    cur = np.ascontiguousarray(base.coeffs[:, :, None])
    for i in range(n_t):
        checkpoints.append(cur[:, :, 0].copy())
        q_rows.append(_apply_q(cur[:, :, 0], grid, operator, a_of(times[i])))
        if i < n_t - 1:
            fwd.run_block(cur, times[i], n_sub)

    cmat = np.zeros((n_t, n_t), dtype=np.complex128)
    for j in range(1, n_t):
        blk = q_rows[j][:, :, None].copy()  # keep q_rows[j] intact
        for i in range(j - 1, -1, -1):
            # adjoint of (mask . step)^n: reversed substeps, mask first
            for s in range(n_sub):
                if mask is not None:
                    blk *= mask[None, :, None]
                t_sub = times[i + 1] - s * h
                bwd.step_block(blk, t_sub)
            cmat[i, j] = np.sum(np.conj(q_rows[i]) * blk[:, :, 0]) * grid.dr
    return cmat


def velocity_from_zz(c: CorrelationMatrix) -> CorrelationMatrix:
    """C_vv as the mixed second difference of C_zz on the same grid.

    Centered 2nd-order stencils inside, one-sided 2nd-order on the edges;
    edge rows/columns are flagged lower-accuracy in the metadata.
    """
    if c.kind != "zz":
        raise ValueError("velocity_from_zz expects a zz correlation matrix")
    n = c.grid.n_t
    if n < 5:
        raise ValueError(f"differentiation stencil needs n_t >= 5, got {n}")
    hstep = c.grid.spacing
    d = np.zeros((n, n))
    d[0, 0:3] = [-1.5, 2.0, -0.5]
    d[n - 1, n - 3:n] = [0.5, -2.0, 1.5]
    for i in range(1, n - 1):
        d[i, i - 1] = -0.5
        d[i, i + 1] = 0.5
    d /= hstep
    vals = d @ c.values @ d.T
    meta = dict(c.meta)
    meta["derived_from"] = "zz mixed second difference"
    meta["edge_rows_lower_accuracy"] = [0, n - 1]
    return CorrelationMatrix("vv", c.source, c.grid, vals, meta)


def signed_power(x, power: float = 0.2):
    """Sign-preserving fractional power sign(x)|x|^power (odd, monotone)."""
    if power <= 0:
        raise ValueError(f"power must be > 0, got {power}")
    x = np.asarray(x)
    return np.sign(x) * np.abs(x) ** power


# ---------------------------------------------------------------------------
# export / import

_FMT = "%.17g"
_CGRD_MAGIC = b"CGRD"
_CGRD_VERSION = 1


def write_correlation(c: CorrelationMatrix, stem, version: str = "0"):
    """Write <stem>.re.csv, <stem>.im.csv and <stem>.meta.json (bit-exact)."""
    stem = str(stem)
    np.savetxt(stem + ".re.csv", c.values.real, fmt=_FMT, delimiter=",")
    np.savetxt(stem + ".im.csv", c.values.imag, fmt=_FMT, delimiter=",")
    meta = {
        "kind": c.kind,
        "source": c.source,
        "grid": {"n_t": c.grid.n_t, "t_total": c.grid.t_total,
                 "times": list(c.grid.times)},
        "meta": _jsonable(c.meta),
        "version": version,
    }
    with open(stem + ".meta.json", "w") as f:
        json.dump(meta, f, indent=1)
        f.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def read_correlation(stem) -> CorrelationMatrix:
    stem = str(stem)
    re = np.atleast_2d(np.loadtxt(stem + ".re.csv", delimiter=","))
    im = np.atleast_2d(np.loadtxt(stem + ".im.csv", delimiter=","))
    if re.shape != im.shape:
        raise ValueError(f"{stem}: re/im matrix shapes differ")
    with open(stem + ".meta.json") as f:
        meta = json.load(f)
    tgrid = TimeGrid(meta["grid"]["n_t"], meta["grid"]["t_total"])
    return CorrelationMatrix(meta["kind"], meta["source"], tgrid, re + 1j * im,
                             meta.get("meta", {}))


def write_correlation_binary(c: CorrelationMatrix, path):
    with open(path, "wb") as f:
        f.write(_CGRD_MAGIC)
        f.write(struct.pack("<II", _CGRD_VERSION, c.grid.n_t))
        f.write(c.grid.times.astype("<f8").tobytes())
        flat = np.empty(2 * c.values.size)
        flat[0::2] = c.values.real.ravel()
        flat[1::2] = c.values.imag.ravel()
        f.write(flat.astype("<f8").tobytes())


def read_correlation_binary(path, kind="zz", source="tdse") -> CorrelationMatrix:
    with open(path, "rb") as f:
        if f.read(4) != _CGRD_MAGIC:
            raise ValueError(f"{path}: not a correlation grid file")
        version, n_t = struct.unpack("<II", f.read(8))
        if version != _CGRD_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        times = np.frombuffer(f.read(8 * n_t), dtype="<f8")
        raw = np.frombuffer(f.read(16 * n_t * n_t), dtype="<f8")
    vals = (raw[0::2] + 1j * raw[1::2]).reshape(n_t, n_t)
    return CorrelationMatrix(kind, source, TimeGrid(n_t, float(times[-1])), vals)
