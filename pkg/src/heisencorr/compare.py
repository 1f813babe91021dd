"""Model-vs-reference scoring and one-parameter fitting of c.

Because the model is exactly quadratic in c, the squared-Frobenius
misfit against a fixed reference matrix is a quartic polynomial in c
whose coefficients are accumulated in one pass over the entries; the
minimizer is found from the cubic stationarity condition, with a
logarithmic c-scan kept as a sanity envelope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .correlation import CorrelationMatrix
from .model import ModelDecomposition, model_correlation

__all__ = [
    "FitReport",
    "frobenius_rel",
    "pattern_correlation",
    "fit_c",
    "write_fit_report",
]

_PARTS = {
    "re": lambda m: np.ascontiguousarray(m.real),
    "im": lambda m: np.ascontiguousarray(m.imag),
    "complex": lambda m: m,
}


def _check_grids(a: CorrelationMatrix, b: CorrelationMatrix):
    if a.grid.n_t != b.grid.n_t or abs(a.grid.t_total - b.grid.t_total) > \
            1e-12 * max(a.grid.t_total, 1.0):
        raise ValueError(f"time grids differ: {a.grid} vs {b.grid}")


def frobenius_rel(a: CorrelationMatrix, b: CorrelationMatrix,
                  part: str = "complex") -> float:
    """||a - b||_F / ||b||_F on the selected part (re, im or complex)."""
    if part not in _PARTS:
        raise ValueError(f"unknown part {part!r}")
    _check_grids(a, b)
    take = _PARTS[part]
    num = np.linalg.norm(take(a.values) - take(b.values))
    den = np.linalg.norm(take(b.values))
    if den == 0.0:
        raise ValueError("reference matrix part has zero Frobenius norm")
    return float(num / den)


def pattern_correlation(a: CorrelationMatrix, b: CorrelationMatrix,
                        part: str = "re") -> float:
    """Pearson correlation over all entries of the selected parts."""
    if part not in ("re", "im"):
        raise ValueError(f"unknown part {part!r}")
    _check_grids(a, b)
    x = _PARTS[part](a.values).ravel()
    y = _PARTS[part](b.values).ravel()
    x = x - x.mean()
    y = y - y.mean()
    sx = np.linalg.norm(x)
    sy = np.linalg.norm(y)
    if sx == 0.0 or sy == 0.0:
        raise ValueError(f"{part} part has zero variance; correlation undefined")
    return float(np.clip(np.dot(x, y) / (sx * sy), -1.0, 1.0))


@dataclass
class FitReport:
    """Fitted constant, objective value and companion quality metrics.

    objective is the squared Frobenius misfit on the fitted part;
    scan is an (n, 2) array of (c, objective) samples bracketing the
    search, kept as a sanity envelope for the polynomial minimizer.
    """

    c_star: float
    objective: float
    metric_table: dict
    scan: np.ndarray
    coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        self.scan = np.asarray(self.scan, dtype=np.float64)
        if self.objective < 0:
            raise ValueError("objective must be nonnegative")


def _quartic_coeffs(d0: np.ndarray, l: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Coefficients (a0..a4) of sum |d0 + c l + c^2 q|^2."""
    def dot(u, v):
        return float(np.real(np.sum(np.conj(u) * v)))
    return np.array([
        dot(d0, d0),
        2.0 * dot(d0, l),
        dot(l, l) + 2.0 * dot(d0, q),
        2.0 * dot(l, q),
        dot(q, q),
    ])


def fit_c(d: ModelDecomposition, target: CorrelationMatrix,
          objective: str = "frobenius_re") -> FitReport:
    """Minimize the squared-Frobenius misfit of the model against target.

    objective: frobenius_re fits the real parts (default — the model is
    most faithful there); frobenius_complex fits both parts jointly.
    The misfit is a quartic in c; candidate minimizers are the real
    roots of its derivative plus a logarithmic c-scan in both signs.
    """
    if objective not in ("frobenius_re", "frobenius_complex"):
        raise ValueError(f"unknown objective {objective!r}")
    _check_grids(d.c0, target)
    part = "re" if objective == "frobenius_re" else "complex"
    take = _PARTS[part]
    d0 = take(d.c0.values - target.values)
    l = take(d.l_mat)
    q = take(d.q_mat)
    if np.all(l == 0) and np.all(q == 0):
        raise ValueError("nothing to fit: model has no field-dependent terms")
    a = _quartic_coeffs(d0, l, q)

    def poly(c):
        return a[0] + c * (a[1] + c * (a[2] + c * (a[3] + c * a[4])))

    deriv = np.array([4.0 * a[4], 3.0 * a[3], 2.0 * a[2], a[1]])
    if np.all(deriv == 0):
        raise ValueError("nothing to fit: objective is constant in c")
    roots = np.roots(np.trim_zeros(deriv, "f"))
    candidates = [float(r.real) for r in roots
                  if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real))]
    ladder = np.concatenate([[0.0], np.logspace(-6, 6, 49),
                             -np.logspace(-6, 6, 49)])
    scan = np.column_stack([ladder, poly(ladder)])
    candidates.extend(ladder.tolist())
    c_star = min(candidates, key=poly)
    obj = float(poly(c_star))

    fitted = model_correlation(d, c_star)
    metrics = {
        "frobenius_rel_re": frobenius_rel(fitted, target, "re"),
        "frobenius_rel_complex": frobenius_rel(fitted, target, "complex"),
        "pattern_corr_re": pattern_correlation(fitted, target, "re"),
    }
    try:
        metrics["pattern_corr_im"] = pattern_correlation(fitted, target, "im")
    except ValueError:
        metrics["pattern_corr_im"] = float("nan")
    return FitReport(float(c_star), obj, metrics, scan, a)


def write_fit_report(report: FitReport, path):
    """Serialize a FitReport as a flat JSON text file."""
    payload = {
        "c_star": report.c_star,
        "objective": report.objective,
        "quartic_coeffs": list(report.coeffs),
        "scan_c": report.scan[:, 0].tolist(),
        "scan_objective": report.scan[:, 1].tolist(),
    }
    payload.update(report.metric_table)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
