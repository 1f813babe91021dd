"""Heatmap rendering for exported two-time correlation matrices.

Input contract (produced by the simulator, consumed here verbatim):
for a stem S there are three files,

  S.re.csv    real part, one CSV row per t2 sample, columns over t1
  S.im.csv    imaginary part, same shape
  S.meta.json {"kind": ..., "source": ..., "grid": {"n_t", "t_total",
               "times"}, "meta": {...}, "version": ...}

Rendering is read-only and writes a single raster image with one panel
per stem.  Panels placed side by side share one color scale so their
magnitudes are directly comparable.  Values can be passed through the
sign-preserving display transform s(x) = sign(x) |x|^power with
power in (0, 1]; power = 1 is the identity (honest scale) and 0.2 is
the conventional choice that lifts low-amplitude structure without
moving any zero crossing.
"""

import json
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def signed_power(x, power=1.0):
    """Odd monotone display transform sign(x) |x|^power, power in (0, 1]."""
    if not 0.0 < power <= 1.0:
        raise ValueError(f"power must be in (0, 1], got {power}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** power


@dataclass(frozen=True)
class Panel:
    """One loaded matrix: complex values plus the labeling metadata."""

    values: np.ndarray
    kind: str
    source: str
    times: np.ndarray
    t_total: float
    e0: float | None
    omega: float | None

    def label(self) -> str:
        # labels come from the meta file, never from the filename
        name = {"zz": "C_zz", "vv": "C_vv"}.get(self.kind, self.kind)
        tag = f"{name}  {self.source}"
        if self.e0 is not None:
            tag += f"  E0={self.e0:g}"
        return tag


def load_panel(stem) -> Panel:
    """Read S.re.csv + S.im.csv + S.meta.json for a stem S."""
    stem = str(stem)
    re = np.atleast_2d(np.loadtxt(stem + ".re.csv", delimiter=","))
    im = np.atleast_2d(np.loadtxt(stem + ".im.csv", delimiter=","))
    if re.shape != im.shape:
        raise ValueError(
            f"{stem}: re/im shapes differ ({re.shape} vs {im.shape})")
    try:
        with open(stem + ".meta.json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"{stem}: missing meta file "
                                f"{stem}.meta.json") from None
    grid = meta["grid"]
    times = np.asarray(grid["times"], dtype=float)
    if re.shape != (grid["n_t"], grid["n_t"]):
        raise ValueError(f"{stem}: matrix shape {re.shape} does not match "
                         f"meta n_t = {grid['n_t']}")
    extra = meta.get("meta", {})
    e0 = extra.get("e0")
    omega = extra.get("omega")
    return Panel(re + 1j * im, meta.get("kind", "zz"),
                 meta.get("source", "?"), times, float(grid["t_total"]),
                 None if e0 is None else float(e0),
                 None if omega is None else float(omega))


@dataclass(frozen=True)
class PlotSpec:
    stems: tuple
    part: str = "re"
    power: float = 1.0
    out: str = "fig.png"
    cmap: str = "RdBu_r"

    def __post_init__(self):
        if not self.stems:
            raise ValueError("at least one input stem is required")
        if self.part not in ("re", "im"):
            raise ValueError(f"part must be 're' or 'im', got {self.part!r}")
        if not 0.0 < self.power <= 1.0:
            raise ValueError(f"power must be in (0, 1], got {self.power}")


def _part(panel: Panel, part: str) -> np.ndarray:
    return panel.values.real if part == "re" else panel.values.imag


def render(spec: PlotSpec) -> str:
    """Render one shared-scale heatmap panel per stem; returns spec.out."""
    panels = [load_panel(s) for s in spec.stems]
    displays = [signed_power(_part(p, spec.part), spec.power) for p in panels]
    vmin = min(float(np.min(d)) for d in displays)
    vmax = max(float(np.max(d)) for d in displays)

    n = len(panels)
    fig, axes = plt.subplots(1, n, figsize=(4.2 * n + 1.2, 4.0),
                             squeeze=False, constrained_layout=True)
    image = None
    for ax, panel, disp in zip(axes[0], panels, displays):
        # time axes in units of the optical period T = 2 pi / omega when
        # the pulse frequency is recorded, else of the grid span
        t_norm = 2 * np.pi / panel.omega if panel.omega else panel.t_total
        lo, hi = panel.times[0] / t_norm, panel.times[-1] / t_norm
        image = ax.imshow(disp, origin="lower", extent=(lo, hi, lo, hi),
                          vmin=vmin, vmax=vmax, cmap=spec.cmap)
        ax.set_xlabel(r"$t_1/T$")
        ax.set_ylabel(r"$t_2/T$")
        ax.set_title(panel.label())
    part_name = {"re": "Re", "im": "Im"}[spec.part]
    bar_label = part_name if spec.power == 1.0 else \
        f"sign({part_name})|{part_name}|^{spec.power:g}"
    fig.colorbar(image, ax=axes[0], label=bar_label, shrink=0.85)
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return spec.out
