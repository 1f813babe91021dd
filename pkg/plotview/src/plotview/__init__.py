"""Heatmap renderer for exported two-time correlation matrices."""

from .render import Panel, PlotSpec, load_panel, render, signed_power

__version__ = "0.1.0"

__all__ = ["Panel", "PlotSpec", "load_panel", "render", "signed_power",
           "__version__"]
