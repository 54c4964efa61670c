"""Figure rendering for stored market-simulation run directories."""

__version__ = "0.1.0"

from .render import FigureError, PlotSpec, build_figure, render

__all__ = ["FigureError", "PlotSpec", "build_figure", "render"]
