"""Figures from fpme output CSVs.

The solver package writes deterministic CSV tables (kernel tabulations,
trajectory norms, sweep summaries) with documented headers; this package
turns them into the standard diagnostic figures.  It reads only those
files plus the ``meta.json`` provenance records next to them — it never
imports the solver.
"""

from .figures import (
    FIGURE_KINDS,
    GREEN_HEADER,
    SWEEP_HEADER,
    TRAJECTORY_HEADER,
    FigureSpec,
    InputFormatError,
    make_figure,
    plot_green,
    plot_monotonicity,
    plot_smoothing,
    plot_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "GREEN_HEADER",
    "SWEEP_HEADER",
    "TRAJECTORY_HEADER",
    "FigureSpec",
    "InputFormatError",
    "make_figure",
    "plot_green",
    "plot_monotonicity",
    "plot_smoothing",
    "plot_sweep",
    "__version__",
]
