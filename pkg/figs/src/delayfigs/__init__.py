"""Figure rendering for delaylab sweep CSVs.

This package is a pure consumer of the CSV files the ``delaylab`` CLI
writes: it never recomputes any measured or bounded quantity, it only
draws the columns.  Output is SVG by default, rendered so that the same
CSV and style always produce the same bytes; PNG is available when the
output path asks for it.
"""

__version__ = "0.1.0"

from .exceptions import FigsError, InvalidStyleError, SchemaMismatchError
from .reader import (
    REGION_COLUMNS,
    SWEEP_COLUMNS,
    RegionCurves,
    SweepTable,
    read_region_csv,
    read_sweep_csv,
)
from .render import FigureJob, FigureKind, render

__all__ = [
    "__version__",
    "FigsError",
    "FigureJob",
    "FigureKind",
    "InvalidStyleError",
    "REGION_COLUMNS",
    "RegionCurves",
    "SchemaMismatchError",
    "SWEEP_COLUMNS",
    "SweepTable",
    "read_region_csv",
    "read_sweep_csv",
    "render",
]
