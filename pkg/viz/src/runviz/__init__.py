"""Figure rendering for simulator run logs."""

from .csvlog import RunTable, SchemaMismatch, parse_run_csv
from .render import KINDS, FigureRequest, RenderReport, build_figure, render

__all__ = [
    "KINDS",
    "FigureRequest",
    "RenderReport",
    "RunTable",
    "SchemaMismatch",
    "build_figure",
    "parse_run_csv",
    "render",
]
