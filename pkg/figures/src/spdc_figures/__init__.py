"""Figure rendering for chirped-SPDC Schmidt-decomposition CSV output."""

from .render import KINDS, FigureJob, SchemaError, render

__all__ = ["KINDS", "FigureJob", "SchemaError", "render"]
__version__ = "0.1.0"
