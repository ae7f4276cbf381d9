"""Offline figure generation for normdescent diagnostics CSVs."""

from .csvio import SCHEMA, SchemaError, read_run
from .panels import PANELS, PlotJob, render

__all__ = ["SCHEMA", "SchemaError", "read_run", "PANELS", "PlotJob", "render"]
