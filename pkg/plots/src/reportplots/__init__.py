"""Rendering of flexrank run artifacts: convergence figures and sweep tables."""

from reportplots.artifacts import RunArtifact, SchemaError, read_sweep, read_train_log
from reportplots.render import render_convergence, render_table

__all__ = [
    "RunArtifact",
    "SchemaError",
    "read_sweep",
    "read_train_log",
    "render_convergence",
    "render_table",
]
