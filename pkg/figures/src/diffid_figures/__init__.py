"""Figure rendering for diffid CSV artifacts."""

from .render import (EXPECTED_KIND, Artifact, FigureError, FigureSpec,
                     read_artifact, render, render_figure)

__version__ = "1.0.0"

__all__ = ["Artifact", "EXPECTED_KIND", "FigureError", "FigureSpec",
           "read_artifact", "render", "render_figure"]
