"""Render desk-scale figures from sptgame CSV sweep datasets.

All physics lives in the primary package; this one only reads its
documented CSV schemas and draws heatmaps, contours, curves, and error
bars.  The single physics constant here is the 7/8 classical bound drawn
as the red contour."""

from .render import CLASSICAL_BOUND, FigureJob, RenderSummary, SchemaError, render

__all__ = ["CLASSICAL_BOUND", "FigureJob", "RenderSummary", "SchemaError", "render"]
