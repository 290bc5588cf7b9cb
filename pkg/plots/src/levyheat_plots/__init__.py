"""Publication-style figures from levyheat CSV artifacts."""

__version__ = "0.1.0"

from .render import (PLOT_KINDS, PlotSpec, SchemaError, render,
                     render_growth_envelope, render_tail_ratio,
                     render_threshold_map)
