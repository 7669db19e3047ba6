"""Figure generation for bench CSV convergence traces."""

__version__ = "0.1.0"

from .figure import FigureSpec, downsample, plot_figure
from .reader import CSV_HEADER, TraceData, TraceFormatError, read_trace
