"""Figure rendering for zfsim result CSVs."""

from .csvio import ResultData, SchemaMismatch, clean_series, read_result_csv
from .render import FIGURE_KINDS, FigureSpec, render

__version__ = "0.1.0"
