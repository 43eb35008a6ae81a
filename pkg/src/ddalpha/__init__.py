# ddalpha
# Depth-based DD-alpha classification with exact zonoid depth, the
# alpha-procedure and a reproducible simulation harness

__version__ = "0.1.0"

__all__ = ["__version__"]
