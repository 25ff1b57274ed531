"""Generator -> instructor -> editor pipeline for instruction-guided summary editing."""

__version__ = "0.1.0"
