"""Integer polynomial threshold functions for decision lists."""

__version__ = "0.1.0"
