"""levysde: simulation and verification toolkit for jump-driven SDEs."""

__version__ = "0.1.0"
