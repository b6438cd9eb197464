"""Monte Carlo simulation of atom catching by a moving diodic box in 2D traps."""

__version__ = "0.1.0"
