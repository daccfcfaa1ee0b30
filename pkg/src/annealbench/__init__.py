"""annealbench: stochastic local search laboratory for maximum independent set."""

__version__ = "0.1.0"
