"""dptrack - differentially private gradient-tracking optimization, simulated and bounded."""

__version__ = "0.3.0"
