"""Event-ready Bell-pair model: detection probabilities, CH and Hardy tests,
efficiency-threshold optimization and Monte Carlo tallies."""

__version__ = "0.1.0"
