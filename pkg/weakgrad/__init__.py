"""weakgrad: simulation-based gradient estimation for stochastic networks."""

__version__ = "1.0.0"
