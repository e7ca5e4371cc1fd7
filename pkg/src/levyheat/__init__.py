"""Heat kernels of stable-like operators with variable coefficients."""

__version__ = "0.1.0"
