"""Alternative tensor-product structures of closed quantum systems and their reduced dynamics."""

__version__ = "0.1.0"
