"""Verification and search toolkit for k-generalized Fibonacci Diophantine triples."""

__version__ = "0.1.0"
