"""Executable semantics for the pure pattern calculus with explicit matching."""

__version__ = "0.1.0"
