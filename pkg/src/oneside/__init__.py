"""Numerical checks of connectability of zero level sets against
fundamental solutions of degenerate parabolic equations."""

__version__ = "0.1.0"
