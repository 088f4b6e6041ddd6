"""Numerical companion for Schauder theory of degenerate Kimura-type
parabolic operators on ``R_+^n x R^m``."""
__version__ = "0.1.0"
