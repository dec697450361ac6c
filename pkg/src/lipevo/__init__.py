"""Spectral verification toolkit for evolution equations with time-measurable
pseudo-differential operators in variable-order Lipschitz spaces."""

__version__ = "0.1.0"
