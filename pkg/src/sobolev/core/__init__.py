"""Numerical core: lattices, Fourier accumulation, estimators, inference and oracles."""
