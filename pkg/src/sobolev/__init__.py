"""sobolev-estimation: frequency-domain estimators for Sobolev quantities of densities."""

__version__ = "0.1.0"
