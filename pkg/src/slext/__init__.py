"""Singular Sturm-Liouville endpoints, self-adjoint extensions and the
Aharonov-Bohm partial-wave spectrum."""

__version__ = "0.1.0"
