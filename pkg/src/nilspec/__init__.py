"""Spectra of Hodge Laplacians on Heisenberg-type groups."""

__version__ = "0.1.0"
