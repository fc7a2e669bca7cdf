"""Quasiparticle spectroscopy of long-range interacting spin chains."""

__version__ = "0.1.0"
