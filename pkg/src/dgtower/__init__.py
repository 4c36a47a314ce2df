"""Postnikov towers, k-invariants and lifting obstructions for finite dg categories."""

__version__ = "0.1.0"
