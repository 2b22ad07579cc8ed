"""Verification toolkit for metric geometry on nonpositively curved polyhedral 2-complexes."""

__version__ = "0.1.0"
