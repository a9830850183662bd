"""Verification toolkit for Rogers-dilogarithm identities on hyperbolic surfaces."""

__version__ = "0.1.0"
