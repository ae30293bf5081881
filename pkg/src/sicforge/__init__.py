"""Construct, verify and algebraically fingerprint SICs and equiangular tight frames."""

__version__ = "0.1.0"
