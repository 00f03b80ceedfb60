"""Balanced DNF rule learning compiled to weighted MaxSAT."""
__version__ = "0.1.0"
