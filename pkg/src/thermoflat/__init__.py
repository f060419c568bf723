"""Quantum and classical thermal position distributions for three 1-D systems."""

__version__ = "0.1.0"
