"""Numerical verification of Carleson and Laplace-Carleson embeddings on Zen spaces"""

__version__ = '0.3.0'
