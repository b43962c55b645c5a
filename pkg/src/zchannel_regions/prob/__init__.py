"""Finite-alphabet and Gaussian information measures."""
