"""Measures of spatial association for multivariate lattice data."""
