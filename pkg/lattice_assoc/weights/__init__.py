"""Spatial weight matrices: construction, transforms and persistence."""
from lattice_assoc.weights.builder import build_weights
from lattice_assoc.weights.gal import read_gal, read_gwt, write_gal, write_gwt
from lattice_assoc.weights.models import NeighborMethod, NeighborSpec, Standardization, WeightMatrix
from lattice_assoc.weights.transforms import (
    higher_order,
    row_standardize,
    spatial_lag,
    standardize,
    symmetrize_union,
)

__all__ = [
    'NeighborMethod',
    'NeighborSpec',
    'Standardization',
    'WeightMatrix',
    'build_weights',
    'higher_order',
    'read_gal',
    'read_gwt',
    'row_standardize',
    'spatial_lag',
    'standardize',
    'symmetrize_union',
    'write_gal',
    'write_gwt',
]
