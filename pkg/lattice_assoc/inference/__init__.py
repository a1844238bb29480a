"""Permutation inference and significance maps."""
from lattice_assoc.inference.models import (
    Alternative,
    PermutationPlan,
    QuadrantClass,
    Scheme,
    SignificanceMap,
)
from lattice_assoc.inference.permutation import (
    extreme_counts,
    permute_global,
    permute_local,
    pseudo_p_value,
    replicate_rng,
)
from lattice_assoc.inference.quadrants import classify_quadrants, fdr_adjust, significance_map

__all__ = [
    'Alternative',
    'PermutationPlan',
    'QuadrantClass',
    'Scheme',
    'SignificanceMap',
    'classify_quadrants',
    'extreme_counts',
    'fdr_adjust',
    'permute_global',
    'permute_local',
    'pseudo_p_value',
    'replicate_rng',
    'significance_map',
]
