"""Global and local association statistics and conditioning."""
from lattice_assoc.stats.conditioning import conditional_pair, residualize
from lattice_assoc.stats.global_assoc import (
    PreparedStatistic,
    geary_c,
    geary_c_biv,
    geary_c_partial,
    geary_c_partial_recursive,
    geary_c_semipartial,
    geary_null_variance,
    moran_i,
    moran_i_biv,
    moran_i_partial,
    moran_i_partial_recursive,
    moran_i_semipartial,
    moran_null_variance,
    partial_from_bivariate,
    prepare_bivariate,
    prepare_partial,
    prepare_univariate,
    semipartial_from_bivariate,
    summarize,
)
from lattice_assoc.stats.local_assoc import (
    PreparedLocal,
    local_moran,
    local_moran_biv,
    local_moran_partial,
    prepare_local_moran,
    prepare_local_moran_biv,
    prepare_local_moran_partial,
)
from lattice_assoc.stats.models import (
    AssocKind,
    AssocResult,
    ConditionalField,
    Conditioning,
    ConditioningSet,
    LocalAssocMap,
    LocalKind,
    Variant,
)

__all__ = [
    'AssocKind',
    'AssocResult',
    'ConditionalField',
    'Conditioning',
    'ConditioningSet',
    'LocalAssocMap',
    'LocalKind',
    'PreparedLocal',
    'PreparedStatistic',
    'Variant',
    'conditional_pair',
    'geary_c',
    'geary_c_biv',
    'geary_c_partial',
    'geary_c_partial_recursive',
    'geary_c_semipartial',
    'geary_null_variance',
    'local_moran',
    'local_moran_biv',
    'local_moran_partial',
    'moran_i',
    'moran_i_biv',
    'moran_i_partial',
    'moran_i_partial_recursive',
    'moran_i_semipartial',
    'moran_null_variance',
    'partial_from_bivariate',
    'prepare_bivariate',
    'prepare_local_moran',
    'prepare_local_moran_biv',
    'prepare_local_moran_partial',
    'prepare_partial',
    'prepare_univariate',
    'residualize',
    'semipartial_from_bivariate',
    'summarize',
]
