"""
Conditional components X_{i|c}.

A target variable is conditioned on a set of given variables by ordinary
least squares with an intercept: the conditional field is the residual of
the target after orthogonal projection onto span{1, given}.
"""
from typing import Iterable, Optional, Tuple

import numpy as np
import structlog

from lattice_assoc.config import settings
from lattice_assoc.errors import InvalidSpec, RankDeficient
from lattice_assoc.lattice.models import AttributeTable
from lattice_assoc.stats.models import ConditionalField, ConditioningSet

logger = structlog.get_logger()


def _informative(table: AttributeTable, given: Iterable[str]) -> Tuple[str, ...]:
    """Given variables with nonzero variance; constant columns are dropped."""
    kept = []
    for name in given:
        column = table.variable(name)
        if np.all(column == column[0]):
            logger.warning("Dropping constant conditioning variable", variable=name)
            continue
        kept.append(name)
    return tuple(kept)


def residualize(
    table: AttributeTable,
    target: str,
    given: Iterable[str],
    tolerance: Optional[float] = None,
) -> ConditionalField:
    """
    Residual of `target` after projecting out an intercept and `given`.

    Args:
        table: Attribute table holding target and given variables
        target: Variable to condition
        given: Conditioning variables (may be empty)
        tolerance: Relative singular value cut-off (default settings.rank_tolerance)

    Returns:
        ConditionalField with mean 0

    Raises:
        InvalidSpec: target listed among the given variables
        RankDeficient: design [1, given] numerically rank-deficient, or too few sites
    """
    tolerance = settings.rank_tolerance if tolerance is None else tolerance
    given = tuple(given)
    if target in given:
        raise InvalidSpec(f"Target {target} cannot condition on itself", {'target': target})

    y = np.asarray(table.variable(target), dtype=float)
    n = y.shape[0]
    centered = y - np.mean(y)

    kept = _informative(table, given)
    if not kept:
        return ConditionalField(name=target, values=centered, mean=float(np.mean(centered)), given=given)

    if n <= len(kept) + 1:
        raise RankDeficient(
            f"{n} sites cannot support an intercept plus {len(kept)} conditioning variables",
            {'n': n, 'given': list(kept)}
        )

    design = np.column_stack([np.ones(n), table.matrix(kept)])
    basis, singular, _ = np.linalg.svd(design, full_matrices=False)
    if singular[-1] < tolerance * singular[0]:
        raise RankDeficient(
            f"Conditioning design for {target} is rank-deficient",
            {'target': target, 'given': list(kept), 'condition': float(singular[0] / max(singular[-1], 1e-300))}
        )

    residual = y - basis @ (basis.T @ y)
    # perfect fit: snap numerical dust to an exact zero field
    if np.linalg.norm(residual) <= tolerance * max(np.linalg.norm(centered), np.finfo(float).tiny):
        residual = np.zeros(n)

    logger.debug("Residualized", target=target, given=list(kept), n=n)
    return ConditionalField(name=target, values=residual, mean=float(np.mean(residual)), given=given)


def conditional_pair(
    table: AttributeTable,
    i: str,
    j: str,
    given: Iterable[str],
) -> Tuple[ConditioningSet, ConditionalField, ConditionalField]:
    """Validate (i, j | c) against the table and residualize both targets."""
    conditioning = ConditioningSet.create(i, j, given).check(table)
    field_i = residualize(table, i, conditioning.given)
    field_j = residualize(table, j, conditioning.given)
    return conditioning, field_i, field_j
