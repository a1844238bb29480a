"""Transforms on weight matrices: higher orders, standardization, symmetrization, lags."""
import numpy as np
import scipy.sparse as sp
import structlog

from lattice_assoc.errors import InvalidSpec, LengthMismatch
from lattice_assoc.weights.models import Standardization, WeightMatrix

logger = structlog.get_logger()


def _pattern(w: WeightMatrix) -> sp.csr_matrix:
    pattern = w.sparse.copy()
    pattern.data[:] = 1.0
    return pattern


def higher_order(w: WeightMatrix, order: int) -> WeightMatrix:
    """
    Exclusive order-k neighbourhood of a binary matrix.

    Site j is an order-k neighbour of i when the shortest walk from i to j in
    the base graph has exactly k steps; lower orders and i itself are excluded.
    """
    if order < 1:
        raise InvalidSpec("Neighbourhood order must be positive", {'order': order})
    if w.standardization != Standardization.BINARY:
        raise InvalidSpec("higher_order expects a binary weight matrix")

    base = _pattern(w)
    if order == 1:
        return WeightMatrix(sparse=base, ids=w.ids)

    visited = (base + sp.identity(w.n, format='csr')).tocsr()
    frontier = base
    for _ in range(2, order + 1):
        reach = frontier @ base
        reach.data[:] = 1.0
        overlap = reach.multiply(visited).tocsr()
        frontier = (reach - overlap).tocsr()
        frontier.eliminate_zeros()
        visited = (visited + frontier).tocsr()
        if frontier.nnz == 0:
            break

    logger.debug("Higher order neighbourhood", order=order, nnz=frontier.nnz)
    return WeightMatrix(sparse=frontier, ids=w.ids)


def row_standardize(w: WeightMatrix) -> WeightMatrix:
    """Scale each nonempty row to sum 1; empty rows (islands) stay empty."""
    sums = w.row_sums()
    scale = np.zeros_like(sums)
    nonempty = sums > 0
    scale[nonempty] = 1.0 / sums[nonempty]
    standardized = sp.diags(scale) @ w.sparse
    return WeightMatrix(sparse=standardized, standardization=Standardization.ROW, ids=w.ids)


def symmetrize_union(w: WeightMatrix) -> WeightMatrix:
    """w'_ij = max(w_ij, w_ji) for a binary matrix."""
    if w.standardization != Standardization.BINARY:
        raise InvalidSpec("symmetrize_union expects a binary weight matrix")
    union = w.sparse.maximum(w.sparse.T)
    return WeightMatrix(sparse=union, standardization=Standardization.BINARY, ids=w.ids)


def standardize(w: WeightMatrix, mode: Standardization) -> WeightMatrix:
    """Apply a standardization mode by name (CLI --standardize)."""
    if mode == Standardization.ROW:
        return row_standardize(w)
    if w.standardization != Standardization.BINARY:
        return WeightMatrix(sparse=_pattern(w), ids=w.ids)
    return w


def spatial_lag(w: WeightMatrix, x) -> np.ndarray:
    """
    (lag)_i = sum_j w_ij x_j.

    Islands get a lag of 0. A 2-d input is lagged column by column.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != w.n:
        raise LengthMismatch(
            f"Vector of length {x.shape[0]} for {w.n} sites",
            {'expected': w.n, 'got': int(x.shape[0])}
        )
    return np.asarray(w.sparse @ x)
