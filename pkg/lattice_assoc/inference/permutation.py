"""
Permutation inference for global and local statistics.

Global: the permuted field (x for univariate, the j field for bivariate and
partial statistics) is relabelled across all sites. Local: conditional
permutation, the value at site a is held fixed and its neighbours are drawn
from the other n - 1 sites.

Replicate r draws from numpy's PCG64 stream seeded with SeedSequence([seed, r]).
Replicates are evaluated in chunks on a joblib thread pool; every chunk
regenerates its own streams, so output is identical for any n_jobs.
"""
import itertools
import math
import time
from typing import List, Optional, Tuple

import numpy as np
import structlog
from joblib import Parallel, delayed

from lattice_assoc.config import settings
from lattice_assoc.errors import InvalidSpec
from lattice_assoc.inference.models import Alternative, PermutationPlan, Scheme
from lattice_assoc.observability import record
from lattice_assoc.stats.global_assoc import PreparedStatistic, summarize
from lattice_assoc.stats.local_assoc import PreparedLocal
from lattice_assoc.stats.models import AssocResult

logger = structlog.get_logger()

# enumeration beyond this many permutations is refused
MAX_EXHAUSTIVE = 1_000_000

# ties within rounding count as at least as extreme
RELATIVE_TIE = 1e-12


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng([seed, replicate])


def _chunks(total: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def _sampled_permutations(seed: int, start: int, stop: int, size: int) -> np.ndarray:
    return np.stack([replicate_rng(seed, r).permutation(size) for r in range(start, stop)])


def _enumerated_permutations(size: int) -> np.ndarray:
    count = math.factorial(size)
    if count > MAX_EXHAUSTIVE:
        raise InvalidSpec(
            f"Exhaustive enumeration of {size}! permutations is too large",
            {'size': size, 'limit': MAX_EXHAUSTIVE}
        )
    return np.array(list(itertools.permutations(range(size))), dtype=np.intp).reshape(count, size)


def _run_chunks(evaluate, total: int, n_jobs: int, chunk_size: int) -> np.ndarray:
    chunks = _chunks(total, chunk_size)
    if n_jobs == 1 or len(chunks) == 1:
        parts = [evaluate(start, stop) for start, stop in chunks]
    else:
        parts = Parallel(n_jobs=n_jobs, backend='threading')(
            delayed(evaluate)(start, stop) for start, stop in chunks
        )
    return np.concatenate(parts, axis=0)


def extreme_counts(observed, replicates: np.ndarray, alternative: Alternative) -> np.ndarray:
    """
    Number of replicates at least as extreme as the observed value.

    `replicates` has replicates along axis 0; `observed` broadcasts against
    one replicate. Two-sided extremeness is distance from the replicate mean.
    """
    observed = np.asarray(observed, dtype=float)
    if alternative == Alternative.TWO_SIDED:
        center = np.mean(replicates, axis=0)
        deviation = np.abs(replicates - center)
        target = np.abs(observed - center)
        slack = RELATIVE_TIE * np.maximum(1.0, target)
        return np.sum(deviation >= target - slack, axis=0)

    slack = RELATIVE_TIE * np.maximum(1.0, np.abs(observed))
    if alternative == Alternative.GREATER:
        return np.sum(replicates >= observed - slack, axis=0)
    return np.sum(replicates <= observed + slack, axis=0)


def pseudo_p_value(count, replicates: int):
    """(r + 1) / (M + 1)."""
    return (np.asarray(count) + 1.0) / (replicates + 1.0)


def permute_global(
    prepared: PreparedStatistic,
    plan: PermutationPlan,
    n_jobs: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> AssocResult:
    """
    Pseudo p-value of a global statistic.

    Args:
        prepared: Statistic with its fields (see stats.prepare_*)
        plan: Replicate count, seed and alternative
        n_jobs: Worker threads (default settings.n_jobs)
        chunk_size: Replicates per work item (default settings.chunk_size)

    Returns:
        AssocResult with pseudo_p, replicate mean and standard deviation
    """
    n_jobs = settings.n_jobs if n_jobs is None else n_jobs
    chunk_size = settings.chunk_size if chunk_size is None else chunk_size
    if plan.scheme != Scheme.TOTAL:
        raise InvalidSpec("Global statistics use the total permutation scheme", {'scheme': plan.scheme.value})

    n = prepared.n
    moving = prepared.moving
    started = time.perf_counter()

    if plan.exhaustive:
        permutations = _enumerated_permutations(n)
        total = permutations.shape[0]

        def evaluate(start: int, stop: int) -> np.ndarray:
            return prepared.evaluate(moving[permutations[start:stop]])
    else:
        total = plan.replicates

        def evaluate(start: int, stop: int) -> np.ndarray:
            return prepared.evaluate(moving[_sampled_permutations(plan.seed, start, stop, n)])

    replicates = _run_chunks(evaluate, total, n_jobs, chunk_size)
    result = summarize(prepared)
    count = int(extreme_counts(result.statistic, replicates, plan.alternative))
    elapsed = time.perf_counter() - started

    record(lambda m: m.replicates_total.labels(scope='global').inc(total))
    record(lambda m: m.permutation_duration.labels(scope='global').observe(elapsed))
    logger.info(
        "Global permutation inference",
        kind=prepared.kind.value,
        variant=prepared.variant.value,
        replicates=total,
        exhaustive=plan.exhaustive,
        extreme=count,
        seconds=round(elapsed, 3)
    )
    return result.model_copy(update={
        'pseudo_p': float(pseudo_p_value(count, total)),
        'replicates': total,
        'alternative': plan.alternative.value,
        'replicate_mean': float(np.mean(replicates)),
        'replicate_sd': float(np.std(replicates, ddof=1)) if total > 1 else 0.0,
    })


class _NeighbourTable:
    """Per-site neighbour weights padded to the largest cardinality."""

    def __init__(self, prepared: PreparedLocal):
        w = prepared.w
        self.cardinality = w.cardinalities()
        self.k_max = int(self.cardinality.max()) if w.n else 0
        self.weights = np.zeros((w.n, self.k_max))
        for a in range(w.n):
            start, end = w.sparse.indptr[a], w.sparse.indptr[a + 1]
            self.weights[a, :end - start] = w.sparse.data[start:end]


def _local_replicates(
    prepared: PreparedLocal,
    table: _NeighbourTable,
    draws: np.ndarray,
    sites: np.ndarray,
) -> np.ndarray:
    """
    Local statistics of `sites` for each row of `draws` ((m, >= k_max) indices
    into the n - 1 other sites). Returns (m, len(sites)).
    """
    k = table.k_max
    positions = draws[:, None, :k]                                  # (m, 1, k)
    skip = (positions >= sites[None, :, None]).astype(np.intp)      # (m, s, k)
    neighbours = positions + skip
    lag = np.sum(prepared.zj[neighbours] * table.weights[sites][None, :, :], axis=-1)
    return prepared.zi[sites][None, :] * lag / prepared.m2


def permute_local(
    prepared: PreparedLocal,
    plan: PermutationPlan,
    n_jobs: Optional[int] = None,
    chunk_size: Optional[int] = None,
    site_block: int = 2048,
) -> np.ndarray:
    """
    Conditional-permutation pseudo p-values of a local Moran map.

    Each replicate draws one permutation of n - 1 positions; site a takes its
    k_a neighbour values from the first k_a positions, skipping a itself.
    Islands get NaN.

    Returns:
        Vector of pseudo p-values in site order
    """
    n_jobs = settings.n_jobs if n_jobs is None else n_jobs
    chunk_size = settings.chunk_size if chunk_size is None else chunk_size
    if plan.scheme != Scheme.CONDITIONAL:
        raise InvalidSpec("Local statistics use the conditional permutation scheme", {'scheme': plan.scheme.value})

    n = prepared.n
    observed = prepared.values()
    islands = prepared.w.island_mask()
    table = _NeighbourTable(prepared)
    started = time.perf_counter()

    if plan.exhaustive:
        draws_all = _enumerated_permutations(n - 1)
        total = draws_all.shape[0]

        def draws(start: int, stop: int) -> np.ndarray:
            return draws_all[start:stop]
    else:
        total = plan.replicates

        def draws(start: int, stop: int) -> np.ndarray:
            return _sampled_permutations(plan.seed, start, stop, n - 1)

    def evaluate(start: int, stop: int) -> np.ndarray:
        block = draws(start, stop)
        out = np.zeros((stop - start, n))
        for first in range(0, n, site_block):
            sites = np.arange(first, min(first + site_block, n))
            out[:, sites] = _local_replicates(prepared, table, block, sites)
        return out

    pseudo_p = np.full(n, np.nan)
    if table.k_max > 0:
        replicates = _run_chunks(evaluate, total, n_jobs, chunk_size)
        counts = extreme_counts(observed, replicates, plan.alternative)
        pseudo_p = pseudo_p_value(counts, total)
        pseudo_p[islands] = np.nan
    elapsed = time.perf_counter() - started

    record(lambda m: m.replicates_total.labels(scope='local').inc(total))
    record(lambda m: m.permutation_duration.labels(scope='local').observe(elapsed))
    logger.info(
        "Local permutation inference",
        kind=prepared.kind.value,
        replicates=total,
        exhaustive=plan.exhaustive,
        islands=int(islands.sum()),
        seconds=round(elapsed, 3)
    )
    return pseudo_p
