"""Quadrant (hot/cold spot) classification and significance maps."""
from typing import Optional, Sequence

import numpy as np
import structlog
from scipy import stats as sps

from lattice_assoc.config import settings
from lattice_assoc.errors import InvalidSpec, LengthMismatch
from lattice_assoc.inference.models import PermutationPlan, QuadrantClass, Scheme, SignificanceMap
from lattice_assoc.inference.permutation import permute_local
from lattice_assoc.stats.local_assoc import PreparedLocal
from lattice_assoc.weights.models import WeightMatrix
from lattice_assoc.weights.transforms import row_standardize

logger = structlog.get_logger()


def _standardized(x: np.ndarray) -> np.ndarray:
    z = x - np.mean(x)
    sd = np.sqrt(np.mean(z * z))
    return z / sd if sd > 0 else z


def fdr_adjust(pseudo_p: np.ndarray) -> np.ndarray:
    """Benjamini-Hochberg adjusted p-values; NaN entries (islands) stay NaN."""
    adjusted = np.full_like(pseudo_p, np.nan, dtype=float)
    present = ~np.isnan(pseudo_p)
    if present.any():
        adjusted[present] = sps.false_discovery_control(pseudo_p[present], method='bh')
    return adjusted


def classify_quadrants(
    xi,
    xj,
    w: WeightMatrix,
    pseudo_p,
    alpha: Optional[float] = None,
    ids: Optional[Sequence[str]] = None,
    values=None,
    fdr: bool = False,
) -> SignificanceMap:
    """
    Assign HH/HL/LH/LL to significant sites, NotSignificant or Island otherwise.

    The value axis is standardized xi; the lag axis is the row-standardized
    spatial lag of standardized xj. A site is significant when its pseudo
    p-value (BH-adjusted with `fdr`) is at most alpha. A zero on either axis
    has no quadrant and is reported as NotSignificant.
    """
    alpha = settings.alpha if alpha is None else alpha
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    pseudo_p = np.asarray(pseudo_p, dtype=float)
    n = w.n
    for name, vector in (('xi', xi), ('xj', xj), ('pseudo_p', pseudo_p)):
        if vector.shape != (n,):
            raise LengthMismatch(
                f"{name} has shape {vector.shape} for {n} sites",
                {'name': name, 'expected': n}
            )
    if not 0.0 < alpha < 1.0:
        raise InvalidSpec("alpha must lie in (0, 1)", {'alpha': alpha})

    ids = tuple(ids) if ids is not None else tuple(w.ids or (str(i) for i in range(n)))
    values = np.zeros(n) if values is None else np.asarray(values, dtype=float)

    z_values = _standardized(xi)
    z_lags = np.asarray(row_standardize(w).sparse @ _standardized(xj))
    islands = w.island_mask()
    tested = fdr_adjust(pseudo_p) if fdr else pseudo_p

    classes = []
    for a in range(n):
        if islands[a]:
            classes.append(QuadrantClass.ISLAND)
            continue
        if not tested[a] <= alpha:
            classes.append(QuadrantClass.NOT_SIGNIFICANT)
            continue
        value, lag = z_values[a], z_lags[a]
        if value > 0 and lag > 0:
            classes.append(QuadrantClass.HH)
        elif value > 0 and lag < 0:
            classes.append(QuadrantClass.HL)
        elif value < 0 and lag > 0:
            classes.append(QuadrantClass.LH)
        elif value < 0 and lag < 0:
            classes.append(QuadrantClass.LL)
        else:
            classes.append(QuadrantClass.NOT_SIGNIFICANT)

    reported_p = pseudo_p.copy()
    reported_p[islands] = np.nan
    significance = SignificanceMap(
        ids=ids,
        values=values,
        z_values=z_values,
        z_lags=z_lags,
        pseudo_p=reported_p,
        classes=tuple(classes),
        alpha=alpha,
    )
    logger.info("Quadrants classified", alpha=alpha, fdr=fdr, **significance.counts())
    return significance


def significance_map(
    prepared: PreparedLocal,
    plan: PermutationPlan,
    alpha: Optional[float] = None,
    fdr: bool = False,
    ids: Optional[Sequence[str]] = None,
    n_jobs: Optional[int] = None,
) -> SignificanceMap:
    """Local Moran values, conditional-permutation p-values and quadrant classes."""
    if plan.scheme != Scheme.CONDITIONAL:
        plan = plan.model_copy(update={'scheme': Scheme.CONDITIONAL})
    pseudo_p = permute_local(prepared, plan, n_jobs=n_jobs)
    return classify_quadrants(
        prepared.zi,
        prepared.zj,
        prepared.w,
        pseudo_p,
        alpha=alpha,
        ids=ids,
        values=prepared.values(),
        fdr=fdr,
    )
