"""
Global association statistics: Moran's I and Geary's C.

Every statistic is evaluated through a PreparedStatistic, which holds the
fixed field, the field that inference permutes and the normalizing scale.
The observed value and all permutation replicates go through the same
kernels, so a replicate equal to the observed arrangement reproduces the
observed value bit for bit.

Reductions use numpy's pairwise summation over a contiguous axis; results do
not depend on how replicates are chunked across workers.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Tuple

import numpy as np
import structlog
from scipy import stats as sps

from lattice_assoc.config import settings
from lattice_assoc.errors import (
    DegenerateConditioning,
    DegenerateLattice,
    EmptyWeights,
    InvalidSpec,
    LengthMismatch,
    ZeroVariance,
)
from lattice_assoc.lattice.models import AttributeTable
from lattice_assoc.observability import record
from lattice_assoc.stats.conditioning import conditional_pair
from lattice_assoc.stats.models import AssocKind, AssocResult, Conditioning, ConditioningSet, Variant
from lattice_assoc.weights.models import WeightMatrix

logger = structlog.get_logger()

Assumption = Literal['normality', 'randomization']


# --- input checks ---

def as_vector(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise LengthMismatch(f"{name} must be a vector", {'name': name, 'shape': list(x.shape)})
    if not np.all(np.isfinite(x)):
        raise InvalidSpec(f"{name} contains non-finite values", {'name': name})
    return x


def _check_weights(w: WeightMatrix, n: int):
    if w.n != n:
        raise LengthMismatch(
            f"Vector of length {n} for a {w.n}-site weight matrix",
            {'expected': w.n, 'got': n}
        )
    if n < 3:
        raise DegenerateLattice("Global statistics need at least 3 sites", {'n': n})
    if not w.s0 > 0:
        raise EmptyWeights("Weight matrix has no positive weight (s0 = 0)", {'n': n})


def center(x: np.ndarray, name: str) -> Tuple[np.ndarray, float]:
    z = x - np.mean(x)
    ss = float(np.sum(z * z))
    if np.all(x == x[0]) or not ss > 0:
        raise ZeroVariance(f"{name} has zero sample variance", {'name': name})
    return z, ss


# --- kernels (last axis indexes sites; leading axis, if any, indexes replicates) ---

def cross_product(w: WeightMatrix, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_ij w_ij a_i b_j."""
    if b.ndim == 1:
        lag = w.sparse @ b
    else:
        lag = np.ascontiguousarray((w.sparse @ b.T).T)
    return np.sum(a * lag, axis=-1)


def squared_difference(w: WeightMatrix, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_ij w_ij (a_i - b_j)^2."""
    coo = w.sparse.tocoo()
    diff = a[..., coo.row] - b[..., coo.col]
    return np.sum(coo.data * diff * diff, axis=-1)


@dataclass(frozen=True, eq=False)
class PreparedStatistic:
    """
    A global statistic reduced to (fixed field, permuted field, scale).

    Moran: fields are centered, value = cross_product / scale.
    Geary: fields are raw, value = squared_difference / scale.
    For the univariate variant the permuted field is also the fixed one.
    """
    kind: AssocKind
    variant: Variant
    w: WeightMatrix
    fixed: np.ndarray
    moving: np.ndarray
    scale: float
    vars: Tuple[str, ...] = ()
    given: Tuple[str, ...] = ()
    conditioning: Optional[Conditioning] = None

    @property
    def n(self) -> int:
        return self.moving.shape[0]

    def evaluate(self, moving: Optional[np.ndarray] = None):
        """Statistic for the stored arrangement, or for each row of `moving`."""
        moving = self.moving if moving is None else moving
        fixed = moving if self.variant == Variant.UNIVARIATE else self.fixed
        if self.kind == AssocKind.MORAN_I:
            return cross_product(self.w, fixed, moving) / self.scale
        return squared_difference(self.w, fixed, moving) / self.scale


def _prepare(
    kind: AssocKind,
    variant: Variant,
    xi,
    xj,
    w: WeightMatrix,
    names: Tuple[str, str] = ('xi', 'xj'),
    given: Tuple[str, ...] = (),
    conditioning: Optional[Conditioning] = None,
) -> PreparedStatistic:
    xi = as_vector(xi, names[0])
    xj = as_vector(xj, names[1])
    if xi.shape != xj.shape:
        raise LengthMismatch(
            f"{names[0]} and {names[1]} differ in length",
            {names[0]: int(xi.size), names[1]: int(xj.size)}
        )
    n = xi.shape[0]
    _check_weights(w, n)

    zi, ss_i = center(xi, names[0])
    same = variant == Variant.UNIVARIATE or np.array_equal(xi, xj)
    if same:
        zj, ss_j = zi, ss_i
    else:
        zj, ss_j = center(xj, names[1])

    s0 = w.s0
    if kind == AssocKind.MORAN_I:
        spread = ss_i / n if same else math.sqrt(ss_i / n) * math.sqrt(ss_j / n)
        scale = s0 * spread
        fixed, moving = zi, zj
    else:
        spread = ss_i if same else math.sqrt(ss_i) * math.sqrt(ss_j)
        scale = 2.0 * s0 * spread / (n - 1)
        fixed, moving = xi, xj

    vars_ = (names[0],) if variant == Variant.UNIVARIATE else names
    return PreparedStatistic(
        kind=kind,
        variant=variant,
        w=w,
        fixed=fixed,
        moving=moving,
        scale=scale,
        vars=tuple(vars_),
        given=tuple(given),
        conditioning=conditioning,
    )


def _result(prepared: PreparedStatistic, statistic: Optional[float] = None, **moments) -> AssocResult:
    value = float(prepared.evaluate()) if statistic is None else statistic
    result = AssocResult(
        statistic=value,
        kind=prepared.kind,
        variant=prepared.variant,
        vars=list(prepared.vars),
        given=list(prepared.given),
        conditioning=prepared.conditioning,
        n=prepared.n,
        s0=prepared.w.s0,
        **moments,
    )
    record(lambda m: m.statistics_total.labels(kind=prepared.kind.value, variant=prepared.variant.value).inc())
    return result


def _normal_moments(statistic: float, mean: float, variance: float) -> dict:
    moments = {'null_mean': mean, 'null_variance': variance}
    if variance > 0:
        z = (statistic - mean) / math.sqrt(variance)
        moments['z_score'] = z
        moments['p_norm'] = float(2.0 * sps.norm.sf(abs(z)))
    return moments


# --- null moments ---

def moran_null_variance(
    w: WeightMatrix,
    n: int,
    assumption: Assumption = 'normality',
    x=None,
) -> float:
    """
    Variance of Moran's I under the null of no spatial association.

    Args:
        w: Weight matrix (general nonnegative weights)
        n: Number of sites
        assumption: 'normality' or 'randomization' (needs x for the kurtosis)
        x: Observed values, randomization only

    Returns:
        Nonnegative variance
    """
    if w.n != n:
        raise LengthMismatch(f"n = {n} for a {w.n}-site weight matrix", {'expected': w.n, 'got': n})
    if n < 3:
        raise DegenerateLattice("Moran's I variance needs at least 3 sites", {'n': n})
    s0, s1, s2 = w.s0, w.s1, w.s2
    if not s0 > 0:
        raise EmptyWeights("Weight matrix has no positive weight (s0 = 0)", {'n': n})

    mean_sq = 1.0 / (n - 1) ** 2
    if assumption == 'normality':
        variance = (n * n * s1 - n * s2 + 3.0 * s0 * s0) / ((n * n - 1.0) * s0 * s0) - mean_sq
    elif assumption == 'randomization':
        if x is None:
            raise InvalidSpec("Randomization variance needs the observed values")
        if n < 4:
            raise DegenerateLattice("Randomization variance needs at least 4 sites", {'n': n})
        x = as_vector(x, 'x')
        if x.shape[0] != n:
            raise LengthMismatch("x does not match n", {'expected': n, 'got': int(x.size)})
        z, ss = center(x, 'x')
        kurtosis = n * float(np.sum(z ** 4)) / ss ** 2
        numerator = (
            n * ((n * n - 3 * n + 3) * s1 - n * s2 + 3.0 * s0 * s0)
            - kurtosis * ((n * n - n) * s1 - 2 * n * s2 + 6.0 * s0 * s0)
        )
        variance = numerator / ((n - 1.0) * (n - 2.0) * (n - 3.0) * s0 * s0) - mean_sq
    else:
        raise InvalidSpec(f"Unknown null assumption: {assumption}", {'assumption': assumption})
    return max(float(variance), 0.0)


def geary_null_variance(w: WeightMatrix, n: int) -> float:
    """Variance of Geary's C under normality."""
    if w.n != n:
        raise LengthMismatch(f"n = {n} for a {w.n}-site weight matrix", {'expected': w.n, 'got': n})
    s0, s1, s2 = w.s0, w.s1, w.s2
    if not s0 > 0:
        raise EmptyWeights("Weight matrix has no positive weight (s0 = 0)", {'n': n})
    variance = ((2.0 * s1 + s2) * (n - 1) - 4.0 * s0 * s0) / (2.0 * (n + 1) * s0 * s0)
    return max(float(variance), 0.0)


# --- univariate ---

def summarize(prepared: PreparedStatistic, assumption: Assumption = 'normality') -> AssocResult:
    """
    AssocResult for a prepared statistic.

    Univariate statistics carry their analytic null moments; bivariate and
    partial ones rely on permutation inference.
    """
    statistic = float(prepared.evaluate())
    if prepared.variant != Variant.UNIVARIATE:
        return _result(prepared, statistic)

    n, w = prepared.n, prepared.w
    if prepared.kind == AssocKind.MORAN_I:
        x = prepared.moving if assumption == 'randomization' else None
        variance = moran_null_variance(w, n, assumption=assumption, x=x)
        return _result(prepared, statistic, **_normal_moments(statistic, -1.0 / (n - 1), variance))

    if not -1e-9 <= statistic <= 2.0 + 1e-9:
        logger.warning("Geary's C outside [0, 2]", statistic=statistic, n=n)
    variance = geary_null_variance(w, n)
    return _result(prepared, statistic, **_normal_moments(statistic, 1.0, variance))


def moran_i(x, w: WeightMatrix, assumption: Assumption = 'normality', name: str = 'x') -> AssocResult:
    """Global Moran's I with its analytic null mean and variance."""
    return summarize(prepare_univariate(AssocKind.MORAN_I, x, w, name), assumption)


def geary_c(x, w: WeightMatrix, name: str = 'x') -> AssocResult:
    """Global Geary's C; the analytic null mean is 1."""
    return summarize(prepare_univariate(AssocKind.GEARY_C, x, w, name))


def prepare_univariate(kind: AssocKind, x, w: WeightMatrix, name: str = 'x') -> PreparedStatistic:
    return _prepare(kind, Variant.UNIVARIATE, x, x, w, names=(name, name))


# --- bivariate ---

def prepare_bivariate(
    kind: AssocKind,
    xi,
    xj,
    w: WeightMatrix,
    names: Tuple[str, str] = ('xi', 'xj'),
) -> PreparedStatistic:
    return _prepare(kind, Variant.BIVARIATE, xi, xj, w, names=names)


def moran_i_biv(xi, xj, w: WeightMatrix, names: Tuple[str, str] = ('xi', 'xj')) -> AssocResult:
    """
    Bivariate Moran's I: sum_ab w_ab z_i(a) z_j(b) / (s0 * sd_i * sd_j), sd with /n.
    """
    return _result(prepare_bivariate(AssocKind.MORAN_I, xi, xj, w, names))


def geary_c_biv(xi, xj, w: WeightMatrix, names: Tuple[str, str] = ('xi', 'xj')) -> AssocResult:
    """
    Bivariate Geary's C on the raw values:
    (n-1) sum_ab w_ab (xi_a - xj_b)^2 / (2 s0 sqrt(SS_i) sqrt(SS_j)).

    Not symmetric in (xi, xj); shifting either field changes the value.
    """
    return _result(prepare_bivariate(AssocKind.GEARY_C, xi, xj, w, names))


# --- partial (residual conditioning) ---

def prepare_partial(
    kind: AssocKind,
    table: AttributeTable,
    i: str,
    j: str,
    given: Iterable[str],
    w: WeightMatrix,
) -> PreparedStatistic:
    """
    Bivariate statistic of the conditional fields X_{i|c}, X_{j|c}.

    Geary's numerator depends on where the two fields are located, so each
    conditional field is shifted back to its target's sample mean. Moran's I
    is location invariant and is unaffected.
    """
    conditioning, field_i, field_j = conditional_pair(table, i, j, given)
    xi, xj = field_i.values, field_j.values
    if kind == AssocKind.GEARY_C and not conditioning.given:
        xi, xj = table.variable(i), table.variable(j)
    elif kind == AssocKind.GEARY_C:
        xi = xi + np.mean(table.variable(i))
        xj = xj + np.mean(table.variable(j))
    return _prepare(
        kind,
        Variant.PARTIAL,
        xi,
        xj,
        w,
        names=(i, j),
        given=tuple(conditioning.given),
        conditioning=Conditioning.RESIDUAL,
    )


def moran_i_partial(table: AttributeTable, i: str, j: str, given: Iterable[str], w: WeightMatrix) -> AssocResult:
    """Partial Moran's I_{ij|c}."""
    return _result(prepare_partial(AssocKind.MORAN_I, table, i, j, given, w))


def geary_c_partial(table: AttributeTable, i: str, j: str, given: Iterable[str], w: WeightMatrix) -> AssocResult:
    """Partial Geary's C_{ij|c}; C_{ij|c} != C_{ji|c} in general."""
    return _result(prepare_partial(AssocKind.GEARY_C, table, i, j, given, w))


# --- recursions from bivariate values (single conditioning variable) ---

def _complement(a: float, name: str, guard: float) -> float:
    remainder = 1.0 - a * a
    if remainder < guard:
        raise DegenerateConditioning(
            f"1 - {name}^2 = {remainder:.3g} is below the conditioning guard",
            {name: a, 'guard': guard}
        )
    return remainder


def partial_from_bivariate(a_ij: float, a_ik: float, a_jk: float, guard: Optional[float] = None) -> float:
    """(a_ij - a_ik a_jk) / (sqrt(1 - a_ik^2) sqrt(1 - a_jk^2))."""
    guard = settings.conditioning_guard if guard is None else guard
    left = _complement(a_ik, 'a_ik', guard)
    right = _complement(a_jk, 'a_jk', guard)
    return (a_ij - a_ik * a_jk) / (math.sqrt(left) * math.sqrt(right))


def semipartial_from_bivariate(
    a_ij: float,
    a_ik: float,
    a_kj: float,
    a_jk: float,
    guard: Optional[float] = None,
) -> float:
    """(a_ij - a_ik a_kj) / sqrt(1 - a_jk^2)."""
    guard = settings.conditioning_guard if guard is None else guard
    remainder = _complement(a_jk, 'a_jk', guard)
    return (a_ij - a_ik * a_kj) / math.sqrt(remainder)


def _bivariate_value(kind: AssocKind, table: AttributeTable, a: str, b: str, w: WeightMatrix) -> float:
    prepared = prepare_bivariate(kind, table.variable(a), table.variable(b), w, names=(a, b))
    return float(prepared.evaluate())


def _recursive(kind: AssocKind, variant: Variant, table: AttributeTable, i: str, j: str, k: str, w: WeightMatrix):
    conditioning = _single_conditioning(table, i, j, k)
    a_ij = _bivariate_value(kind, table, i, j, w)
    a_ik = _bivariate_value(kind, table, i, k, w)
    a_jk = _bivariate_value(kind, table, j, k, w)
    if variant == Variant.PARTIAL:
        value = partial_from_bivariate(a_ij, a_ik, a_jk)
    else:
        a_kj = _bivariate_value(kind, table, k, j, w)
        value = semipartial_from_bivariate(a_ij, a_ik, a_kj, a_jk)

    logger.debug("Recursion from bivariate values", kind=kind.value, variant=variant.value, a_ij=a_ij, a_ik=a_ik, a_jk=a_jk)
    record(lambda m: m.statistics_total.labels(kind=kind.value, variant=variant.value).inc())
    return AssocResult(
        statistic=value,
        kind=kind,
        variant=variant,
        vars=[i, j],
        given=list(conditioning),
        conditioning=Conditioning.RECURSION,
        n=table.lattice.n,
        s0=w.s0,
    )


def _single_conditioning(table: AttributeTable, i: str, j: str, k) -> Tuple[str]:
    given = [k] if isinstance(k, str) else list(k)
    if len(given) != 1:
        raise InvalidSpec("Recursion needs exactly one conditioning variable", {'given': given})
    ConditioningSet.create(i, j, given).check(table)
    return (given[0],)


def moran_i_partial_recursive(table: AttributeTable, i: str, j: str, k: str, w: WeightMatrix) -> AssocResult:
    return _recursive(AssocKind.MORAN_I, Variant.PARTIAL, table, i, j, k, w)


def geary_c_partial_recursive(table: AttributeTable, i: str, j: str, k: str, w: WeightMatrix) -> AssocResult:
    return _recursive(AssocKind.GEARY_C, Variant.PARTIAL, table, i, j, k, w)


def moran_i_semipartial(table: AttributeTable, i: str, j: str, k: str, w: WeightMatrix) -> AssocResult:
    """Semi-partial Moran's I: conditioning removed from j only."""
    return _recursive(AssocKind.MORAN_I, Variant.SEMI_PARTIAL, table, i, j, k, w)


def geary_c_semipartial(table: AttributeTable, i: str, j: str, k: str, w: WeightMatrix) -> AssocResult:
    return _recursive(AssocKind.GEARY_C, Variant.SEMI_PARTIAL, table, i, j, k, w)
