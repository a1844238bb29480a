"""
Local Moran statistics (LISA).

I_a = z_i(a) / m2_i * sum_b w_ab z_j(b), with z centered and
m2_i = sum z_i^2 / (n - 1). The lag is taken on the centered field so that
sum_a I_a = I * s0 * (n - 1) / n and adding a constant changes nothing.
"""
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import structlog

from lattice_assoc.errors import LengthMismatch
from lattice_assoc.lattice.models import AttributeTable
from lattice_assoc.observability import record
from lattice_assoc.stats.conditioning import conditional_pair
from lattice_assoc.stats.global_assoc import as_vector, center
from lattice_assoc.stats.models import LocalAssocMap, LocalKind
from lattice_assoc.weights.models import WeightMatrix

logger = structlog.get_logger()


@dataclass(frozen=True, eq=False)
class PreparedLocal:
    """Centered fields and scale of a local Moran map; zj is what inference permutes."""
    kind: LocalKind
    w: WeightMatrix
    zi: np.ndarray
    zj: np.ndarray
    m2: float
    vars: Tuple[str, ...] = ()
    given: Tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.zi.shape[0]

    def values(self) -> np.ndarray:
        lag = self.w.sparse @ self.zj
        values = self.zi * lag / self.m2
        values[self.w.island_mask()] = 0.0
        return values

    def to_map(self) -> LocalAssocMap:
        islands = self.w.island_mask()
        return LocalAssocMap(
            kind=self.kind,
            values=self.values(),
            island_mask=islands,
            expected=-self.w.row_sums() / (self.n - 1),
            vars=self.vars,
            given=self.given,
        )


def _prepare(
    kind: LocalKind,
    xi,
    xj,
    w: WeightMatrix,
    names: Tuple[str, str],
    given: Tuple[str, ...] = (),
) -> PreparedLocal:
    xi = as_vector(xi, names[0])
    xj = as_vector(xj, names[1])
    if xi.shape[0] != w.n or xj.shape[0] != w.n:
        raise LengthMismatch(
            f"Vectors of length {xi.size}/{xj.size} for a {w.n}-site weight matrix",
            {'expected': w.n, names[0]: int(xi.size), names[1]: int(xj.size)}
        )
    n = w.n
    zi, ss_i = center(xi, names[0])
    if kind == LocalKind.LOCAL_MORAN:
        zj = zi
    else:
        zj, _ = center(xj, names[1])
    vars_ = (names[0],) if kind == LocalKind.LOCAL_MORAN else names
    return PreparedLocal(kind=kind, w=w, zi=zi, zj=zj, m2=ss_i / (n - 1), vars=tuple(vars_), given=tuple(given))


def _finish(prepared: PreparedLocal) -> LocalAssocMap:
    local_map = prepared.to_map()
    islands = int(local_map.island_mask.sum())
    if islands:
        logger.info("Local statistics unavailable at islands", kind=prepared.kind.value, islands=islands)
    record(lambda m: m.statistics_total.labels(kind=prepared.kind.value, variant='local').inc())
    return local_map


def prepare_local_moran(x, w: WeightMatrix, name: str = 'x') -> PreparedLocal:
    return _prepare(LocalKind.LOCAL_MORAN, x, x, w, names=(name, name))


def prepare_local_moran_biv(xi, xj, w: WeightMatrix, names: Tuple[str, str] = ('xi', 'xj')) -> PreparedLocal:
    return _prepare(LocalKind.LOCAL_MORAN_BIV, xi, xj, w, names=names)


def prepare_local_moran_partial(
    table: AttributeTable,
    i: str,
    j: str,
    given: Iterable[str],
    w: WeightMatrix,
) -> PreparedLocal:
    conditioning, field_i, field_j = conditional_pair(table, i, j, given)
    return _prepare(
        LocalKind.LOCAL_MORAN_PARTIAL,
        field_i.values,
        field_j.values,
        w,
        names=(i, j),
        given=tuple(conditioning.given),
    )


def local_moran(x, w: WeightMatrix, name: str = 'x') -> LocalAssocMap:
    """Univariate local Moran's I per site."""
    return _finish(prepare_local_moran(x, w, name))


def local_moran_biv(xi, xj, w: WeightMatrix, names: Tuple[str, str] = ('xi', 'xj')) -> LocalAssocMap:
    """
    Bivariate local Moran: xi at the site against the lag of xj over its neighbours.

    m2 is taken from xi only, so local_moran_biv(x, x) equals local_moran(x).
    """
    return _finish(prepare_local_moran_biv(xi, xj, w, names))


def local_moran_partial(
    table: AttributeTable,
    i: str,
    j: str,
    given: Iterable[str],
    w: WeightMatrix,
) -> LocalAssocMap:
    """Bivariate local Moran of the conditional fields X_{i|c}, X_{j|c}."""
    return _finish(prepare_local_moran_partial(table, i, j, given, w))
