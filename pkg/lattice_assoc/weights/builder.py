"""
Weight builder: contiguity, k-nearest-neighbour and distance criteria.

Contiguity uses an STR-tree over the site polygons to find candidate pairs,
then tests the shared boundary: queen needs at least one common point, rook
a common segment of positive length. Distance criteria use a KD-tree over
the site centroids (planar coordinates).
"""
from typing import Optional

import numpy as np
import shapely
import structlog
from scipy.spatial import KDTree
from shapely import STRtree

from lattice_assoc.config import settings
from lattice_assoc.errors import DegenerateLattice, InvalidSpec, MissingGeometry
from lattice_assoc.lattice.models import Lattice
from lattice_assoc.observability import record
from lattice_assoc.weights.models import NeighborMethod, NeighborSpec, WeightMatrix
from lattice_assoc.weights.transforms import higher_order

logger = structlog.get_logger()


def build_weights(
    lattice: Lattice,
    spec: NeighborSpec,
    tolerance: Optional[float] = None,
    strict: Optional[bool] = None,
    n_jobs: Optional[int] = None,
) -> WeightMatrix:
    """
    Build a binary weight matrix for a lattice.

    Args:
        lattice: Sites with geometry (contiguity) or centroids (distance methods)
        spec: Neighbourhood criterion
        tolerance: Coordinate snapping grid for contiguity (0 = exact)
        strict: Raise DegenerateLattice when no pair is linked
        n_jobs: Worker count for KD-tree queries

    Returns:
        Binary WeightMatrix in lattice site order
    """
    tolerance = settings.contiguity_tolerance if tolerance is None else tolerance
    strict = settings.strict_weights if strict is None else strict
    n_jobs = settings.n_jobs if n_jobs is None else n_jobs

    method = spec.method
    if method in (NeighborMethod.QUEEN, NeighborMethod.ROOK):
        w = _contiguity(lattice, rook=method == NeighborMethod.ROOK, tolerance=tolerance)
    elif method == NeighborMethod.KNN:
        w = _knn(lattice, spec.k, n_jobs)
    elif method == NeighborMethod.DISTANCE_THRESHOLD:
        w = _distance(lattice, lower=None, upper=spec.threshold, n_jobs=n_jobs)
    elif method == NeighborMethod.DISTANCE_BAND:
        w = _distance(lattice, lower=spec.lower, upper=spec.upper, n_jobs=n_jobs)
    elif method == NeighborMethod.HIGHER_ORDER:
        base = build_weights(lattice, spec.base, tolerance=tolerance, strict=False, n_jobs=n_jobs)
        w = higher_order(base, spec.order)
    else:
        raise InvalidSpec(f"Unsupported neighbour method: {method}")

    islands = w.islands()
    if w.nnz == 0 and strict:
        raise DegenerateLattice(
            f"Weight spec {spec.label()} links no pair of sites",
            {'spec': spec.label(), 'n': lattice.n}
        )
    if islands.size:
        logger.warning(
            "Weight matrix has islands",
            spec=spec.label(),
            islands=[lattice.ids[i] for i in islands[:20]],
            count=int(islands.size)
        )

    record(lambda m: m.weights_built_total.labels(method=method.value).inc())
    record(lambda m: m.islands_total.inc(int(islands.size)))
    logger.info(
        "Weights built",
        spec=spec.label(),
        n=w.n,
        nnz=w.nnz,
        symmetric=w.symmetric
    )
    return w


def _geometries(lattice: Lattice) -> np.ndarray:
    if not lattice.has_geometry():
        missing = [site for site, geom in zip(lattice.ids, lattice.geometries or [None] * lattice.n)
                   if geom is None]
        raise MissingGeometry(
            "Contiguity weights need a polygon for every site",
            {'missing': missing[:20]}
        )
    return np.array(lattice.geometries, dtype=object)


def _contiguity(lattice: Lattice, rook: bool, tolerance: float) -> WeightMatrix:
    geoms = _geometries(lattice)
    if tolerance > 0:
        geoms = shapely.set_precision(geoms, grid_size=tolerance)

    tree = STRtree(geoms)
    left, right = tree.query(geoms, predicate='intersects')
    keep = left < right
    left, right = left[keep], right[keep]

    boundaries = shapely.boundary(geoms)
    shared = shapely.intersection(boundaries[left], boundaries[right])
    if rook:
        linked = shapely.length(shared) > 0
    else:
        linked = ~shapely.is_empty(shared)

    i, j = left[linked], right[linked]
    return WeightMatrix.from_pairs(
        lattice.n,
        np.concatenate([i, j]),
        np.concatenate([j, i]),
        ids=lattice.ids
    )


def _knn(lattice: Lattice, k: int, n_jobs: int) -> WeightMatrix:
    """
    Link each site to its k nearest other sites by centroid distance.

    Ties in distance are broken by ascending site index, so every site gets
    exactly k neighbours regardless of KD-tree traversal order.
    """
    n = lattice.n
    if k > n - 1:
        raise InvalidSpec(f"knn:{k} needs at least {k + 1} sites", {'k': k, 'n': n})

    points = lattice.centroid_array()
    tree = KDTree(points)
    distances, _ = tree.query(points, k=k + 1, workers=n_jobs)
    kth = distances[:, -1]

    # candidates include every site tied with the k-th distance
    radius = kth * (1.0 + 1e-9) + 1e-12
    candidates = tree.query_ball_point(points, r=radius, workers=n_jobs)

    rows, cols = [], []
    for i, found in enumerate(candidates):
        found = np.asarray([j for j in found if j != i], dtype=np.intp)
        d = np.hypot(*(points[found] - points[i]).T)
        order = np.lexsort((found, d))
        chosen = found[order[:k]]
        rows.extend([i] * len(chosen))
        cols.extend(chosen.tolist())

    return WeightMatrix.from_pairs(n, rows, cols, ids=lattice.ids)


def _distance(
    lattice: Lattice,
    lower: Optional[float],
    upper: float,
    n_jobs: int
) -> WeightMatrix:
    """
    Threshold (lower is None): d <= upper. Band: lower <= d < upper.
    """
    points = lattice.centroid_array()
    tree = KDTree(points)
    # widened search radius; the exact comparison below decides membership
    pairs = tree.query_pairs(r=upper * (1.0 + 1e-9), output_type='ndarray')
    if pairs.size == 0:
        return WeightMatrix.from_pairs(lattice.n, [], [], ids=lattice.ids)

    i, j = pairs[:, 0], pairs[:, 1]
    d = np.hypot(*(points[i] - points[j]).T)
    if lower is None:
        linked = d <= upper
    else:
        linked = (d >= lower) & (d < upper)
    i, j = i[linked], j[linked]
    return WeightMatrix.from_pairs(
        lattice.n,
        np.concatenate([i, j]),
        np.concatenate([j, i]),
        ids=lattice.ids
    )
