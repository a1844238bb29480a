"""Domain model for the lattice, its sites and the attributes observed on them."""
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from shapely.geometry.base import BaseGeometry

from lattice_assoc.errors import (
    DuplicateId,
    InvalidSpec,
    LengthMismatch,
    MissingGeometry,
    MissingSite,
    NonNumericValue,
    UnknownSite,
    UnknownVariable,
)

SiteId = str


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Lattice:
    """
    Ordered set of sites with optional polygon geometry and centroids.

    Site order is fixed at construction and defines index 0..n-1 of every
    vector and matrix built on the lattice.
    """
    ids: Tuple[SiteId, ...]
    geometries: Optional[Tuple[Optional[BaseGeometry], ...]] = None
    centroids: Optional[np.ndarray] = None  # (n, 2); NaN rows = not stored
    _index: Dict[SiteId, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(str(site) for site in self.ids)
        object.__setattr__(self, 'ids', ids)

        if len(ids) < 2:
            raise InvalidSpec("A lattice needs at least two sites", {'n': len(ids)})

        index: Dict[SiteId, int] = {}
        for position, site in enumerate(ids):
            if not site:
                raise InvalidSpec("Site ids must be non-empty", {'position': position})
            if site in index:
                raise DuplicateId(f"Duplicate site id: {site}", {'id': site})
            index[site] = position
        object.__setattr__(self, '_index', index)

        if self.geometries is not None:
            geometries = tuple(self.geometries)
            if len(geometries) != len(ids):
                raise LengthMismatch(
                    "Geometry count does not match site count",
                    {'sites': len(ids), 'geometries': len(geometries)}
                )
            for site, geom in zip(ids, geometries):
                if geom is not None and geom.geom_type not in ('Polygon', 'MultiPolygon'):
                    raise InvalidSpec(
                        f"Site {site} geometry must be a Polygon or MultiPolygon",
                        {'id': site, 'geom_type': geom.geom_type}
                    )
            object.__setattr__(self, 'geometries', geometries)

        if self.centroids is not None:
            centroids = np.array(self.centroids, dtype=float).reshape(-1, 2)
            if centroids.shape[0] != len(ids):
                raise LengthMismatch(
                    "Centroid count does not match site count",
                    {'sites': len(ids), 'centroids': centroids.shape[0]}
                )
            object.__setattr__(self, 'centroids', _frozen(centroids))

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, site: SiteId) -> int:
        """Matrix/vector index of a site."""
        try:
            return self._index[str(site)]
        except KeyError:
            raise UnknownSite(f"Unknown site id: {site}", {'id': str(site)}) from None

    def geometry(self, site: SiteId) -> Optional[BaseGeometry]:
        if self.geometries is None:
            return None
        return self.geometries[self.index(site)]

    def centroid(self, site: SiteId) -> Tuple[float, float]:
        """
        Stored centroid of a site, or the area-weighted centroid of its polygon.

        Multi-polygon sites use the area-weighted mean of the part centroids.

        Raises:
            MissingGeometry: neither a stored centroid nor a polygon is available.
        """
        i = self.index(site)
        if self.centroids is not None and np.all(np.isfinite(self.centroids[i])):
            return float(self.centroids[i, 0]), float(self.centroids[i, 1])

        geom = self.geometry(site)
        if geom is None or geom.is_empty or geom.area <= 0:
            raise MissingGeometry(f"No centroid or polygon for site {site}", {'id': self.ids[i]})
        point = geom.centroid
        return float(point.x), float(point.y)

    def centroid_array(self) -> np.ndarray:
        """All centroids as an (n, 2) array in site order."""
        return np.array([self.centroid(site) for site in self.ids], dtype=float)

    def has_geometry(self) -> bool:
        return self.geometries is not None and all(g is not None for g in self.geometries)


@dataclass(frozen=True, eq=False)
class AttributeTable:
    """d named real-valued variables observed over the n sites of a lattice."""
    lattice: Lattice
    names: Tuple[str, ...]
    values: np.ndarray  # (n, d), site order

    def __post_init__(self):
        names = tuple(self.names)
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)

        if not names:
            raise InvalidSpec("An attribute table needs at least one variable")
        if len(set(names)) != len(names):
            raise InvalidSpec("Variable names must be unique", {'names': list(names)})
        if values.shape != (self.lattice.n, len(names)):
            raise LengthMismatch(
                "Attribute values do not match lattice size",
                {'expected': [self.lattice.n, len(names)], 'got': list(values.shape)}
            )
        if not np.all(np.isfinite(values)):
            row, col = np.argwhere(~np.isfinite(values))[0]
            raise NonNumericValue(
                f"Non-finite value for site {self.lattice.ids[row]}, variable {names[col]}",
                {'id': self.lattice.ids[row], 'variable': names[col]}
            )

        object.__setattr__(self, 'names', names)
        object.__setattr__(self, 'values', _frozen(values))

    @classmethod
    def from_columns(cls, lattice: Lattice, columns: Mapping[str, Sequence[float]]) -> 'AttributeTable':
        """Build from vectors already in lattice site order."""
        names = tuple(columns)
        if not names:
            raise InvalidSpec("An attribute table needs at least one variable")
        vectors = []
        for name in names:
            vector = np.asarray(columns[name], dtype=float)
            if vector.shape != (lattice.n,):
                raise LengthMismatch(
                    f"Variable {name} has length {vector.size}, lattice has {lattice.n} sites",
                    {'variable': name, 'expected': lattice.n, 'got': int(vector.size)}
                )
            vectors.append(vector)
        return cls(lattice=lattice, names=names, values=np.column_stack(vectors))

    @classmethod
    def from_records(
        cls,
        lattice: Lattice,
        ids: Sequence[SiteId],
        columns: Mapping[str, Sequence[float]]
    ) -> 'AttributeTable':
        """
        Build from rows in arbitrary order, aligned to the lattice's site order.

        Raises:
            UnknownSite / DuplicateId / MissingSite on id mismatches.
        """
        ids = [str(site) for site in ids]
        order = np.empty(len(ids), dtype=np.intp)
        seen = set()
        for row, site in enumerate(ids):
            if site in seen:
                raise DuplicateId(f"Site {site} appears more than once", {'id': site, 'row': row})
            seen.add(site)
            order[row] = lattice.index(site)

        missing = [site for site in lattice.ids if site not in seen]
        if missing:
            raise MissingSite(
                f"{len(missing)} lattice sites have no attribute row",
                {'missing': missing[:20]}
            )

        aligned = {}
        for name, vector in columns.items():
            vector = np.asarray(vector, dtype=float)
            if vector.shape != (len(ids),):
                raise LengthMismatch(
                    f"Variable {name} has {vector.size} values for {len(ids)} rows",
                    {'variable': name}
                )
            out = np.empty(lattice.n, dtype=float)
            out[order] = vector
            aligned[name] = out
        return cls.from_columns(lattice, aligned)

    @property
    def d(self) -> int:
        return len(self.names)

    def variable(self, name: str) -> np.ndarray:
        """
        Value vector of a variable in site order (read-only view).

        Raises:
            UnknownVariable: name not in the table.
        """
        try:
            column = self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"Unknown variable: {name}", {'name': name, 'known': list(self.names)}) from None
        return self.values[:, column]

    def matrix(self, names: Iterable[str]) -> np.ndarray:
        """(n, k) matrix of the named variables; k may be 0."""
        names = list(names)
        if not names:
            return np.empty((self.lattice.n, 0), dtype=float)
        return np.column_stack([self.variable(name) for name in names])
