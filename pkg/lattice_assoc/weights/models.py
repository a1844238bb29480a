"""Weight matrix and neighbour specification models."""
import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, PositiveInt, ValidationError, model_validator

from lattice_assoc.errors import InvalidSpec


class Standardization(str, Enum):
    BINARY = "binary"
    ROW = "row"


class NeighborMethod(str, Enum):
    QUEEN = "queen"
    ROOK = "rook"
    KNN = "knn"
    DISTANCE_THRESHOLD = "dist"
    DISTANCE_BAND = "band"
    HIGHER_ORDER = "order"


class NeighborSpec(BaseModel):
    """
    Neighbourhood criterion for building W.

    Inline form (CLI): queen | rook | knn:<k> | dist:<threshold> |
    band:<lower>,<upper>, optionally suffixed by @<order> for an exclusive
    higher-order neighbourhood of that base (e.g. rook@2).
    """
    method: NeighborMethod = NeighborMethod.QUEEN
    k: Optional[PositiveInt] = None
    threshold: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    base: Optional['NeighborSpec'] = None
    order: Optional[PositiveInt] = None

    @model_validator(mode='after')
    def _check_parameters(self) -> 'NeighborSpec':
        method = self.method
        if method == NeighborMethod.KNN and self.k is None:
            raise ValueError("knn requires k")
        if method == NeighborMethod.DISTANCE_THRESHOLD:
            if self.threshold is None or not self.threshold > 0:
                raise ValueError("dist requires a positive threshold")
        if method == NeighborMethod.DISTANCE_BAND:
            if self.lower is None or self.upper is None:
                raise ValueError("band requires lower and upper bounds")
            if self.lower < 0 or not self.upper > 0:
                raise ValueError("band bounds must satisfy 0 <= lower, 0 < upper")
            if not self.lower < self.upper:
                raise ValueError("band requires lower < upper")
        if method == NeighborMethod.HIGHER_ORDER:
            if self.base is None or self.order is None:
                raise ValueError("higher order requires a base spec and an order")
        return self

    @classmethod
    def queen(cls) -> 'NeighborSpec':
        return cls(method=NeighborMethod.QUEEN)

    @classmethod
    def rook(cls) -> 'NeighborSpec':
        return cls(method=NeighborMethod.ROOK)

    @classmethod
    def knn(cls, k: int) -> 'NeighborSpec':
        return cls(method=NeighborMethod.KNN, k=k)

    @classmethod
    def distance_threshold(cls, threshold: float) -> 'NeighborSpec':
        return cls(method=NeighborMethod.DISTANCE_THRESHOLD, threshold=threshold)

    @classmethod
    def distance_band(cls, lower: float, upper: float) -> 'NeighborSpec':
        return cls(method=NeighborMethod.DISTANCE_BAND, lower=lower, upper=upper)

    @classmethod
    def higher(cls, base: 'NeighborSpec', order: int) -> 'NeighborSpec':
        return cls(method=NeighborMethod.HIGHER_ORDER, base=base, order=order)

    @classmethod
    def parse(cls, text: str) -> 'NeighborSpec':
        """
        Parse the inline CLI form.

        Raises:
            InvalidSpec: unknown method or invalid parameters.
        """
        raw = text.strip().lower()
        order = None
        if '@' in raw:
            raw, _, order_text = raw.partition('@')
            if not re.fullmatch(r'\d+', order_text):
                raise InvalidSpec(f"Invalid neighbourhood order in '{text}'", {'spec': text})
            order = int(order_text)

        method, _, params = raw.partition(':')
        try:
            if method == 'queen' and not params:
                spec = cls.queen()
            elif method == 'rook' and not params:
                spec = cls.rook()
            elif method == 'knn':
                spec = cls.knn(int(params))
            elif method == 'dist':
                spec = cls.distance_threshold(float(params))
            elif method == 'band':
                lower, upper = params.split(',')
                spec = cls.distance_band(float(lower), float(upper))
            else:
                raise InvalidSpec(f"Unknown weight spec: '{text}'", {'spec': text})
            if order is not None and order > 1:
                spec = cls.higher(spec, order)
        except (ValueError, ValidationError) as e:
            raise InvalidSpec(f"Invalid weight spec '{text}': {e}", {'spec': text}) from None
        return spec

    def label(self) -> str:
        """Inverse of parse()."""
        if self.method == NeighborMethod.HIGHER_ORDER:
            return f"{self.base.label()}@{self.order}"
        if self.method == NeighborMethod.KNN:
            return f"knn:{self.k}"
        if self.method == NeighborMethod.DISTANCE_THRESHOLD:
            return f"dist:{self.threshold:g}"
        if self.method == NeighborMethod.DISTANCE_BAND:
            return f"band:{self.lower:g},{self.upper:g}"
        return self.method.value


NeighborSpec.model_rebuild()


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """
    Sparse n x n proximity matrix W.

    The diagonal is always zero. The matrix is immutable once built; every
    transform returns a new WeightMatrix.
    """
    sparse: sp.csr_matrix
    standardization: Standardization = Standardization.BINARY
    ids: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        matrix = sp.csr_matrix(self.sparse, dtype=float, copy=True)
        if matrix.shape[0] != matrix.shape[1]:
            raise InvalidSpec("Weight matrix must be square", {'shape': list(matrix.shape)})
        if np.any(matrix.data < 0) or not np.all(np.isfinite(matrix.data)):
            raise InvalidSpec("Weights must be finite and nonnegative")
        # w_ii = 0
        matrix = sp.csr_matrix(matrix - sp.diags(matrix.diagonal()))
        matrix.eliminate_zeros()
        matrix.sort_indices()
        object.__setattr__(self, 'sparse', matrix)
        if self.ids is not None:
            ids = tuple(self.ids)
            if len(ids) != matrix.shape[0]:
                raise InvalidSpec("Id count does not match matrix size")
            object.__setattr__(self, 'ids', ids)

    @classmethod
    def from_pairs(
        cls,
        n: int,
        rows,
        cols,
        ids: Optional[Tuple[str, ...]] = None,
    ) -> 'WeightMatrix':
        """Binary matrix with w_ij = 1 for each directed (i, j) pair."""
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        keep = rows != cols
        matrix = sp.csr_matrix(
            (np.ones(int(keep.sum())), (rows[keep], cols[keep])), shape=(n, n)
        )
        # duplicate pairs are summed by the constructor; clamp back to binary
        matrix.data[:] = 1.0
        return cls(sparse=matrix, standardization=Standardization.BINARY, ids=ids)

    @property
    def n(self) -> int:
        return self.sparse.shape[0]

    @property
    def nnz(self) -> int:
        return self.sparse.nnz

    @property
    def symmetric(self) -> bool:
        """True iff w_ij == w_ji for every pair."""
        diff = self.sparse - self.sparse.T
        return diff.count_nonzero() == 0

    @property
    def s0(self) -> float:
        """Sum of all weights."""
        return float(np.sum(self.sparse.data))

    @property
    def s1(self) -> float:
        """1/2 sum_ij (w_ij + w_ji)^2."""
        both = self.sparse + self.sparse.T
        return float(0.5 * np.sum(both.data ** 2))

    @property
    def s2(self) -> float:
        """sum_k (row sum_k + column sum_k)^2."""
        return float(np.sum((self.row_sums() + self.col_sums()) ** 2))

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.sparse.sum(axis=1)).ravel()

    def col_sums(self) -> np.ndarray:
        return np.asarray(self.sparse.sum(axis=0)).ravel()

    def cardinalities(self) -> np.ndarray:
        """Number of neighbours of each site."""
        return np.diff(self.sparse.indptr)

    def islands(self) -> np.ndarray:
        """Indices of sites without neighbours."""
        return np.flatnonzero(self.cardinalities() == 0)

    def island_mask(self) -> np.ndarray:
        return self.cardinalities() == 0

    def neighbors(self, i: int) -> np.ndarray:
        start, end = self.sparse.indptr[i], self.sparse.indptr[i + 1]
        return self.sparse.indices[start:end]

    def entries(self) -> List[Tuple[int, int, float]]:
        """Stored (i, j, w) triples in row-major order."""
        coo = self.sparse.tocoo()
        return [(int(i), int(j), float(v)) for i, j, v in zip(coo.row, coo.col, coo.data)]

    def pairs(self) -> set:
        """Set of directed (i, j) index pairs with nonzero weight."""
        return {(i, j) for i, j, _ in self.entries()}

    def dense(self) -> np.ndarray:
        return self.sparse.toarray()
