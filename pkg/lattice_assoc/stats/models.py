"""Result and conditioning models for association statistics."""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from lattice_assoc.errors import InvalidSpec
from lattice_assoc.lattice.models import AttributeTable

SPEC_VERSION = 1


class AssocKind(str, Enum):
    MORAN_I = "moran_i"
    GEARY_C = "geary_c"


class Variant(str, Enum):
    UNIVARIATE = "univariate"
    BIVARIATE = "bivariate"
    PARTIAL = "partial"
    SEMI_PARTIAL = "semipartial"


class Conditioning(str, Enum):
    """How a partial/semi-partial value was obtained."""
    RESIDUAL = "residual"
    RECURSION = "recursion"


class AssocResult(BaseModel):
    """A global statistic with its null moments and optional inference."""
    statistic: float
    kind: AssocKind
    variant: Variant
    vars: List[str] = Field(default_factory=list)
    given: List[str] = Field(default_factory=list)
    conditioning: Optional[Conditioning] = None
    null_mean: Optional[float] = None
    null_variance: Optional[float] = Field(default=None, ge=0.0)
    z_score: Optional[float] = None
    p_norm: Optional[float] = None
    n: int
    s0: float

    # permutation inference
    pseudo_p: Optional[float] = None
    replicates: Optional[int] = None
    alternative: Optional[str] = None
    replicate_mean: Optional[float] = None
    replicate_sd: Optional[float] = None

    def to_record(self) -> Dict[str, Any]:
        """JSON record for result files."""
        record = {'spec_version': SPEC_VERSION}
        record.update(self.model_dump(mode='json'))
        return record


class LocalKind(str, Enum):
    LOCAL_MORAN = "local_moran"
    LOCAL_MORAN_BIV = "local_moran_biv"
    LOCAL_MORAN_PARTIAL = "local_moran_partial"


@dataclass(frozen=True, eq=False)
class LocalAssocMap:
    """
    Per-site local statistics.

    `values` is 0 at islands; `island_mask` marks them so they are reported
    as not available rather than as weak association.
    """
    kind: LocalKind
    values: np.ndarray
    island_mask: np.ndarray
    expected: np.ndarray
    vars: Tuple[str, ...] = ()
    given: Tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_frame(self, ids) -> pd.DataFrame:
        """One row per site: id, value, expected, island."""
        return pd.DataFrame({
            "id": list(ids),
            "value": self.values,
            "expected": self.expected,
            "island": self.island_mask.astype(bool),
        })

    def available(self) -> np.ndarray:
        """Values with NaN at islands."""
        out = self.values.astype(float).copy()
        out[self.island_mask] = np.nan
        return out


class ConditioningSet(BaseModel):
    """Target pair (i, j) and the ordered conditioning variables c."""
    targets: Tuple[str, str]
    given: List[str] = Field(default_factory=list)

    @model_validator(mode='after')
    def _check_disjoint(self) -> 'ConditioningSet':
        i, j = self.targets
        if i == j:
            raise ValueError("conditioning targets must differ")
        if i in self.given or j in self.given:
            raise ValueError("targets cannot appear in the conditioning set")
        if len(set(self.given)) != len(self.given):
            raise ValueError("conditioning variables must be unique")
        return self

    @classmethod
    def create(cls, i: str, j: str, given) -> 'ConditioningSet':
        """Validated constructor raising InvalidSpec instead of ValidationError."""
        try:
            return cls(targets=(i, j), given=list(given or []))
        except ValueError as e:
            raise InvalidSpec(f"Invalid conditioning set: {e}", {'i': i, 'j': j, 'given': list(given or [])}) from None

    def check(self, table: AttributeTable) -> 'ConditioningSet':
        """All names must exist in the table (raises UnknownVariable)."""
        for name in (*self.targets, *self.given):
            table.variable(name)
        return self


@dataclass(frozen=True, eq=False)
class ConditionalField:
    """X_{i|c}: a target variable with the conditioning set projected out."""
    name: str
    values: np.ndarray
    mean: float
    given: Tuple[str, ...] = ()
