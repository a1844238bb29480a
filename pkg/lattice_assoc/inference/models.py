"""Permutation plans and significance maps."""
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from lattice_assoc.config import settings
from lattice_assoc.errors import InvalidSpec


class Scheme(str, Enum):
    TOTAL = "total"
    CONDITIONAL = "conditional"


class Alternative(str, Enum):
    TWO_SIDED = "two-sided"
    GREATER = "greater"
    LESS = "less"


class PermutationPlan(BaseModel):
    """
    How replicates are drawn.

    Replicate r always draws from the stream seeded by (seed, r), so results
    do not depend on thread count or chunking. With `exhaustive` every
    permutation is enumerated once and `replicates` is ignored.
    """
    replicates: int = Field(default_factory=lambda: settings.permutations, ge=19)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0, lt=2 ** 64)
    scheme: Scheme = Scheme.TOTAL
    alternative: Alternative = Alternative.TWO_SIDED
    exhaustive: bool = False

    @classmethod
    def create(cls, **values) -> 'PermutationPlan':
        """Constructor raising InvalidSpec instead of ValidationError."""
        try:
            return cls(**values)
        except ValidationError as e:
            raise InvalidSpec(f"Invalid permutation plan: {e.errors()[0]['msg']}", {'plan': values}) from None


class QuadrantClass(str, Enum):
    HH = "HH"
    HL = "HL"
    LH = "LH"
    LL = "LL"
    NOT_SIGNIFICANT = "NotSignificant"
    ISLAND = "Island"


# (sign of z-value, sign of z-lag) per significant class
QUADRANT_SIGNS = {
    QuadrantClass.HH: (1.0, 1.0),
    QuadrantClass.HL: (1.0, -1.0),
    QuadrantClass.LH: (-1.0, 1.0),
    QuadrantClass.LL: (-1.0, -1.0),
}


@dataclass(frozen=True, eq=False)
class SignificanceMap:
    """Per-site local value, pseudo p-value (NaN at islands) and quadrant class."""
    ids: Tuple[str, ...]
    values: np.ndarray
    z_values: np.ndarray
    z_lags: np.ndarray
    pseudo_p: np.ndarray
    classes: Tuple[QuadrantClass, ...]
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidSpec("alpha must lie in (0, 1)", {'alpha': self.alpha})
        if len(self.classes) != len(self.ids):
            raise InvalidSpec("one class per site required", {'n': len(self.ids), 'classes': len(self.classes)})

        for a, quadrant in enumerate(self.classes):
            signs = QUADRANT_SIGNS.get(quadrant)
            if signs is None:
                continue
            if not self.pseudo_p[a] <= self.alpha:
                raise InvalidSpec(
                    f"site {self.ids[a]} is {quadrant.value} with pseudo_p above alpha",
                    {'id': self.ids[a], 'pseudo_p': float(self.pseudo_p[a]), 'alpha': self.alpha}
                )
            if (np.sign(self.z_values[a]), np.sign(self.z_lags[a])) != signs:
                raise InvalidSpec(
                    f"site {self.ids[a]} is {quadrant.value} but its z-value/z-lag signs disagree",
                    {'id': self.ids[a], 'z_value': float(self.z_values[a]), 'z_lag': float(self.z_lags[a])}
                )

    @property
    def n(self) -> int:
        return len(self.ids)

    def significant(self) -> np.ndarray:
        return np.array([c not in (QuadrantClass.NOT_SIGNIFICANT, QuadrantClass.ISLAND) for c in self.classes])

    def counts(self) -> Dict[str, int]:
        counter = Counter(c.value for c in self.classes)
        return {c.value: counter.get(c.value, 0) for c in QuadrantClass}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'id': list(self.ids),
            'value': self.values,
            'z_value': self.z_values,
            'z_lag': self.z_lags,
            'pseudo_p': self.pseudo_p,
            'class': [c.value for c in self.classes],
        })
