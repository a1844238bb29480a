"""Simulation specifications."""
from pydantic import BaseModel, Field, PositiveFloat, ValidationError

from lattice_assoc.config import settings
from lattice_assoc.errors import InvalidSpec


class SarSpec(BaseModel):
    """x = (I - rho W)^-1 eps, eps ~ N(0, noise_sd^2)."""
    rho: float = Field(default=0.0, gt=-1.0, lt=1.0)
    noise_sd: PositiveFloat = 1.0
    seed: int = Field(default_factory=lambda: settings.seed, ge=0, lt=2 ** 64)

    @classmethod
    def create(cls, **values):
        try:
            return cls(**values)
        except ValidationError as e:
            raise InvalidSpec(f"Invalid simulation spec: {e.errors()[0]['msg']}", {'spec': values}) from None


class CommonDriverSpec(SarSpec):
    """
    z is a SAR field with innovation sd `driver_sd`; xi = a z + e_i and
    xj = b z + e_j with independent N(0, noise_sd^2) noise.
    """
    a: float = 1.0
    b: float = 1.0
    driver_sd: PositiveFloat = 1.0
