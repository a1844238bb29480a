"""Synthetic lattice fields with known spatial structure."""
from lattice_assoc.synthetic.models import CommonDriverSpec, SarSpec
from lattice_assoc.synthetic.sar import (
    check_rho,
    plant_hotspot,
    sar_solve,
    simulate_common_driver,
    simulate_sar,
    spectral_radius,
)

__all__ = [
    'CommonDriverSpec',
    'SarSpec',
    'check_rho',
    'plant_hotspot',
    'sar_solve',
    'simulate_common_driver',
    'simulate_sar',
    'spectral_radius',
]
