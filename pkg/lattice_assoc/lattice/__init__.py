"""Lattice sites, geometry and attribute tables."""
from lattice_assoc.lattice.grid import grid_block, grid_lattice, grid_site_id
from lattice_assoc.lattice.models import AttributeTable, Lattice, SiteId

__all__ = ['AttributeTable', 'Lattice', 'SiteId', 'grid_block', 'grid_lattice', 'grid_site_id']
