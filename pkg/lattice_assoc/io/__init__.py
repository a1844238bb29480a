"""Reading lattices and attributes; writing results."""
from lattice_assoc.io.attributes import read_attributes, write_attributes
from lattice_assoc.io.geojson import enrich_geojson, read_geojson, write_lattice_geojson
from lattice_assoc.io.results import write_local_csv, write_result_json, write_significance_csv

__all__ = [
    'enrich_geojson',
    'read_attributes',
    'read_geojson',
    'write_attributes',
    'write_lattice_geojson',
    'write_local_csv',
    'write_result_json',
    'write_significance_csv',
]
