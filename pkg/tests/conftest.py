"""Pytest configuration and fixtures."""
import json

import numpy as np
import pytest

from lattice_assoc.lattice import AttributeTable, grid_lattice
from lattice_assoc.weights import NeighborSpec, build_weights, row_standardize


@pytest.fixture
def grid_2x2():
    """2x2 grid, sites (0,0), (0,1), (1,0), (1,1)."""
    return grid_lattice(2, 2)


@pytest.fixture
def rook_2x2(grid_2x2):
    """Binary rook weights on the 2x2 grid."""
    return build_weights(grid_2x2, NeighborSpec.rook())


@pytest.fixture
def checkerboard():
    """Checkerboard values on the 2x2 grid."""
    return np.array([1.0, -1.0, -1.0, 1.0])


@pytest.fixture
def grid_10x10():
    return grid_lattice(10, 10)


@pytest.fixture
def queen_10x10(grid_10x10):
    """Row-standardized queen weights on a 10x10 grid."""
    return row_standardize(build_weights(grid_10x10, NeighborSpec.queen()))


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def triple_table(grid_10x10, rng):
    """Three correlated variables x, y, z on the 10x10 grid."""
    z = rng.standard_normal(100)
    x = 0.8 * z + rng.standard_normal(100)
    y = -0.5 * z + rng.standard_normal(100)
    return AttributeTable.from_columns(grid_10x10, {'x': x, 'y': y, 'z': z})


def write_grid_geojson(path, rows, cols, extra=None):
    """Grid FeatureCollection with ids r_c and optional extra properties."""
    features = []
    for r in range(rows):
        for c in range(cols):
            properties = {'id': f"{r}_{c}"}
            if extra:
                properties.update(extra)
            features.append({
                'type': 'Feature',
                'properties': properties,
                'geometry': {
                    'type': 'Polygon',
                    'coordinates': [[[c, r], [c + 1, r], [c + 1, r + 1], [c, r + 1], [c, r]]],
                },
            })
    path.write_text(json.dumps({'type': 'FeatureCollection', 'features': features}))
    return path


@pytest.fixture
def geojson_2x2(tmp_path):
    return write_grid_geojson(tmp_path / "grid.geojson", 2, 2, extra={'name': 'cell'})
