"""Regular grid lattices of unit squares."""
import numpy as np
from shapely.geometry import box

from lattice_assoc.errors import InvalidSpec
from lattice_assoc.lattice.models import Lattice


def grid_site_id(row: int, col: int) -> str:
    return f"{row}_{col}"


def grid_lattice(rows: int, cols: int, cell_size: float = 1.0) -> Lattice:
    """
    Build a rows x cols lattice of square cells, row-major site order.

    Cell (r, c) covers [c, c+1] x [r, r+1] (times cell_size), so neighbouring
    cells share exact edge coordinates.
    """
    ids = []
    geometries = []
    for row in range(rows):
        for col in range(cols):
            ids.append(grid_site_id(row, col))
            geometries.append(box(
                col * cell_size, row * cell_size,
                (col + 1) * cell_size, (row + 1) * cell_size
            ))
    return Lattice(ids=tuple(ids), geometries=tuple(geometries))


def grid_block(rows: int, cols: int, top: int, left: int, height: int, width: int) -> np.ndarray:
    """Site indices of a height x width block of a rows x cols grid."""
    if height < 1 or width < 1 or top < 0 or left < 0 or top + height > rows or left + width > cols:
        raise InvalidSpec(
            "Block does not fit the grid",
            {'grid': [rows, cols], 'block': [top, left, height, width]}
        )
    return np.array(
        [row * cols + col for row in range(top, top + height) for col in range(left, left + width)],
        dtype=np.intp
    )
