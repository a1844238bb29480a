"""Tests for weight construction, transforms and GAL/GWT files."""
import numpy as np
import pytest
from shapely.geometry import box

from lattice_assoc.errors import DegenerateLattice, InvalidSpec, LengthMismatch, ParseError, UnknownSite
from lattice_assoc.lattice import Lattice, grid_lattice
from lattice_assoc.weights import (
    NeighborSpec,
    Standardization,
    WeightMatrix,
    build_weights,
    higher_order,
    read_gal,
    read_gwt,
    row_standardize,
    spatial_lag,
    symmetrize_union,
    write_gal,
    write_gwt,
)


@pytest.fixture
def grid_3x3():
    return grid_lattice(3, 3)


def test_rook_and_queen_cardinalities(grid_3x3):
    """Test corner, edge and center neighbour counts."""
    rook = build_weights(grid_3x3, NeighborSpec.rook())
    queen = build_weights(grid_3x3, NeighborSpec.queen())

    np.testing.assert_array_equal(rook.cardinalities(), [2, 3, 2, 3, 4, 3, 2, 3, 2])
    np.testing.assert_array_equal(queen.cardinalities(), [3, 5, 3, 5, 8, 5, 3, 5, 3])
    assert rook.symmetric and queen.symmetric
    assert rook.pairs() <= queen.pairs()
    assert set(rook.neighbors(4)) == {1, 3, 5, 7}


def test_contiguity_rook_excludes_corner_touch():
    """Test two squares touching at a corner: queen yes, rook no."""
    lattice = Lattice(ids=('a', 'b'), geometries=(box(0, 0, 1, 1), box(1, 1, 2, 2)))

    assert build_weights(lattice, NeighborSpec.queen()).nnz == 2
    assert build_weights(lattice, NeighborSpec.rook()).nnz == 0


def test_contiguity_tolerance_snaps_gaps():
    """Test a tiny gap is closed by the snapping tolerance."""
    lattice = Lattice(ids=('a', 'b'), geometries=(box(0, 0, 1, 1), box(1.0000001, 0, 2, 1)))

    assert build_weights(lattice, NeighborSpec.rook(), tolerance=0.0).nnz == 0
    assert build_weights(lattice, NeighborSpec.rook(), tolerance=1e-3).nnz == 2


def test_strict_mode_raises_on_empty(grid_3x3):
    """Test DegenerateLattice for an all-island matrix under strict mode."""
    spec = NeighborSpec.distance_threshold(0.5)

    assert build_weights(grid_3x3, spec).nnz == 0
    with pytest.raises(DegenerateLattice):
        build_weights(grid_3x3, spec, strict=True)


def test_knn_tie_break_by_index(grid_3x3):
    """Test exactly k neighbours with ties resolved by lower index."""
    w = build_weights(grid_3x3, NeighborSpec.knn(2))

    np.testing.assert_array_equal(w.cardinalities(), [2] * 9)
    assert set(w.neighbors(4)) == {1, 3}
    assert w.nnz == 18


def test_knn_too_large(grid_3x3):
    with pytest.raises(InvalidSpec):
        build_weights(grid_3x3, NeighborSpec.knn(9))


def test_distance_threshold_inclusive(grid_3x3):
    """Test d <= threshold: 1 gives rook, 1.5 gives queen."""
    rook = build_weights(grid_3x3, NeighborSpec.rook())
    queen = build_weights(grid_3x3, NeighborSpec.queen())

    assert build_weights(grid_3x3, NeighborSpec.distance_threshold(1.0)).pairs() == rook.pairs()
    assert build_weights(grid_3x3, NeighborSpec.distance_threshold(1.5)).pairs() == queen.pairs()


def test_distance_band_half_open(grid_3x3):
    """Test lower <= d < upper."""
    diagonal = build_weights(grid_3x3, NeighborSpec.distance_band(1.2, 1.5))
    assert diagonal.pairs() == build_weights(grid_3x3, NeighborSpec.queen()).pairs() - \
        build_weights(grid_3x3, NeighborSpec.rook()).pairs()

    # upper bound excluded
    assert build_weights(grid_3x3, NeighborSpec.distance_band(0.5, 1.0)).nnz == 0


@pytest.mark.parametrize("threshold", [1.0, 1.5, 2.0])
def test_distance_threshold_equals_band_from_zero(grid_3x3, threshold):
    """Test d <= t matches 0 <= d < t+ for t+ just above t."""
    inclusive = build_weights(grid_3x3, NeighborSpec.distance_threshold(threshold))
    band = build_weights(grid_3x3, NeighborSpec.distance_band(0.0, threshold + 1e-9))

    assert inclusive.pairs() == band.pairs()
    assert inclusive.nnz > 0


def test_higher_order_is_exclusive():
    """Test rook@2 on a 1x5 strip links only sites two steps apart."""
    strip = grid_lattice(1, 5)
    w = build_weights(strip, NeighborSpec.parse("rook@2"))

    assert w.pairs() == {(0, 2), (2, 0), (1, 3), (3, 1), (2, 4), (4, 2)}
    assert higher_order(build_weights(strip, NeighborSpec.rook()), 4).pairs() == {(0, 4), (4, 0)}


def test_weight_matrix_invariants():
    """Test zero diagonal and rejection of negative weights."""
    w = WeightMatrix(sparse=np.array([[5.0, 1.0], [1.0, 0.0]]))
    assert w.dense()[0, 0] == 0.0
    assert w.s0 == 2.0

    with pytest.raises(InvalidSpec):
        WeightMatrix(sparse=np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_weight_sums_on_k3():
    """Test S0, S1, S2 on the complete graph K3."""
    w = WeightMatrix(sparse=np.ones((3, 3)) - np.eye(3))

    assert (w.s0, w.s1, w.s2) == (6.0, 12.0, 48.0)


def test_row_standardize_and_islands():
    """Test rows sum to one and islands stay empty."""
    w = WeightMatrix.from_pairs(3, [0, 1], [1, 0])
    standardized = row_standardize(w)

    np.testing.assert_allclose(standardized.row_sums(), [1.0, 1.0, 0.0])
    assert standardized.standardization == Standardization.ROW
    np.testing.assert_array_equal(standardized.islands(), [2])


def test_row_standardize_is_idempotent(rng):
    """Test row sums land in {0, 1} and a second pass changes nothing."""
    dense = rng.uniform(0.1, 3.0, size=(12, 12)) * (rng.uniform(size=(12, 12)) < 0.4)
    dense[5] = 0.0
    once = row_standardize(WeightMatrix(sparse=dense))
    twice = row_standardize(once)

    sums = once.row_sums()
    assert np.all(np.isclose(sums, 0.0) | np.isclose(sums, 1.0, atol=1e-15))
    assert sums[5] == 0.0
    np.testing.assert_allclose(twice.dense(), once.dense(), rtol=0, atol=1e-15)


def test_symmetrize_union():
    w = WeightMatrix.from_pairs(3, [0, 1], [1, 2])
    union = symmetrize_union(w)

    assert union.symmetric
    assert union.pairs() == {(0, 1), (1, 0), (1, 2), (2, 1)}


def test_spatial_lag(rook_2x2):
    """Test lag values and length check."""
    lag = spatial_lag(row_standardize(rook_2x2), [1.0, 2.0, 3.0, 4.0])

    np.testing.assert_allclose(lag, [2.5, 2.5, 2.5, 2.5])
    with pytest.raises(LengthMismatch):
        spatial_lag(rook_2x2, [1.0, 2.0])


def test_spatial_lag_binary(rook_2x2):
    """Test each site sums its two rook neighbours."""
    np.testing.assert_array_equal(spatial_lag(rook_2x2, [1.0, 2.0, 3.0, 4.0]), [5.0, 5.0, 5.0, 5.0])


def test_spatial_lag_is_linear(queen_10x10, rng):
    x, y = rng.standard_normal(100), rng.standard_normal(100)
    combined = spatial_lag(queen_10x10, 2.5 * x - 0.75 * y)

    np.testing.assert_allclose(
        combined, 2.5 * spatial_lag(queen_10x10, x) - 0.75 * spatial_lag(queen_10x10, y), rtol=0, atol=1e-12
    )


@pytest.mark.parametrize("text", ["queen", "rook", "knn:4", "dist:1.5", "band:1,2", "rook@3"])
def test_spec_parse_label(text):
    assert NeighborSpec.parse(text).label() == text


@pytest.mark.parametrize("text", ["hexagon", "knn:0", "knn:x", "dist:-1", "band:2,1", "queen@x"])
def test_spec_parse_rejects(text):
    with pytest.raises(InvalidSpec):
        NeighborSpec.parse(text)


def test_gal_round_trip(tmp_path, grid_3x3):
    """Test GAL write/read preserves the neighbour structure, islands included."""
    w = build_weights(grid_3x3, NeighborSpec.rook())
    path = tmp_path / "w.gal"
    write_gal(w, path, ids=grid_3x3.ids)

    assert read_gal(path, grid_3x3.ids).pairs() == w.pairs()

    isolated = WeightMatrix.from_pairs(3, [0, 1], [1, 0])
    write_gal(isolated, tmp_path / "iso.gal", ids=['a', 'b', 'c'])
    assert read_gal(tmp_path / "iso.gal", ['a', 'b', 'c']).pairs() == {(0, 1), (1, 0)}


def test_gwt_round_trip(tmp_path, grid_3x3):
    w = row_standardize(build_weights(grid_3x3, NeighborSpec.queen()))
    path = tmp_path / "w.gwt"
    write_gwt(w, path, ids=grid_3x3.ids)

    np.testing.assert_array_equal(read_gwt(path, grid_3x3.ids).dense(), w.dense())


def test_gal_errors(tmp_path):
    """Test unknown neighbour ids and count mismatches."""
    path = tmp_path / "bad.gal"
    path.write_text("0 2 lattice id\na 1\nz\nb 1\na\n")
    with pytest.raises(UnknownSite):
        read_gal(path, ['a', 'b'])

    path.write_text("0 3 lattice id\na 1\nb\nb 1\na\n")
    with pytest.raises(ParseError):
        read_gal(path, ['a', 'b'])

    path.write_text("0 2 lattice id\na 2\nb\nb 1\na\n")
    with pytest.raises(ParseError):
        read_gal(path, ['a', 'b'])
