"""Tests for global Moran's I and Geary's C in all variants."""
import itertools

import numpy as np
import pytest

from lattice_assoc.errors import (
    DegenerateConditioning,
    DegenerateLattice,
    EmptyWeights,
    InvalidSpec,
    LengthMismatch,
    ZeroVariance,
)
from lattice_assoc.lattice import AttributeTable, grid_lattice
from lattice_assoc.stats import (
    AssocKind,
    Conditioning,
    Variant,
    geary_c,
    geary_c_biv,
    geary_c_partial,
    geary_c_partial_recursive,
    geary_c_semipartial,
    geary_null_variance,
    moran_i,
    moran_i_biv,
    moran_i_partial,
    moran_i_partial_recursive,
    moran_i_semipartial,
    moran_null_variance,
    partial_from_bivariate,
    prepare_univariate,
    semipartial_from_bivariate,
)
from lattice_assoc.synthetic import CommonDriverSpec, simulate_common_driver
from lattice_assoc.weights import NeighborSpec, WeightMatrix, build_weights, row_standardize
from tests import oracles


@pytest.fixture
def k3():
    """Complete graph on three sites."""
    return WeightMatrix(sparse=np.ones((3, 3)) - np.eye(3))


@pytest.fixture
def path_6():
    """Binary rook weights on a 1x6 strip."""
    return build_weights(grid_lattice(1, 6), NeighborSpec.rook())


# --- univariate ---

def test_checkerboard(rook_2x2, checkerboard):
    """Test I = -1 and C = 1.5 on the 2x2 checkerboard."""
    assert moran_i(checkerboard, rook_2x2).statistic == pytest.approx(-1.0, abs=1e-12)
    assert moran_i(checkerboard, row_standardize(rook_2x2)).statistic == pytest.approx(-1.0, abs=1e-12)
    assert geary_c(checkerboard, rook_2x2).statistic == pytest.approx(1.5, abs=1e-12)


def test_result_fields(rook_2x2, checkerboard):
    result = moran_i(checkerboard, rook_2x2)

    assert result.kind == AssocKind.MORAN_I
    assert result.variant == Variant.UNIVARIATE
    assert result.n == 4
    assert result.s0 == 8.0
    assert result.null_mean == pytest.approx(-1.0 / 3.0)
    assert result.to_record()['spec_version'] == 1

    assert geary_c(checkerboard, rook_2x2).null_mean == 1.0


def test_null_mean_n5():
    w = build_weights(grid_lattice(1, 5), NeighborSpec.rook())
    assert moran_i([1.0, 3.0, 2.0, 5.0, 4.0], w).null_mean == pytest.approx(-0.25)


def test_matches_dense_oracle(rng):
    """Test sparse evaluation against the dense double sum on random asymmetric weights."""
    for n in (5, 17, 40):
        w = oracles.random_weights(rng, n)
        W = w.dense()
        x, y = rng.standard_normal(n), rng.standard_normal(n) + 2.0

        assert moran_i(x, w).statistic == pytest.approx(oracles.moran(x, W), rel=1e-12, abs=1e-12)
        assert geary_c(x, w).statistic == pytest.approx(oracles.geary(x, W), rel=1e-12)
        assert moran_i_biv(x, y, w).statistic == pytest.approx(oracles.moran_biv(x, y, W), rel=1e-12, abs=1e-12)
        assert geary_c_biv(x, y, w).statistic == pytest.approx(oracles.geary_biv(x, y, W), rel=1e-12)


def test_location_scale_invariance(queen_10x10, rng):
    x = rng.standard_normal(100)

    assert moran_i(3.0 * x - 7.0, queen_10x10).statistic == pytest.approx(moran_i(x, queen_10x10).statistic, abs=1e-10)
    assert geary_c(-2.0 * x + 1.0, queen_10x10).statistic == pytest.approx(geary_c(x, queen_10x10).statistic, abs=1e-10)


@pytest.mark.parametrize("kind,expected", [(AssocKind.MORAN_I, -0.2), (AssocKind.GEARY_C, 1.0)])
def test_exhaustive_permutation_mean(path_6, kind, expected):
    """Test the mean over all 6! relabelings equals the null mean."""
    x = np.array([0.3, -1.2, 2.5, 0.7, -0.4, 1.9])
    prepared = prepare_univariate(kind, x, path_6)
    relabelings = np.array([prepared.moving[list(p)] for p in itertools.permutations(range(6))])

    values = prepared.evaluate(relabelings)
    assert values.shape == (720,)
    assert np.mean(values) == pytest.approx(expected, abs=1e-12)


def test_randomization_variance_is_exact(path_6):
    """Test the randomization variance equals the variance over all relabelings."""
    x = np.array([0.3, -1.2, 2.5, 0.7, -0.4, 1.9])
    prepared = prepare_univariate(AssocKind.MORAN_I, x, path_6)
    relabelings = np.array([prepared.moving[list(p)] for p in itertools.permutations(range(6))])

    exact = np.var(prepared.evaluate(relabelings))
    assert moran_null_variance(path_6, 6, assumption='randomization', x=x) == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_null_variance_random_weights(seed):
    """Test the normality variance on general nonnegative weights against the dense evaluation."""
    rng = np.random.default_rng(seed)
    n = 8 + seed
    w = oracles.random_weights(rng, n, density=0.4)

    assert moran_null_variance(w, n) == pytest.approx(oracles.moran_variance(w.dense()), rel=1e-10, abs=1e-12)


def test_null_variance_oracle(rng):
    """Test the normality variance against an independent evaluation."""
    dense = (rng.uniform(size=(12, 12)) < 0.3).astype(float)
    dense = np.maximum(dense, dense.T)
    np.fill_diagonal(dense, 0.0)
    w = WeightMatrix(sparse=dense)

    assert moran_null_variance(w, 12) == pytest.approx(oracles.moran_variance(w.dense()), rel=1e-10)

    s0, s1, s2 = oracles.weight_sums(w.dense())
    expected = ((2 * s1 + s2) * 11 - 4 * s0 * s0) / (2 * 13 * s0 * s0)
    assert geary_null_variance(w, 12) == pytest.approx(expected, rel=1e-10)


def test_null_variance_k3(k3):
    """Test K3 by hand: (9*12 - 3*48 + 3*36) / (8*36) - 1/4 = 0."""
    assert moran_null_variance(k3, 3) == pytest.approx(0.0, abs=1e-15)
    assert moran_null_variance(k3, 3) >= 0.0

    result = moran_i([1.0, 2.0, 4.0], k3)
    assert result.z_score is None
    with pytest.raises(DegenerateLattice):
        moran_null_variance(k3, 3, assumption='randomization', x=[1.0, 2.0, 4.0])


def test_z_score_and_p_norm(queen_10x10, rng):
    x = rng.standard_normal(100)
    result = moran_i(x, queen_10x10)

    assert result.null_variance > 0
    assert result.z_score == pytest.approx((result.statistic - result.null_mean) / np.sqrt(result.null_variance))
    assert 0.0 <= result.p_norm <= 1.0


def test_input_errors(rook_2x2):
    """Test zero variance, length, size, empty weights and non-finite input."""
    with pytest.raises(ZeroVariance):
        moran_i([2.0, 2.0, 2.0, 2.0], rook_2x2)
    with pytest.raises(ZeroVariance):
        geary_c_biv([1.0, 2.0, 3.0, 4.0], [5.0, 5.0, 5.0, 5.0], rook_2x2)
    with pytest.raises(LengthMismatch):
        moran_i([1.0, 2.0, 3.0], rook_2x2)
    with pytest.raises(LengthMismatch):
        moran_i_biv([1.0, 2.0, 3.0, 4.0], [1.0, 2.0], rook_2x2)
    with pytest.raises(DegenerateLattice):
        moran_i([1.0, 2.0], WeightMatrix(sparse=np.array([[0.0, 1.0], [1.0, 0.0]])))
    with pytest.raises(EmptyWeights):
        geary_c([1.0, 2.0, 3.0, 4.0], WeightMatrix(sparse=np.zeros((4, 4))))
    with pytest.raises(InvalidSpec):
        moran_i([1.0, np.inf, 3.0, 4.0], rook_2x2)


# --- bivariate ---

def test_diagonal_reduction(queen_10x10, rng):
    """Test biv(x, x) equals the univariate value exactly."""
    x = rng.standard_normal(100)

    assert moran_i_biv(x, x, queen_10x10).statistic == moran_i(x, queen_10x10).statistic
    assert geary_c_biv(x, x, queen_10x10).statistic == geary_c(x, queen_10x10).statistic


def test_bivariate_sign_flip(queen_10x10, rng):
    x = rng.standard_normal(100)

    assert moran_i_biv(x, -x, queen_10x10).statistic == pytest.approx(-moran_i(x, queen_10x10).statistic, abs=1e-12)


def test_bivariate_geary_asymmetry(rng):
    """Test C_ij != C_ji on asymmetric data and the shift sensitivity."""
    w = oracles.random_weights(rng, 20)
    x, y = rng.standard_normal(20), rng.standard_normal(20)

    assert geary_c_biv(x, y, w).statistic != pytest.approx(geary_c_biv(y, x, w).statistic, rel=1e-6)
    shifted = geary_c_biv(x, y + 5.0, w).statistic
    assert shifted == pytest.approx(oracles.geary_biv(x, y + 5.0, w.dense()), rel=1e-12)
    assert shifted != pytest.approx(geary_c_biv(x, y, w).statistic, rel=1e-6)


def test_bivariate_metadata(rook_2x2):
    result = moran_i_biv([1.0, 2.0, 3.0, 5.0], [2.0, 1.0, 4.0, 3.0], rook_2x2, names=('a', 'b'))

    assert result.variant == Variant.BIVARIATE
    assert result.vars == ['a', 'b']
    assert result.null_mean is None


# --- partial ---

def test_partial_empty_conditioning(triple_table, queen_10x10):
    """Test c = {} reduces to the bivariate statistic."""
    x, y = triple_table.variable('x'), triple_table.variable('y')

    moran = moran_i_partial(triple_table, 'x', 'y', [], queen_10x10)
    assert moran.statistic == pytest.approx(moran_i_biv(x, y, queen_10x10).statistic, rel=1e-12)
    assert geary_c_partial(triple_table, 'x', 'y', [], queen_10x10).statistic == \
        geary_c_biv(x, y, queen_10x10).statistic


def test_reduction_identities_on_random_instances():
    """Test biv(x, x) = uni, partial with c = {} = biv and the recursion with zero terms, 100 instances."""
    for seed in range(100):
        rng = np.random.default_rng([7, seed])
        n = int(rng.integers(5, 40))
        w = oracles.random_weights(rng, n, density=0.3)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        table = AttributeTable.from_columns(grid_lattice(1, n), {'x': x, 'y': y})

        assert moran_i_biv(x, x, w).statistic == pytest.approx(moran_i(x, w).statistic, abs=1e-12)
        assert geary_c_biv(x, x, w).statistic == pytest.approx(geary_c(x, w).statistic, abs=1e-12)
        assert moran_i_partial(table, 'x', 'y', [], w).statistic == \
            pytest.approx(moran_i_biv(x, y, w).statistic, abs=1e-12)
        assert geary_c_partial(table, 'x', 'y', [], w).statistic == \
            pytest.approx(geary_c_biv(x, y, w).statistic, abs=1e-12)

        a = float(rng.uniform(-0.99, 0.99))
        assert partial_from_bivariate(a, 0.0, 0.0) == pytest.approx(a, abs=1e-12)


def test_independent_fields_have_small_bivariate_moran():
    """Test |I_ij| < 4/sqrt(n) in at least 95% of 500 independent noise pairs on a 200-site queen grid."""
    w = row_standardize(build_weights(grid_lattice(10, 20), NeighborSpec.queen()))
    bound = 4.0 / np.sqrt(w.n)

    below = 0
    for seed in range(500):
        rng = np.random.default_rng([11, seed])
        below += abs(moran_i_biv(rng.standard_normal(w.n), rng.standard_normal(w.n), w).statistic) < bound
    assert below >= 0.95 * 500


def test_partial_matches_dense_pipeline(triple_table, queen_10x10):
    """Test residualize-then-bivariate against normal equations and dense sums."""
    x, y, z = (triple_table.variable(name) for name in 'xyz')
    W = queen_10x10.dense()
    rx, ry = oracles.residual(x, [z]), oracles.residual(y, [z])

    moran = moran_i_partial(triple_table, 'x', 'y', ['z'], queen_10x10)
    assert moran.statistic == pytest.approx(oracles.moran_biv(rx, ry, W), rel=1e-9)
    assert moran.variant == Variant.PARTIAL
    assert moran.conditioning == Conditioning.RESIDUAL
    assert moran.given == ['z']

    geary = geary_c_partial(triple_table, 'x', 'y', ['z'], queen_10x10)
    expected = oracles.geary_biv(rx + x.mean(), ry + y.mean(), W)
    assert geary.statistic == pytest.approx(expected, rel=1e-9)


def test_partial_orthogonal_conditioning(grid_2x2, rook_2x2):
    """Test conditioning on a column orthogonal to both targets changes nothing."""
    table = AttributeTable.from_columns(grid_2x2, {
        'x': [1.0, 2.0, 4.0, 5.0],
        'y': [3.0, 0.0, 1.0, -2.0],
        'z': [1.0, -1.0, -1.0, 1.0],
    })
    # centered x and y are orthogonal to z
    x, y = table.variable('x'), table.variable('y')
    assert (x - x.mean()) @ table.variable('z') == pytest.approx(0.0)
    assert (y - y.mean()) @ table.variable('z') == pytest.approx(0.0)

    partial = moran_i_partial(table, 'x', 'y', ['z'], rook_2x2).statistic
    assert partial == pytest.approx(moran_i_biv(x, y, rook_2x2).statistic, abs=1e-10)


def test_partial_target_explained_by_given(grid_10x10, queen_10x10, rng):
    z = rng.standard_normal(100)
    table = AttributeTable.from_columns(grid_10x10, {'x': rng.standard_normal(100), 'y': 3.0 * z - 1.0, 'z': z})

    with pytest.raises(ZeroVariance):
        moran_i_partial(table, 'x', 'y', ['z'], queen_10x10)


def test_partial_removes_common_driver(grid_10x10, queen_10x10):
    """Test conditioning on a shared smooth driver shrinks the cross association."""
    smaller = 0
    for seed in range(20):
        spec = CommonDriverSpec(rho=0.6, noise_sd=0.5, seed=seed)
        xi, xj, z = simulate_common_driver(grid_10x10, queen_10x10, spec)
        table = AttributeTable.from_columns(grid_10x10, {'xi': xi, 'xj': xj, 'z': z})

        partial = moran_i_partial(table, 'xi', 'xj', ['z'], queen_10x10).statistic
        smaller += abs(partial) < abs(moran_i_biv(xi, xj, queen_10x10).statistic)

    assert smaller >= 16


# --- recursions ---

def test_partial_recursion_arithmetic():
    assert partial_from_bivariate(0.6, 0.5, 0.5) == pytest.approx(0.35 / 0.75)
    assert partial_from_bivariate(0.6, 0.5, 0.5) == pytest.approx(0.46666666666)
    for a in (-0.9, 0.0, 0.3, 1.7):
        assert partial_from_bivariate(a, 0.0, 0.0) == a


def test_semipartial_recursion_arithmetic():
    assert semipartial_from_bivariate(0.6, 0.5, 0.5, 0.5) == pytest.approx(0.35 / np.sqrt(0.75))
    assert semipartial_from_bivariate(0.6, 0.5, 0.5, 0.5) == pytest.approx(0.40414518843)
    assert semipartial_from_bivariate(0.6, 0.0, 0.7, 0.0) == 0.6


def test_recursion_guards():
    with pytest.raises(DegenerateConditioning):
        partial_from_bivariate(0.2, 1.0, 0.1)
    with pytest.raises(DegenerateConditioning):
        partial_from_bivariate(0.2, 0.1, -1.0)
    with pytest.raises(DegenerateConditioning):
        semipartial_from_bivariate(0.2, 0.1, 0.1, 1.0 - 1e-14)


def test_recursive_statistics(triple_table, queen_10x10):
    """Test the recursion operations combine the bivariate values of the table."""
    x, y, z = (triple_table.variable(name) for name in 'xyz')
    a_ij = moran_i_biv(x, y, queen_10x10).statistic
    a_ik = moran_i_biv(x, z, queen_10x10).statistic
    a_jk = moran_i_biv(y, z, queen_10x10).statistic
    a_kj = moran_i_biv(z, y, queen_10x10).statistic

    partial = moran_i_partial_recursive(triple_table, 'x', 'y', 'z', queen_10x10)
    assert partial.statistic == pytest.approx(partial_from_bivariate(a_ij, a_ik, a_jk))
    assert partial.conditioning == Conditioning.RECURSION
    assert partial.given == ['z']

    semi = moran_i_semipartial(triple_table, 'x', 'y', 'z', queen_10x10)
    assert semi.variant == Variant.SEMI_PARTIAL
    assert semi.statistic == pytest.approx(semipartial_from_bivariate(a_ij, a_ik, a_kj, a_jk))

    assert geary_c_partial_recursive(triple_table, 'x', 'y', 'z', queen_10x10).kind == AssocKind.GEARY_C
    assert geary_c_semipartial(triple_table, 'x', 'y', 'z', queen_10x10).kind == AssocKind.GEARY_C


def test_recursive_rejects_multiple_given(triple_table, queen_10x10):
    with pytest.raises(InvalidSpec):
        moran_i_partial_recursive(triple_table, 'x', 'y', ['z', 'x'], queen_10x10)
