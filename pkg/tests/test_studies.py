"""Tests for the simulation studies."""
import pytest

from benchmark.studies import STUDIES, run_hotspot_study, run_size_study, run_spurious_study


def test_registry():
    assert set(STUDIES) == {'size', 'spurious', 'hotspot'}


def test_size_study_smoke():
    result = run_size_study(rows=5, cols=5, outer=10, replicates=19)

    assert result['study'] == 'size'
    assert 0 <= result['rejections'] <= 10
    assert result['rejection_rate'] == result['rejections'] / 10


def test_spurious_study_smoke():
    result = run_spurious_study(rows=6, cols=6, seeds=5)

    assert result['study'] == 'spurious'
    assert 0.0 <= result['partial_smaller_fraction'] <= 1.0


def test_hotspot_study_smoke():
    result = run_hotspot_study(rows=8, cols=8, seeds=2, block=(2, 2, 3, 3), replicates=19)

    assert result['study'] == 'hotspot'
    assert 0.0 <= result['mean_block_hh_bivariate'] <= 1.0
    assert 0 <= result['seeds_where_partial_loses_hotspot'] <= 2


@pytest.mark.slow
def test_size_matches_alpha():
    """Test the null rejection rate on a 15x15 queen grid stays in [0.03, 0.07]."""
    result = run_size_study(rows=15, cols=15, outer=500, replicates=199, alpha=0.05)

    assert result['outer'] == 500
    assert 0.03 <= result['rejection_rate'] <= 0.07


@pytest.mark.slow
def test_partial_shrinks_common_driver_association():
    """Test median |I_ij|z| is under half of median |I_ij| over 200 triples."""
    result = run_spurious_study(seeds=200)

    assert result['median_abs_partial'] < 0.5 * result['median_abs_bivariate']
    assert result['partial_smaller_fraction'] >= 0.9


@pytest.mark.slow
def test_partial_map_drops_driver_hotspot():
    """Test the bivariate map finds the planted block and the partial map loses it in most seeds."""
    seeds = 50
    result = run_hotspot_study(seeds=seeds)

    assert result['seeds_where_partial_loses_hotspot'] > seeds / 2
    assert result['mean_hh_precision_bivariate'] >= 0.8
    assert result['mean_block_hh_bivariate'] > result['mean_block_hh_partial']
