"""
Simulation studies.

  - size:     rejection rate of the global Moran permutation test on i.i.d.
              Gaussian fields (should match alpha)
  - spurious: bivariate vs partial Moran's I on common-driver triples
  - hotspot:  HH classes inside a planted hotspot under the bivariate and
              the partial significance maps
"""
import time
from typing import Any, Dict

import numpy as np

from lattice_assoc.inference import PermutationPlan, QuadrantClass, Scheme, permute_global, significance_map
from lattice_assoc.lattice import AttributeTable, grid_block, grid_lattice
from lattice_assoc.stats import (
    AssocKind,
    moran_i_biv,
    moran_i_partial,
    prepare_local_moran_biv,
    prepare_local_moran_partial,
    prepare_univariate,
)
from lattice_assoc.synthetic import CommonDriverSpec, simulate_common_driver
from lattice_assoc.weights import NeighborSpec, build_weights, row_standardize


def _grid_weights(rows: int, cols: int, spec: str = "queen"):
    lattice = grid_lattice(rows, cols)
    w = row_standardize(build_weights(lattice, NeighborSpec.parse(spec)))
    return lattice, w


def run_size_study(
    rows: int = 15,
    cols: int = 15,
    outer: int = 500,
    replicates: int = 199,
    alpha: float = 0.05,
    seed: int = 20240,
) -> Dict[str, Any]:
    """Empirical rejection rate of the two-sided global Moran test under the null."""
    _, w = _grid_weights(rows, cols)
    started = time.time()
    rejections = 0
    for rep in range(outer):
        x = np.random.default_rng([seed, rep]).standard_normal(w.n)
        prepared = prepare_univariate(AssocKind.MORAN_I, x, w)
        plan = PermutationPlan.create(replicates=replicates, seed=seed + 1 + rep)
        result = permute_global(prepared, plan)
        rejections += int(result.pseudo_p <= alpha)

    return {
        "study": "size",
        "grid": [rows, cols],
        "outer": outer,
        "replicates": replicates,
        "alpha": alpha,
        "rejections": rejections,
        "rejection_rate": rejections / outer,
        "duration_s": round(time.time() - started, 2),
    }


def run_spurious_study(
    rows: int = 10,
    cols: int = 10,
    seeds: int = 200,
    rho: float = 0.6,
    noise_sd: float = 0.5,
) -> Dict[str, Any]:
    """Median |I_ij| against median |I_ij|z| on common-driver triples (a = b = 1)."""
    lattice, w = _grid_weights(rows, cols)
    started = time.time()
    bivariate, partial = [], []
    for seed in range(seeds):
        spec = CommonDriverSpec(rho=rho, noise_sd=noise_sd, seed=seed, a=1.0, b=1.0)
        xi, xj, z = simulate_common_driver(lattice, w, spec)
        table = AttributeTable.from_columns(lattice, {"xi": xi, "xj": xj, "z": z})
        bivariate.append(moran_i_biv(xi, xj, w).statistic)
        partial.append(moran_i_partial(table, "xi", "xj", ["z"], w).statistic)

    bivariate = np.abs(np.array(bivariate))
    partial = np.abs(np.array(partial))
    return {
        "study": "spurious",
        "grid": [rows, cols],
        "seeds": seeds,
        "rho": rho,
        "noise_sd": noise_sd,
        "median_abs_bivariate": float(np.median(bivariate)),
        "median_abs_partial": float(np.median(partial)),
        "partial_smaller_fraction": float(np.mean(partial < bivariate)),
        "duration_s": round(time.time() - started, 2),
    }


def run_hotspot_study(
    rows: int = 10,
    cols: int = 10,
    seeds: int = 20,
    block: tuple = (3, 3, 4, 4),
    shift: float = 3.0,
    rho: float = 0.3,
    noise_sd: float = 0.5,
    replicates: int = 99,
    alpha: float = 0.05,
) -> Dict[str, Any]:
    """
    Plant a hotspot in the common driver and map it with the bivariate and the
    partial local Moran. Reports the HH share of the block per map and the
    share of seeds where the partial map loses most of the bivariate HH sites.
    """
    lattice, w = _grid_weights(rows, cols)
    sites = grid_block(rows, cols, *block)
    started = time.time()
    biv_share, partial_share, lost, precision = [], [], 0, []
    for seed in range(seeds):
        spec = CommonDriverSpec(rho=rho, noise_sd=noise_sd, seed=seed, a=1.0, b=1.0)
        xi, xj, z = simulate_common_driver(lattice, w, spec, hotspot=sites, hotspot_shift=shift)
        table = AttributeTable.from_columns(lattice, {"xi": xi, "xj": xj, "z": z})
        plan = PermutationPlan.create(replicates=replicates, seed=seed, scheme=Scheme.CONDITIONAL)

        biv_map = significance_map(prepare_local_moran_biv(xi, xj, w), plan, alpha=alpha, ids=lattice.ids)
        partial_map = significance_map(
            prepare_local_moran_partial(table, "xi", "xj", ["z"], w), plan, alpha=alpha, ids=lattice.ids
        )
        biv_hh = np.array([c == QuadrantClass.HH for c in biv_map.classes])
        partial_hh = np.array([c == QuadrantClass.HH for c in partial_map.classes])

        biv_share.append(float(biv_hh[sites].mean()))
        partial_share.append(float(partial_hh[sites].mean()))
        if biv_hh.any():
            precision.append(float(biv_hh[sites].sum() / biv_hh.sum()))
        kept = int((biv_hh & partial_hh)[sites].sum())
        lost += int(kept * 2 < int(biv_hh[sites].sum()))

    return {
        "study": "hotspot",
        "grid": [rows, cols],
        "block": list(block),
        "seeds": seeds,
        "shift": shift,
        "replicates": replicates,
        "mean_block_hh_bivariate": float(np.mean(biv_share)),
        "mean_block_hh_partial": float(np.mean(partial_share)),
        "mean_hh_precision_bivariate": float(np.mean(precision)) if precision else 0.0,
        "seeds_where_partial_loses_hotspot": lost,
        "duration_s": round(time.time() - started, 2),
    }


STUDIES = {
    "size": run_size_study,
    "spurious": run_spurious_study,
    "hotspot": run_hotspot_study,
}
