"""
Command-line entry point.

    lattice-assoc weights  --lattice L.geojson --weights queen --out W.gal
    lattice-assoc global   --lattice L.geojson --data X.csv --stat moran --variant uni --i x
    lattice-assoc local    --lattice L.geojson --data X.csv --variant biv --i x --j y --out local.csv
    lattice-assoc sigmap   --lattice L.geojson --data X.csv --stat moran-partial --i x --j y --given z --out map.csv
    lattice-assoc simulate --rows 10 --cols 10 --rho 0.5 --out X.csv --geojson-out L.geojson

Logs go to stderr, a one-line summary to stdout. Errors are written to stderr
as one JSON object and mapped to a nonzero exit code.
"""
import argparse
import json
import sys
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import structlog
from pydantic import BaseModel, Field, ValidationError, model_validator

from lattice_assoc.config import settings
from lattice_assoc.errors import ConfigError, LatticeAssocError
from lattice_assoc.inference import (
    Alternative,
    PermutationPlan,
    Scheme,
    permute_global,
    significance_map,
)
from lattice_assoc.io import (
    enrich_geojson,
    read_attributes,
    read_geojson,
    write_attributes,
    write_lattice_geojson,
    write_local_csv,
    write_result_json,
    write_significance_csv,
)
from lattice_assoc.lattice import AttributeTable, Lattice, grid_block, grid_lattice
from lattice_assoc.observability import metrics, record, setup_logging
from lattice_assoc.stats import (
    AssocKind,
    AssocResult,
    PreparedLocal,
    PreparedStatistic,
    geary_c_partial_recursive,
    geary_c_semipartial,
    moran_i_partial_recursive,
    moran_i_semipartial,
    prepare_bivariate,
    prepare_local_moran,
    prepare_local_moran_biv,
    prepare_local_moran_partial,
    prepare_partial,
    prepare_univariate,
    summarize,
)
from lattice_assoc.synthetic import (
    CommonDriverSpec,
    SarSpec,
    plant_hotspot,
    simulate_common_driver,
    simulate_sar,
)
from lattice_assoc.weights import (
    NeighborSpec,
    Standardization,
    WeightMatrix,
    build_weights,
    read_gal,
    read_gwt,
    standardize,
    write_gal,
    write_gwt,
)

logger = structlog.get_logger()


class Command(str, Enum):
    WEIGHTS = "weights"
    GLOBAL = "global"
    LOCAL = "local"
    SIGMAP = "sigmap"
    SIMULATE = "simulate"


class VariantName(str, Enum):
    UNI = "uni"
    BIV = "biv"
    PARTIAL = "partial"
    SEMIPARTIAL = "semipartial"


class StatName(str, Enum):
    MORAN = "moran"
    GEARY = "geary"


class SimulationModel(str, Enum):
    SAR = "sar"
    COMMON_DRIVER = "common-driver"


class RunConfig(BaseModel):
    """One CLI invocation, validated before anything is read or computed."""
    command: Command
    lattice: Optional[Path] = None
    data: Optional[Path] = None
    weights: str = "queen"
    standardize: Standardization = Standardization.ROW
    stat: StatName = StatName.MORAN
    variant: VariantName = VariantName.UNI
    i: Optional[str] = None
    j: Optional[str] = None
    given: List[str] = Field(default_factory=list)
    recursion: bool = False

    permutations: int = Field(default=0, ge=0)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0, lt=2 ** 64)
    alpha: float = Field(default_factory=lambda: settings.alpha, gt=0.0, lt=1.0)
    alternative: Alternative = Alternative.TWO_SIDED
    exhaustive: bool = False
    fdr: bool = False
    n_jobs: int = Field(default_factory=lambda: settings.n_jobs, ge=1)

    # simulate
    model: SimulationModel = SimulationModel.SAR
    rows: int = Field(default=10, ge=1)
    cols: int = Field(default=10, ge=1)
    rho: float = 0.0
    noise_sd: float = Field(default=1.0, gt=0.0)
    a: float = 1.0
    b: float = 1.0
    driver_sd: float = Field(default=1.0, gt=0.0)
    hotspot: Optional[Tuple[int, int, int, int]] = None
    hotspot_shift: float = 0.0

    out: Optional[Path] = None
    geojson_out: Optional[Path] = None
    metrics_file: Optional[Path] = None

    @model_validator(mode='after')
    def _check_coherent(self) -> 'RunConfig':
        command = self.command
        if command in (Command.WEIGHTS, Command.GLOBAL, Command.LOCAL, Command.SIGMAP) and self.lattice is None:
            raise ValueError(f"{command.value} needs --lattice")
        if command in (Command.GLOBAL, Command.LOCAL, Command.SIGMAP):
            if self.data is None:
                raise ValueError(f"{command.value} needs --data")
            if self.i is None:
                raise ValueError("--i (or --var) is required")
            if self.variant != VariantName.UNI and self.j is None:
                raise ValueError(f"variant {self.variant.value} needs --j")
        if self.variant in (VariantName.PARTIAL, VariantName.SEMIPARTIAL) and not self.given:
            raise ValueError(f"variant {self.variant.value} needs a nonempty --given list")
        if (self.recursion or self.variant == VariantName.SEMIPARTIAL) and len(self.given) != 1:
            raise ValueError("the bivariate recursion needs exactly one --given variable")
        if command in (Command.LOCAL, Command.SIGMAP):
            if self.stat != StatName.MORAN:
                raise ValueError("local statistics are available for Moran's I only")
            if self.variant == VariantName.SEMIPARTIAL or self.recursion:
                raise ValueError("local statistics support uni, biv and partial variants")
        if command in (Command.WEIGHTS, Command.LOCAL, Command.SIGMAP, Command.SIMULATE) and self.out is None:
            raise ValueError(f"{command.value} needs --out")
        if command == Command.SIGMAP and self.permutations == 0 and not self.exhaustive:
            raise ValueError("sigmap needs --permutations >= 19 or --exhaustive")
        if self.permutations and self.permutations < 19 and not self.exhaustive:
            raise ValueError("--permutations must be 0 or at least 19")
        return self

    def plan(self, scheme: Scheme) -> PermutationPlan:
        return PermutationPlan.create(
            replicates=max(self.permutations, 19),
            seed=self.seed,
            scheme=scheme,
            alternative=self.alternative,
            exhaustive=self.exhaustive,
        )


# --- loading ---

def load_weights(config: RunConfig, lattice: Lattice) -> WeightMatrix:
    """Inline spec (queen, rook, knn:k, dist:t, band:a,b, with optional @order) or a .gal/.gwt path."""
    source = Path(config.weights)
    suffix = source.suffix.lower()
    if suffix == '.gal':
        w = read_gal(source, lattice.ids)
    elif suffix == '.gwt':
        w = read_gwt(source, lattice.ids)
    else:
        w = build_weights(lattice, NeighborSpec.parse(config.weights), n_jobs=config.n_jobs)
    return standardize(w, config.standardize)


def _load_inputs(config: RunConfig) -> Tuple[Lattice, AttributeTable, WeightMatrix]:
    lattice = read_geojson(config.lattice)
    table = read_attributes(config.data, lattice)
    return lattice, table, load_weights(config, lattice)


# --- commands ---

def _prepare_global(config: RunConfig, table: AttributeTable, w: WeightMatrix) -> PreparedStatistic:
    kind = AssocKind.MORAN_I if config.stat == StatName.MORAN else AssocKind.GEARY_C
    if config.variant == VariantName.UNI:
        return prepare_univariate(kind, table.variable(config.i), w, name=config.i)
    if config.variant == VariantName.BIV:
        return prepare_bivariate(kind, table.variable(config.i), table.variable(config.j), w, names=(config.i, config.j))
    return prepare_partial(kind, table, config.i, config.j, config.given, w)


def _recursion_result(config: RunConfig, table: AttributeTable, w: WeightMatrix) -> AssocResult:
    moran = config.stat == StatName.MORAN
    k = config.given[0]
    if config.variant == VariantName.SEMIPARTIAL:
        compute = moran_i_semipartial if moran else geary_c_semipartial
    else:
        compute = moran_i_partial_recursive if moran else geary_c_partial_recursive
    return compute(table, config.i, config.j, k, w)


def run_global(config: RunConfig) -> str:
    _, table, w = _load_inputs(config)
    if config.variant == VariantName.SEMIPARTIAL or config.recursion:
        if config.permutations:
            raise ConfigError("Permutation inference is not available for recursion-based values")
        result = _recursion_result(config, table, w)
    else:
        prepared = _prepare_global(config, table, w)
        if config.permutations or config.exhaustive:
            result = permute_global(prepared, config.plan(Scheme.TOTAL), n_jobs=config.n_jobs)
        else:
            result = summarize(prepared)

    if config.out is not None:
        write_result_json(result, config.out)
    summary = f"{result.kind.value} {result.variant.value} statistic={result.statistic:.12g}"
    if result.pseudo_p is not None:
        summary += f" pseudo_p={result.pseudo_p:.6g}"
    return summary


def _prepare_local(config: RunConfig, table: AttributeTable, w: WeightMatrix) -> PreparedLocal:
    if config.variant == VariantName.UNI:
        return prepare_local_moran(table.variable(config.i), w, name=config.i)
    if config.variant == VariantName.BIV:
        return prepare_local_moran_biv(table.variable(config.i), table.variable(config.j), w, names=(config.i, config.j))
    return prepare_local_moran_partial(table, config.i, config.j, config.given, w)


def run_local(config: RunConfig) -> str:
    lattice, table, w = _load_inputs(config)
    prepared = _prepare_local(config, table, w)
    local_map = prepared.to_map()
    write_local_csv(local_map, lattice.ids, config.out)
    return f"{local_map.kind.value} n={local_map.n} islands={int(local_map.island_mask.sum())}"


def run_sigmap(config: RunConfig) -> str:
    lattice, table, w = _load_inputs(config)
    prepared = _prepare_local(config, table, w)
    significance = significance_map(
        prepared,
        config.plan(Scheme.CONDITIONAL),
        alpha=config.alpha,
        fdr=config.fdr,
        ids=lattice.ids,
        n_jobs=config.n_jobs,
    )
    write_significance_csv(significance, config.out)
    if config.geojson_out is not None:
        enrich_geojson(config.lattice, significance, config.geojson_out)
    counts = " ".join(f"{name}={count}" for name, count in significance.counts().items())
    return f"{prepared.kind.value} alpha={config.alpha:g} {counts}"


def run_weights(config: RunConfig) -> str:
    lattice = read_geojson(config.lattice)
    w = load_weights(config, lattice)
    if w.standardization == Standardization.BINARY and config.out.suffix.lower() != '.gwt':
        write_gal(w, config.out, ids=lattice.ids)
    else:
        write_gwt(w, config.out, ids=lattice.ids)
    return f"weights n={w.n} nnz={w.nnz} islands={len(w.islands())}"


def run_simulate(config: RunConfig) -> str:
    lattice = grid_lattice(config.rows, config.cols)
    w = load_weights(config.model_copy(update={'standardize': Standardization.ROW}), lattice)
    hotspot = grid_block(config.rows, config.cols, *config.hotspot) if config.hotspot else None

    if config.model == SimulationModel.SAR:
        spec = SarSpec.create(rho=config.rho, noise_sd=config.noise_sd, seed=config.seed)
        x = simulate_sar(lattice, w, spec)
        if hotspot is not None:
            x = plant_hotspot(x, hotspot, config.hotspot_shift)
        table = AttributeTable.from_columns(lattice, {'x': x})
    else:
        spec = CommonDriverSpec.create(
            rho=config.rho,
            noise_sd=config.noise_sd,
            seed=config.seed,
            a=config.a,
            b=config.b,
            driver_sd=config.driver_sd,
        )
        xi, xj, z = simulate_common_driver(lattice, w, spec, hotspot=hotspot, hotspot_shift=config.hotspot_shift)
        table = AttributeTable.from_columns(lattice, {'xi': xi, 'xj': xj, 'z': z})

    write_attributes(table, config.out)
    if config.geojson_out is not None:
        write_lattice_geojson(lattice, config.geojson_out)
    return f"simulate {config.model.value} n={lattice.n} rho={config.rho:g} seed={config.seed}"


COMMANDS = {
    Command.WEIGHTS: run_weights,
    Command.GLOBAL: run_global,
    Command.LOCAL: run_local,
    Command.SIGMAP: run_sigmap,
    Command.SIMULATE: run_simulate,
}


def run(config: RunConfig) -> str:
    """Execute one command; returns the stdout summary line."""
    logger.info("Command started", command=config.command.value)
    summary = COMMANDS[config.command](config)
    logger.info("Command finished", command=config.command.value)
    return summary


# --- argument parsing ---

def _split_names(text: str) -> List[str]:
    return [name.strip() for name in text.split(',') if name.strip()]


def _hotspot(text: str) -> Tuple[int, int, int, int]:
    parts = text.split(',')
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected top,left,height,width")
    return tuple(int(p) for p in parts)


class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they reach stderr as a JSON record."""

    def error(self, message: str):
        raise ConfigError(f"Invalid arguments: {message}", {'prog': self.prog})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='lattice-assoc', description="Spatial association on areal lattices")
    parser.add_argument('command', choices=[c.value for c in Command])
    parser.add_argument('--lattice', help="GeoJSON FeatureCollection with an 'id' property per feature")
    parser.add_argument('--data', help="CSV with header id,<var1>,<var2>,...")
    parser.add_argument('--weights', default='queen', help="queen|rook|knn:k|dist:t|band:a,b[@order] or a .gal/.gwt file")
    parser.add_argument('--standardize', default='row', choices=[s.value for s in Standardization])
    parser.add_argument('--stat', default='moran', help="moran|geary, or moran-biv / moran-partial for local maps")
    parser.add_argument('--variant', choices=[v.value for v in VariantName])
    parser.add_argument('--i', '--var', dest='i')
    parser.add_argument('--j')
    parser.add_argument('--given', type=_split_names, default=[], help="comma-separated conditioning variables")
    parser.add_argument('--recursion', action='store_true', help="single-variable recursion from bivariate values")
    parser.add_argument('--permutations', type=int, default=0)
    parser.add_argument('--exhaustive', action='store_true', help="enumerate every permutation (small n)")
    parser.add_argument('--seed', type=int)
    parser.add_argument('--alpha', type=float)
    parser.add_argument('--alternative', default='two-sided', choices=[a.value for a in Alternative])
    parser.add_argument('--fdr', action='store_true', help="Benjamini-Hochberg control on the significance map")
    parser.add_argument('--n-jobs', type=int)
    parser.add_argument('--model', default='sar', choices=[m.value for m in SimulationModel])
    parser.add_argument('--rows', type=int, default=10)
    parser.add_argument('--cols', type=int, default=10)
    parser.add_argument('--rho', type=float, default=0.0)
    parser.add_argument('--noise-sd', type=float, default=1.0)
    parser.add_argument('--a', type=float, default=1.0)
    parser.add_argument('--b', type=float, default=1.0)
    parser.add_argument('--driver-sd', type=float, default=1.0)
    parser.add_argument('--hotspot', type=_hotspot, help="top,left,height,width of a grid block")
    parser.add_argument('--hotspot-shift', type=float, default=0.0)
    parser.add_argument('--out')
    parser.add_argument('--geojson-out')
    parser.add_argument('--metrics-file')
    parser.add_argument('--log-level')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Namespace to RunConfig; `--stat moran-partial` sets both stat and variant."""
    stat, _, variant = args.stat.partition('-')
    if variant and args.variant and variant != args.variant:
        raise ConfigError("--stat and --variant disagree", {'stat': args.stat, 'variant': args.variant})
    values = {
        key: value for key, value in vars(args).items()
        if value is not None and key not in ('stat', 'variant', 'log_level')
    }
    values['stat'] = stat
    values['variant'] = variant or args.variant or VariantName.UNI.value
    try:
        return RunConfig(**values)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error['loc'])
        message = f"{location}: {error['msg']}" if location else error['msg']
        raise ConfigError(f"Invalid arguments: {message}", {'arguments': sys.argv[1:]}) from None


def _emit_error(payload: dict):
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        setup_logging()
        _emit_error(e.to_dict())
        return e.exit_code

    setup_logging(args.log_level)
    metrics_file = args.metrics_file

    try:
        config = config_from_args(args)
        summary = run(config)
        print(summary)
        return 0
    except LatticeAssocError as e:
        record(lambda m: m.errors_total.labels(code=e.code).inc())
        logger.error("Command failed", code=e.code, message=e.message)
        _emit_error(e.to_dict())
        return e.exit_code
    except Exception as e:
        logger.error("Unhandled exception", exc_info=e)
        _emit_error({'error': 'internal_error', 'message': str(e), 'details': {}})
        return 1
    finally:
        if metrics_file:
            metrics.write(metrics_file)


if __name__ == '__main__':
    sys.exit(main())
