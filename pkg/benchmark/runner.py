"""
Runs the simulation studies and saves their summaries.

Usage:
    python -m benchmark.runner --study size
    python -m benchmark.runner --study spurious --seeds 50
    python -m benchmark.runner --all

Results are saved to benchmark/results/{study}_{date}.json
"""
import argparse
import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

# Ensure project root is on the path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from benchmark.studies import STUDIES  # noqa: E402

RESULTS_DIR = Path(__file__).parent / "results"


def save_result(result: Dict[str, Any]) -> Path:
    RESULTS_DIR.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    path = RESULTS_DIR / f"{result['study']}_{stamp}.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"metadata": {"created": stamp}, "summary": result}, f, indent=2)
    return path


def print_summary(result: Dict[str, Any]):
    print(f"\n{'='*60}")
    print(f"Study: {result['study']}")
    print(f"{'='*60}")
    for key, value in result.items():
        if key == "study":
            continue
        if isinstance(value, float):
            value = f"{value:.4f}"
        print(f"  {key:<36} {value}")
    print(f"{'='*60}\n")


def run(studies: List[str], overrides: Dict[str, Any]) -> List[Dict[str, Any]]:
    results = []
    for name in studies:
        print(f"Running {name} study...")
        study = STUDIES[name]
        accepted = study.__code__.co_varnames[:study.__code__.co_argcount]
        kwargs = {k: v for k, v in overrides.items() if k in accepted and v is not None}
        result = study(**kwargs)
        print_summary(result)
        path = save_result(result)
        print(f"Saved to {path}")
        results.append(result)
    return results


def main():
    parser = argparse.ArgumentParser(description="Run lattice-assoc simulation studies")
    parser.add_argument("--study", choices=sorted(STUDIES), help="Study to run")
    parser.add_argument("--all", action="store_true", help="Run every study")
    parser.add_argument("--rows", type=int)
    parser.add_argument("--cols", type=int)
    parser.add_argument("--seeds", type=int, help="Seeds (spurious, hotspot)")
    parser.add_argument("--outer", type=int, help="Outer replicates (size)")
    parser.add_argument("--replicates", type=int, help="Permutations per test")
    args = parser.parse_args()

    if not args.all and not args.study:
        parser.error("choose --study or --all")
    studies = sorted(STUDIES) if args.all else [args.study]
    overrides = {
        "rows": args.rows,
        "cols": args.cols,
        "seeds": args.seeds,
        "outer": args.outer,
        "replicates": args.replicates,
    }
    run(studies, overrides)


if __name__ == "__main__":
    main()
