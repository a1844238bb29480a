"""Result files: global JSON records, local and significance CSVs."""
import json
from pathlib import Path
from typing import Sequence

from lattice_assoc.inference.models import SignificanceMap
from lattice_assoc.stats.models import AssocResult, LocalAssocMap


def write_result_json(result: AssocResult, path) -> None:
    Path(path).write_text(json.dumps(result.to_record(), sort_keys=True, indent=2) + "\n", encoding='utf-8')


def write_local_csv(local_map: LocalAssocMap, ids: Sequence[str], path) -> None:
    local_map.to_frame(ids).to_csv(path, index=False, float_format='%.17g')


def write_significance_csv(significance: SignificanceMap, path) -> None:
    significance.to_frame().to_csv(path, index=False, float_format='%.17g')
