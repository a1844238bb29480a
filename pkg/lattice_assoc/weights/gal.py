"""
GAL / GWT persistence.

GAL (binary neighbour lists):
    0 <n> <name> <idvar>
    <id> <degree>
    <neighbour id> <neighbour id> ...

GWT (weighted triples), same header, then one "<id_i> <id_j> <w>" per line.
"""
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import structlog

from lattice_assoc.errors import ParseError, UnknownSite
from lattice_assoc.weights.models import Standardization, WeightMatrix

logger = structlog.get_logger()


def _header(n: int, name: str, idvar: str) -> str:
    return f"0 {n} {name} {idvar}"


def _read_header(line: str, path: Path) -> int:
    tokens = line.split()
    try:
        if len(tokens) == 1:
            return int(tokens[0])
        if len(tokens) == 4:
            return int(tokens[1])
    except ValueError:
        pass
    raise ParseError(f"Malformed header in {path}: '{line.strip()}'", {'path': str(path), 'line': 1})


def _lines(path: Path) -> List[str]:
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}", {'path': str(path)}) from None
    return [line for line in text.splitlines() if line.strip()]


def _resolve(site: str, index: dict, path: Path, line_no: int) -> int:
    try:
        return index[site]
    except KeyError:
        raise UnknownSite(
            f"{path}:{line_no}: site id '{site}' is not in the lattice",
            {'path': str(path), 'line': line_no, 'id': site}
        ) from None


def write_gal(w: WeightMatrix, path, ids: Optional[Sequence[str]] = None, name: str = "lattice", idvar: str = "id"):
    """Write the neighbour structure of w (weights are not stored)."""
    ids = list(ids or w.ids or [str(i) for i in range(w.n)])
    out = [_header(w.n, name, idvar)]
    for i, site in enumerate(ids):
        neighbours = w.neighbors(i)
        out.append(f"{site} {len(neighbours)}")
        out.append(" ".join(ids[j] for j in neighbours))
    Path(path).write_text("\n".join(out) + "\n", encoding='utf-8')
    logger.info("GAL written", path=str(path), n=w.n, nnz=w.nnz)


def read_gal(path, ids: Sequence[str]) -> WeightMatrix:
    """
    Read a GAL file into a binary WeightMatrix in the given site order.

    Raises:
        ParseError: malformed file or site count mismatch
        UnknownSite: neighbour id not among `ids`
    """
    path = Path(path)
    ids = [str(site) for site in ids]
    index = {site: i for i, site in enumerate(ids)}
    lines = _lines(path)
    if not lines:
        raise ParseError(f"Empty GAL file: {path}", {'path': str(path)})

    n = _read_header(lines[0], path)
    if n != len(ids):
        raise ParseError(
            f"GAL declares {n} sites, lattice has {len(ids)}",
            {'path': str(path), 'declared': n, 'expected': len(ids)}
        )

    rows, cols = [], []
    cursor = 1
    while cursor < len(lines):
        line_no = cursor + 1
        head = lines[cursor].split()
        if len(head) != 2:
            raise ParseError(f"{path}:{line_no}: expected '<id> <degree>'", {'path': str(path), 'line': line_no})
        site, degree_text = head
        try:
            degree = int(degree_text)
        except ValueError:
            raise ParseError(f"{path}:{line_no}: degree is not an integer", {'path': str(path), 'line': line_no}) from None
        i = _resolve(site, index, path, line_no)
        cursor += 1

        if degree == 0:
            # empty neighbour line may have been dropped with the blank lines
            continue
        if cursor >= len(lines):
            raise ParseError(f"{path}: missing neighbour line for site {site}", {'path': str(path)})
        neighbours = lines[cursor].split()
        if len(neighbours) != degree:
            raise ParseError(
                f"{path}:{cursor + 1}: site {site} declares {degree} neighbours, lists {len(neighbours)}",
                {'path': str(path), 'line': cursor + 1}
            )
        for other in neighbours:
            rows.append(i)
            cols.append(_resolve(other, index, path, cursor + 1))
        cursor += 1

    return WeightMatrix.from_pairs(len(ids), rows, cols, ids=tuple(ids))


def write_gwt(w: WeightMatrix, path, ids: Optional[Sequence[str]] = None, name: str = "lattice", idvar: str = "id"):
    """Write every stored weight as a '<id_i> <id_j> <w>' triple."""
    ids = list(ids or w.ids or [str(i) for i in range(w.n)])
    out = [_header(w.n, name, idvar)]
    for i, j, value in w.entries():
        out.append(f"{ids[i]} {ids[j]} {value!r}")
    Path(path).write_text("\n".join(out) + "\n", encoding='utf-8')
    logger.info("GWT written", path=str(path), n=w.n, nnz=w.nnz)


def read_gwt(
    path,
    ids: Sequence[str],
    standardization: Standardization = Standardization.ROW
) -> WeightMatrix:
    """Read weighted triples; the caller states the standardization they encode."""
    path = Path(path)
    ids = [str(site) for site in ids]
    index = {site: i for i, site in enumerate(ids)}
    lines = _lines(path)
    if not lines:
        raise ParseError(f"Empty GWT file: {path}", {'path': str(path)})

    start = 0
    first = lines[0].split()
    if len(first) != 3:
        n = _read_header(lines[0], path)
        if n != len(ids):
            raise ParseError(
                f"GWT declares {n} sites, lattice has {len(ids)}",
                {'path': str(path), 'declared': n, 'expected': len(ids)}
            )
        start = 1

    triples: List[Tuple[int, int, float]] = []
    for offset, line in enumerate(lines[start:], start=start + 1):
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"{path}:{offset}: expected '<id_i> <id_j> <w>'", {'path': str(path), 'line': offset})
        try:
            value = float(tokens[2])
        except ValueError:
            raise ParseError(f"{path}:{offset}: weight is not a number", {'path': str(path), 'line': offset}) from None
        triples.append((_resolve(tokens[0], index, path, offset), _resolve(tokens[1], index, path, offset), value))

    rows = np.array([t[0] for t in triples], dtype=np.intp)
    cols = np.array([t[1] for t in triples], dtype=np.intp)
    data = np.array([t[2] for t in triples], dtype=float)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(len(ids), len(ids)))
    return WeightMatrix(sparse=matrix, standardization=standardization, ids=tuple(ids))
