"""CSV attribute tables."""
import re
from pathlib import Path

import numpy as np
import pandas as pd
import structlog

from lattice_assoc.errors import DuplicateId, NonNumericValue, ParseError
from lattice_assoc.lattice.models import AttributeTable, Lattice

logger = structlog.get_logger()

# plain decimal or scientific notation; no thousands separators, no decimal commas
NUMBER = re.compile(r'[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?')


def _parse_number(text: str, line: int, column: str, path: Path) -> float:
    token = text.strip() if isinstance(text, str) else ''
    if not NUMBER.fullmatch(token):
        raise NonNumericValue(
            f"{path}: line {line}, column '{column}': '{text}' is not a number",
            {'path': str(path), 'line': line, 'column': column, 'value': text}
        )
    return float(token)


def read_attributes(path, lattice: Lattice) -> AttributeTable:
    """
    Read `id,<var1>,<var2>,...` and align the rows to the lattice's site order.

    Raises:
        ParseError: unreadable file or bad header
        NonNumericValue: a cell outside decimal/scientific notation (line and column in the message)
        DuplicateId / UnknownSite / MissingSite: id mismatches against the lattice
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"Cannot read {path}: {e}", {'path': str(path)}) from None

    columns = [str(c).strip() for c in frame.columns]
    if not columns or columns[0] != 'id':
        raise ParseError(f"{path}: first column must be 'id'", {'path': str(path), 'header': columns})
    if len(columns) < 2:
        raise ParseError(f"{path}: no variable columns", {'path': str(path)})
    if len(set(columns)) != len(columns):
        raise ParseError(f"{path}: duplicate column names", {'path': str(path), 'header': columns})
    frame.columns = columns

    ids = [site.strip() for site in frame['id']]
    duplicated = pd.Series(ids).duplicated()
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise DuplicateId(
            f"{path}: line {row + 2}: id '{ids[row]}' appears more than once",
            {'path': str(path), 'line': row + 2, 'id': ids[row]}
        )

    values = {}
    for column in columns[1:]:
        values[column] = np.array(
            [_parse_number(text, row + 2, column, path) for row, text in enumerate(frame[column])],
            dtype=float
        )

    table = AttributeTable.from_records(lattice, ids, values)
    logger.info("Attributes read", path=str(path), n=lattice.n, variables=list(table.names))
    return table


def write_attributes(table: AttributeTable, path) -> None:
    """Write the table in lattice site order."""
    frame = pd.DataFrame(table.values, columns=list(table.names))
    frame.insert(0, 'id', list(table.lattice.ids))
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.info("Attributes written", path=str(path), n=table.lattice.n, variables=list(table.names))
