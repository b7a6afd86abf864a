# experiment\import_handler.py
"""
Import handler for field checkpoints written by the export handler.
"""

import csv
import logging
import re
from typing import Dict, Tuple

import numpy as np

from numerics.core import Grid, SpeciesState
from numerics.errors import GridError

logger = logging.getLogger(__name__)

_HEADER = re.compile(r'^#\s*grid\s+(?P<body>.*)$')


def parse_grid_header(line: str) -> Tuple[Grid, float]:
    """
    Read ``# grid dim=.. cells=.. origin=.. spacing=.. time=..``.

    Raises:
        GridError: If the line is not a grid header or a key is missing.
    """
    match = _HEADER.match(line.strip())
    if not match:
        raise GridError(f"not a grid header: {line.strip()!r}")
    entries: Dict[str, str] = {}
    for token in match.group('body').split():
        key, _, value = token.partition('=')
        entries[key] = value
    missing = [key for key in ('dim', 'cells', 'origin', 'spacing', 'time') if key not in entries]
    if missing:
        raise GridError(f"grid header lacks {', '.join(missing)}")
    dim = int(entries['dim'])
    cells = tuple(int(v) for v in entries['cells'].split(','))
    origin = tuple(float(v) for v in entries['origin'].split(','))
    spacing = tuple(float(v) for v in entries['spacing'].split(','))
    return Grid(dim, cells, origin, spacing), float(entries['time'])


class FieldImportHandler:
    """Handles reading field CSV files back into species states."""

    @staticmethod
    def import_field_csv(file_path) -> SpeciesState:
        """
        Read a field CSV.

        Raises:
            Exception: If the file cannot be read or does not match its header.
        """
        try:
            with open(file_path, 'r', newline='', encoding='utf-8') as handle:
                grid, time = parse_grid_header(handle.readline())
                reader = csv.reader(handle)
                columns = next(reader)
                species = [c for c in columns if c.startswith('u')]
                fields = np.full((len(species),) + grid.shape, np.nan)
                seen = 0
                for row in reader:
                    if not row:
                        continue
                    index = tuple(int(v) for v in row[:grid.dim])
                    for i, value in enumerate(row[grid.dim:grid.dim + len(species)]):
                        fields[(i,) + index] = float(value)
                    seen += 1
            if seen != int(np.prod(grid.shape)):
                raise GridError(f"expected {int(np.prod(grid.shape))} rows, found {seen}")
            return SpeciesState(grid, fields, time)
        except Exception as e:
            logger.error(f"Error importing field from {file_path}: {e}", exc_info=True)
            raise Exception(f"Failed to import field from CSV: {str(e)}")
