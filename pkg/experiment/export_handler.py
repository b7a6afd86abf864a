# experiment\export_handler.py
"""
Export handler for experiment artifacts - writes field checkpoints, diagnostics
tables and the harnack sweep into a run directory.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from numerics.core import Grid, SpeciesState

logger = logging.getLogger(__name__)


def _format_axis_values(values: Sequence) -> str:
    return ','.join(repr(v) for v in values)


def grid_header(grid: Grid, time: float) -> str:
    """Comment line that precedes every field CSV."""
    return (f"# grid dim={grid.dim} cells={_format_axis_values(grid.cells)} "
            f"origin={_format_axis_values(grid.origin)} "
            f"spacing={_format_axis_values(grid.spacing)} time={float(time)!r}")


class FieldExportHandler:
    """
    Low-level writers. Every method raises on I/O failure; ExportHandler turns
    that into a logged (False, message) result.
    """

    @staticmethod
    def export_field_csv(state: SpeciesState, file_path):
        """
        Write one state: the grid header line, then one row per cell with the
        cell indexes followed by u1..uk.
        """
        try:
            grid = state.grid
            index_names = ['i', 'j'][:grid.dim]
            species_names = [f'u{i + 1}' for i in range(state.k)]
            with open(file_path, 'w', newline='', encoding='utf-8') as handle:
                handle.write(grid_header(grid, state.time) + '\n')
                writer = csv.writer(handle)
                writer.writerow(index_names + species_names)
                for index in np.ndindex(*grid.shape):
                    writer.writerow(list(index) + [repr(float(state.fields[(i,) + index]))
                                                   for i in range(state.k)])
        except Exception as e:
            raise Exception(f"Failed to export field to CSV: {str(e)}")

    @staticmethod
    def export_rows_csv(rows: Iterable[Dict[str, Any]], fieldnames: List[str], file_path):
        """Write dict rows under a fixed header."""
        try:
            with open(file_path, 'w', newline='', encoding='utf-8') as handle:
                writer = csv.DictWriter(handle, fieldnames=fieldnames, extrasaction='ignore')
                writer.writeheader()
                for row in rows:
                    writer.writerow({name: _format_cell(row.get(name, math.nan)) for name in fieldnames})
        except Exception as e:
            raise Exception(f"Failed to export to CSV: {str(e)}")


def _format_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class ExportHandler:
    """
    Handles the artifact layout of one run directory.

    Layout:
        fields/field_0000.csv ...   sampled states
        report.csv                  per-sample diagnostics (t, <metrics>)
        entropy.csv                 tau, H, I1, I2, dH_dtau_numeric
        errors.csv                  h, L1, Linf, order_estimate
        harnack.csv                 T, R, species, Q
    """

    REPORT_FILE = 'report.csv'
    ENTROPY_FILE = 'entropy.csv'
    ERRORS_FILE = 'errors.csv'
    HARNACK_FILE = 'harnack.csv'
    FIELDS_DIR = 'fields'

    ENTROPY_COLUMNS = ['tau', 'H', 'I1', 'I2', 'dH_dtau_numeric']
    ERROR_COLUMNS = ['h', 'L1', 'Linf', 'order_estimate']
    HARNACK_COLUMNS = ['T', 'R', 'species', 'Q']

    def __init__(self, run_dir):
        """
        Args:
            run_dir: Directory that receives the artifacts; created on demand.
        """
        self.run_dir = Path(run_dir)
        self.written: List[str] = []

    def _target(self, name: str) -> Path:
        path = self.run_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _record(self, path: Path) -> str:
        relative = path.relative_to(self.run_dir).as_posix()
        self.written.append(relative)
        logger.debug(f"Wrote {path}")
        return relative

    def export_checkpoint(self, state: SpeciesState, index: int):
        """Field CSV number index of the run."""
        try:
            path = self._target(f"{self.FIELDS_DIR}/field_{index:04d}.csv")
            FieldExportHandler.export_field_csv(state, path)
            return True, self._record(path)
        except Exception as e:
            logger.error(f"Error writing checkpoint at t={state.time:.6g}: {e}", exc_info=True)
            return False, str(e)

    def export_report(self, report):
        """Per-sample metrics as ``t,<metrics>``."""
        return self._export_rows(self.REPORT_FILE, report.to_rows(), ['t'] + report.metric_names())

    def export_entropy(self, trace):
        return self._export_rows(self.ENTROPY_FILE, [r.to_row() for r in trace], self.ENTROPY_COLUMNS)

    def export_error_table(self, table, name: str = ERRORS_FILE):
        return self._export_rows(name, table.to_rows(), self.ERROR_COLUMNS)

    def export_harnack(self, samples):
        rows = [{'T': s.T, 'R': s.R, 'species': s.species + 1, 'Q': s.Q} for s in samples]
        return self._export_rows(self.HARNACK_FILE, rows, self.HARNACK_COLUMNS)

    def _export_rows(self, name: str, rows, fieldnames: List[str]):
        try:
            path = self._target(name)
            FieldExportHandler.export_rows_csv(rows, fieldnames, path)
            return True, self._record(path)
        except Exception as e:
            logger.error(f"Error writing {name}: {e}", exc_info=True)
            return False, str(e)
