# tests\test_export_import.py
import csv
import math

import numpy as np
import pytest

from conftest import bump
from experiment.export_handler import ExportHandler, FieldExportHandler, grid_header
from experiment.import_handler import FieldImportHandler, parse_grid_header
from experiment.observers import CheckpointObserver
from numerics.core import Grid, SpeciesState
from numerics.errors import GridError
from numerics.report import ErrorRow, ErrorTable, json_safe
from numerics.selfsim import EntropyRecord
from numerics.diagnostics import HarnackSample
from numerics.solver import SamplingPlan, SolverConfig, run


def _read_rows(path):
    with open(path, newline='', encoding='utf-8') as handle:
        return list(csv.DictReader(handle))


def test_grid_header_round_trip():
    grid = Grid.box([-0.3, 0.1], [0.7, 2.0], (5, 7))
    parsed, time = parse_grid_header(grid_header(grid, 0.1))
    assert parsed == grid
    assert time == 0.1


def test_bad_grid_header():
    with pytest.raises(GridError):
        parse_grid_header("i,u1")
    with pytest.raises(GridError):
        parse_grid_header("# grid dim=1 cells=4")


def test_field_csv_is_lossless(tmp_path):
    grid = Grid.centered(2, 1.0, (6, 5))
    rng = np.random.default_rng(3)
    state = SpeciesState(grid, rng.random((2, 6, 5)) / 3.0, 0.123456789)
    path = tmp_path / 'field.csv'
    FieldExportHandler.export_field_csv(state, path)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('# grid dim=2')
    assert lines[1] == 'i,j,u1,u2'
    loaded = FieldImportHandler.import_field_csv(path)
    assert loaded.grid == grid
    assert loaded.time == state.time
    np.testing.assert_array_equal(loaded.fields, state.fields)


def test_truncated_field_csv_fails(tmp_path):
    grid = Grid.centered(1, 1.0, 8)
    path = tmp_path / 'field.csv'
    FieldExportHandler.export_field_csv(SpeciesState(grid, np.ones(8)), path)
    path.write_text('\n'.join(path.read_text().splitlines()[:-2]) + '\n')
    with pytest.raises(Exception, match="Failed to import"):
        FieldImportHandler.import_field_csv(path)


def test_report_and_tables(tmp_path, two_bumps):
    exporter = ExportHandler(tmp_path / 'run')
    _, report = run(two_bumps, SolverConfig(m=2.0), 0.02, [], SamplingPlan(times=(0.01,)))
    report.records[0].metrics['x'] = 1.0
    ok, path = exporter.export_report(report)
    assert ok and path == 'report.csv'
    rows = _read_rows(tmp_path / 'run' / 'report.csv')
    assert list(rows[0]) == ['t', 'x']
    assert len(rows) == 3

    trace = [EntropyRecord(0.0, 1.0, 0.5, 0.1), EntropyRecord(0.1, 0.95, 0.4, 0.1, -0.5)]
    assert exporter.export_entropy(trace)[0]
    rows = _read_rows(tmp_path / 'run' / 'entropy.csv')
    assert list(rows[0]) == ['tau', 'H', 'I1', 'I2', 'dH_dtau_numeric']
    assert math.isnan(float(rows[0]['dH_dtau_numeric']))

    table = ErrorTable()
    table.add(ErrorRow(0.1, 0.04, 0.1))
    table.add(ErrorRow(0.05, 0.02, 0.06))
    assert exporter.export_error_table(table)[0]
    rows = _read_rows(tmp_path / 'run' / 'errors.csv')
    assert float(rows[1]['order_estimate']) == pytest.approx(1.0)

    assert exporter.export_harnack([HarnackSample(0.25, 1.0, 0, 0.3)])[0]
    rows = _read_rows(tmp_path / 'run' / 'harnack.csv')
    assert rows[0]['species'] == '1'
    assert exporter.written == ['report.csv', 'entropy.csv', 'errors.csv', 'harnack.csv']


def test_export_failure_is_reported(tmp_path, two_bumps):
    blocker = tmp_path / 'blocked'
    blocker.write_text('not a directory')
    ok, message = ExportHandler(blocker).export_checkpoint(two_bumps, 0)
    assert not ok
    assert message


def test_checkpoint_observer_writes_every_sample(tmp_path, two_bumps):
    exporter = ExportHandler(tmp_path)
    observer = CheckpointObserver(exporter)
    _, report = run(two_bumps, SolverConfig(m=2.0), 0.02, [observer], SamplingPlan(times=(0.01,)))
    assert observer.paths == ['fields/field_0000.csv', 'fields/field_0001.csv', 'fields/field_0002.csv']
    assert report.summary['checkpoints'] == 3
    last = FieldImportHandler.import_field_csv(tmp_path / observer.paths[-1])
    assert last.time == 0.02


def test_json_safe():
    value = {'a': np.float64(1.5), 'b': [np.int64(2), math.nan, math.inf], 'c': np.array([1.0, -math.inf])}
    assert json_safe(value) == {'a': 1.5, 'b': [2, 'nan', 'inf'], 'c': [1.0, '-inf']}
