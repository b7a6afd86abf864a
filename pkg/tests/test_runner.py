# tests\test_runner.py
import json
import math
import os

import pytest

from conftest import SCENARIO_DIR
from experiment.runner import (EXIT_CHECK_FAILED, EXIT_PASS, CheckResult, ExperimentResult, ExperimentRunner,
                               combined_exit_code, run_experiment, run_many, run_path, verify_all)
from experiment.scenario import parse_scenario, parse_scenario_text
from main import main
from numerics.errors import PreconditionError
from numerics.report import DiagnosticsReport
from services.run_service import BASELINES_FILE, RunService

SMALL = """
name: small
model: {m: 2.0, n: 1}
grid: {cells: 64, half_width: 2.0}
initial:
  - {species: 1, center: [-0.5], radius: 0.4, amplitude: 1.0}
  - {species: 2, center: [0.5], radius: 0.4, amplitude: 0.5}
run: {t0: 0.0, t_end: 0.1, stride: 10}
"""

HARNACK = """
name: h
model: {m: 2.0, k: 2, n: 1}
grid: {cells: 64}
initial:
  - {species: 1, center: [0.0], radius: 0.5, amplitude: 1.0}
  - {species: 2, center: [0.0], radius: 0.5, amplitude: 0.6}
harnack: {times: [0.05, 0.1], radius_factors: [1.5, 2.0], mu0: %s}
checks: [harnack]
"""


def _read_verdict(run_dir):
    with open(os.path.join(run_dir, 'verdict.json'), encoding='utf-8') as handle:
        return json.load(handle)


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def test_result_status():
    assert ExperimentResult('a', 0).status == 'pass'
    assert ExperimentResult('a', 1).status == 'fail'
    assert ExperimentResult('a', 3).status == 'error'
    result = ExperimentResult('a', 1, [CheckResult('mass', True, 1e-16), CheckResult('cap', False, 2.0, "over")])
    assert result.check('cap').detail == "over"
    assert result.check('harnack') is None
    assert result.verdict()['checks']['mass'] == {'passed': True, 'value': 1e-16, 'detail': ""}


def test_combined_exit_code():
    assert combined_exit_code([]) == EXIT_PASS
    assert combined_exit_code([ExperimentResult('a', 0), ExperimentResult('b', 1)]) == EXIT_CHECK_FAILED
    assert combined_exit_code([ExperimentResult('a', 2), ExperimentResult('b', 3)]) == 3


def test_passing_run_writes_run_directory(tmp_path):
    scenario = parse_scenario_text(SMALL + "checks: [mass, cauchy_schwarz, support_retention]\n")
    result = run_experiment(scenario, tmp_path)
    assert result.exit_code == EXIT_PASS, result.verdict()
    assert [c.name for c in result.checks] == ['mass', 'cauchy_schwarz', 'support_retention']

    run_dir = tmp_path / 'small'
    verdict = _read_verdict(run_dir)
    assert verdict['status'] == 'pass'
    assert set(verdict['checks']) == {'mass', 'cauchy_schwarz', 'support_retention'}
    manifest = json.loads((run_dir / 'manifest.json').read_text(encoding='utf-8'))
    assert manifest['scenario']['name'] == 'small'
    assert 'report.csv' in manifest['artifacts']
    assert 'fields/field_0000.csv' in manifest['artifacts']
    assert manifest['stages']['run']['summary']['steps'] > 0
    assert (run_dir / 'report.csv').is_file()


def test_checkpoints_can_be_disabled(tmp_path):
    scenario = parse_scenario_text(SMALL + "output: {checkpoints: false}\n")
    result = run_experiment(scenario, tmp_path)
    assert result.passed
    assert not (tmp_path / 'small' / 'fields').exists()


def test_manifest_lists_sampled_times(tmp_path):
    result = run_experiment(parse_scenario_text(SMALL + "checks: [mass]\n"), tmp_path)
    assert result.passed
    manifest = json.loads((tmp_path / 'small' / 'manifest.json').read_text(encoding='utf-8'))
    times = manifest['times']
    assert times == sorted(times)
    assert times[0] == pytest.approx(0.0)
    assert times[-1] == pytest.approx(0.1)
    assert len(times) == manifest['stages']['run']['samples']


def test_artifact_write_failures_are_flagged(tmp_path):
    run_dir = tmp_path / 'small'
    (run_dir / 'report.csv').mkdir(parents=True)
    (run_dir / 'fields').write_text("not a directory", encoding='utf-8')
    result = run_experiment(parse_scenario_text(SMALL + "checks: [mass]\n"), tmp_path)
    assert result.check('mass').passed
    flags = [f for f in _read_verdict(run_dir)['flags'] if f['name'] == 'artifact_write']
    assert len(flags) == 2
    assert any("checkpoint" in f['detail'] for f in flags)


def _trend_result(tmp_path, options, defects):
    scenario = parse_scenario_text(SMALL + f"checks: [{{ratio_trend: {options}}}]\n")
    runner = ExperimentRunner(scenario, RunService(tmp_path))
    report = DiagnosticsReport()
    for index, (time, defect) in enumerate(defects):
        report.open_record(time, index)
        report.put('ratio_defect', defect)
    runner._check_ratio_trend(report, None, None)
    return runner.results[-1]


def test_ratio_trend_needs_every_sample_to_decrease(tmp_path):
    samples = [(0.0, 0.9), (1.0, 0.5), (2.0, 0.6), (3.0, 0.2)]
    assert not _trend_result(tmp_path, '{}', samples).passed
    assert _trend_result(tmp_path, '{from: 1.5}', samples).passed
    assert _trend_result(tmp_path, '{}', [(0.0, 0.9), (1.0, 0.5), (2.0, 0.2)]).passed
    flat = _trend_result(tmp_path, '{}', [(0.0, 0.5), (1.0, 0.5)])
    assert not flat.passed
    short = _trend_result(tmp_path, '{from: 2.5}', samples)
    assert not short.passed
    assert short.value is None


ENTROPY = """
name: entropy_small
model: {m: 2.0, k: 2, n: 1}
grid: {cells: 128, half_width: 3.0}
initial:
  - {species: 1, center: [-0.25], radius: 0.5, amplitude: 0.5}
  - {species: 2, center: [0.25], radius: 0.5, amplitude: 0.5}
selfsim: {t0: 1.0, tau_span: 0.5, stride: 100}
checks: [{equilibrium_approach: {factor: %s}}]
"""


def test_equilibrium_approach_factor(tmp_path):
    loose = run_experiment(parse_scenario_text(ENTROPY % 1.0), tmp_path)
    assert loose.passed, loose.verdict()
    start, end = loose.check('equilibrium_approach').value
    assert end < start
    strict = run_experiment(parse_scenario_text(ENTROPY % 1e6), tmp_path)
    assert strict.exit_code == EXIT_CHECK_FAILED
    manifest = json.loads((tmp_path / 'entropy_small' / 'manifest.json').read_text(encoding='utf-8'))
    assert manifest['times'][0] == pytest.approx(1.0)
    assert manifest['times'][-1] == pytest.approx(math.exp(0.5))


def test_failing_check_exits_one(tmp_path):
    scenario = parse_scenario_text(SMALL.replace("[0.5], radius: 0.4",
                                                 "[0.5], radius: 0.35")
                                   + "checks: [mass, waiting_time]\n")
    result = run_experiment(scenario, tmp_path)
    assert result.exit_code == EXIT_CHECK_FAILED
    assert result.check('mass').passed
    assert not result.check('waiting_time').passed
    assert _read_verdict(result.run_dir)['status'] == 'fail'


def test_precondition_failure_exits_two(tmp_path):
    overlapping = SMALL.replace("center: [0.5]", "center: [0.1]") + "checks: [waiting_time]\n"
    result = run_experiment(parse_scenario_text(overlapping), tmp_path)
    assert result.exit_code == 2
    assert result.error['type'] == 'PreconditionError'
    assert _read_verdict(result.run_dir)['error']['type'] == 'PreconditionError'


def test_parse_failure_still_leaves_a_verdict(tmp_path):
    path = _write(tmp_path / 'broken.cfg', SMALL.replace("m: 2.0", "m: 0.5"))
    result = run_path(path, tmp_path / 'out')
    assert result.exit_code == 2
    assert result.scenario == 'broken'
    verdict = _read_verdict(tmp_path / 'out' / 'broken')
    assert verdict['status'] == 'error'
    assert any("m must be > 1" in issue for issue in verdict['error']['issues'])


def test_harnack_baseline_is_recorded_once(tmp_path):
    scenario = parse_scenario_text(HARNACK % 0.5)
    first = run_experiment(scenario, tmp_path, record_baselines=False)
    assert first.passed
    assert list(first.baselines) == ['h.harnack_max_Q']
    assert not (tmp_path / BASELINES_FILE).exists()

    second = run_experiment(scenario, tmp_path)
    assert second.passed
    stored = json.loads((tmp_path / BASELINES_FILE).read_text())
    assert stored['h.harnack_max_Q'] == pytest.approx(first.baselines['h.harnack_max_Q'])
    third = run_experiment(scenario, tmp_path)
    assert third.passed
    assert third.check('harnack').value['baseline'] == pytest.approx(stored['h.harnack_max_Q'])
    assert (tmp_path / 'h' / 'harnack.csv').is_file()


def test_harnack_mass_ratio_below_mu0(tmp_path):
    path = _write(tmp_path / 'h.cfg', HARNACK % 0.9)
    result = run_path(path, tmp_path / 'out')
    assert result.exit_code == 2
    assert not result.checks
    issues = _read_verdict(tmp_path / 'out' / 'h')['error']['issues']
    assert any('mu0' in issue for issue in issues)


def test_run_many_sequential_and_verify_all(tmp_path):
    scenarios = tmp_path / 'scenarios'
    scenarios.mkdir()
    _write(scenarios / 'a.cfg', SMALL.replace("name: small", "name: a"))
    _write(scenarios / 'b.cfg', SMALL.replace("name: small", "name: b").replace("m: 2.0", "m: 1.0"))
    results = verify_all(scenarios, tmp_path / 'out')
    assert [r.scenario for r in results] == ['a', 'b']
    assert [r.exit_code for r in results] == [0, 2]
    assert combined_exit_code(results) == 2


def test_verify_all_needs_scenarios(tmp_path):
    with pytest.raises(PreconditionError):
        verify_all(tmp_path, tmp_path / 'out')


def test_run_many_in_workers_stores_baselines(tmp_path):
    _write(tmp_path / 'h.cfg', HARNACK % 0.5)
    _write(tmp_path / 'small.cfg', SMALL)
    results = run_many([tmp_path / 'h.cfg', tmp_path / 'small.cfg'], tmp_path / 'out', jobs=2)
    assert [r.exit_code for r in results] == [0, 0]
    stored = json.loads((tmp_path / 'out' / BASELINES_FILE).read_text())
    assert 'h.harnack_max_Q' in stored


def test_main_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    good = _write(tmp_path / 'small.cfg', SMALL)
    bad = _write(tmp_path / 'bad.cfg', SMALL.replace("cells: 64", "cells: 1"))
    settings = str(tmp_path / 'settings.json')

    assert main(['--settings', settings, 'run', str(good), '--out', str(tmp_path / 'out')]) == 0
    assert "small: pass (exit 0)" in capsys.readouterr().out
    assert main(['--settings', settings, 'run', str(good), str(bad), '--out', str(tmp_path / 'out')]) == 2
    assert main(['--settings', settings, 'study', str(good), '--levels', '2', '--out', str(tmp_path / 'out')]) == 2
    assert main(['--settings', settings, 'verify-all', str(tmp_path / 'empty'), '--out', str(tmp_path / 'out')]) == 2


def test_main_uses_output_env(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv('SPME_OUT', str(tmp_path / 'env_out'))
    good = _write(tmp_path / 'small.cfg', SMALL)
    assert main(['--settings', str(tmp_path / 'settings.json'), 'run', str(good)]) == 0
    assert (tmp_path / 'env_out' / 'small' / 'verdict.json').is_file()


SHIPPED = ['barenblatt', 'proportionality', 'travelling', 'harnack', 'harnack_barenblatt', 'continuation',
           'isolation', 'synchronization', 'stabilization', 'entropy']


def test_every_shipped_scenario_is_exercised():
    shipped = {name[:-4] for name in os.listdir(SCENARIO_DIR) if name.endswith('.cfg')}
    assert shipped == set(SHIPPED)


@pytest.mark.slow
@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenario_passes(name, tmp_path):
    result = run_experiment(parse_scenario(os.path.join(SCENARIO_DIR, f'{name}.cfg')), tmp_path)
    assert result.exit_code == EXIT_PASS, result.verdict()
