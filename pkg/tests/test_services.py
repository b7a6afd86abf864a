# tests\test_services.py
import json
import math

import pytest

from services.run_service import BASELINES_FILE, RunService
from services.settings_service import OUTPUT_ENV_VAR, SettingsService


def test_missing_settings_file_gives_defaults(tmp_path):
    service = SettingsService(str(tmp_path / 'absent.json'), environ={})
    assert service.get_output_root() == 'spme_out'
    assert service.get_jobs() == 1
    assert service.get_default_cells() == {1: 2048, 2: 256}
    assert service.get_harnack_settings()['baseline_growth'] == 1.1
    assert service.get_checkpoints_enabled()


def test_partial_settings_are_backfilled(tmp_path):
    path = tmp_path / 'settings.json'
    path.write_text(json.dumps({'execution': {'jobs': 4}, 'resolution': {'cells_1d': 300}}))
    service = SettingsService(str(path), environ={})
    assert service.get_jobs() == 4
    assert service.get_default_cells() == {1: 300, 2: 256}
    assert service.get_logging_settings()['debug'] is False


def test_unreadable_settings_fall_back(tmp_path):
    path = tmp_path / 'settings.json'
    path.write_text('{not json')
    assert SettingsService(str(path), environ={}).get_jobs() == 1


def test_output_env_override(tmp_path):
    service = SettingsService(str(tmp_path / 'absent.json'), environ={OUTPUT_ENV_VAR: str(tmp_path / 'elsewhere')})
    assert service.get_output_root() == str(tmp_path / 'elsewhere')
    assert SettingsService(str(tmp_path / 'absent.json'), environ={OUTPUT_ENV_VAR: ''}).get_output_root() == 'spme_out'


def test_jobs_never_below_one(tmp_path):
    path = tmp_path / 'settings.json'
    path.write_text(json.dumps({'execution': {'jobs': 0}}))
    assert SettingsService(str(path), environ={}).get_jobs() == 1


def test_save_round_trip(tmp_path):
    path = tmp_path / 'settings.json'
    service = SettingsService(str(path), environ={})
    service.settings['execution']['jobs'] = 3
    service.save_settings()
    assert SettingsService(str(path), environ={}).get_jobs() == 3


def test_run_directory_is_sanitized(tmp_path):
    service = RunService(tmp_path)
    path = service.run_directory('two species / eps=1e-3')
    assert path.parent == tmp_path
    assert path.is_dir()
    assert path.name == 'two_species_eps_1e-3'
    assert service.run_directory('').name == 'scenario'


def test_manifest_and_verdict_are_sorted_json(tmp_path):
    service = RunService(tmp_path)
    run_dir = service.run_directory('demo')
    ok, _ = service.save_verdict(run_dir, {'status': 'pass', 'checks': [{'value': math.inf}], 'exit_code': 0})
    assert ok
    text = (run_dir / 'verdict.json').read_text(encoding='utf-8')
    assert text.index('"checks"') < text.index('"exit_code"') < text.index('"status"')
    assert service.load_verdict(run_dir)['checks'][0]['value'] == 'inf'
    assert service.save_manifest(run_dir, {'scenario': {'name': 'demo'}})[0]
    assert not list(run_dir.glob('*.json.tmp')) and sorted(p.name for p in run_dir.iterdir()) == ['manifest.json', 'verdict.json']
    assert service.load_verdict(tmp_path / 'nowhere') is None


def test_baselines_are_recorded_once(tmp_path):
    service = RunService(tmp_path)
    assert service.record_baselines({}) == (True, "Nothing to record")
    assert service.record_baselines({'a': 2.0})[0]
    service.record_baselines({'a': 5.0, 'b': 1.0})
    assert json.loads((tmp_path / BASELINES_FILE).read_text()) == {'a': 2.0, 'b': 1.0}


def test_compare_baseline(tmp_path):
    service = RunService(tmp_path)
    assert service.compare_baseline('q', 3.0, 1.1, record=False) == (True, 3.0, True)
    assert service.load_baselines() == {}
    assert service.compare_baseline('q', 3.0, 1.1) == (True, 3.0, True)
    assert service.compare_baseline('q', 3.2, 1.1) == (True, 3.0, False)
    passed, baseline, new = service.compare_baseline('q', 3.5, 1.1)
    assert not passed and baseline == 3.0 and not new
