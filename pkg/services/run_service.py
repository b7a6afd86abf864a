# services\run_service.py
import json
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from numerics.report import json_safe

logger = logging.getLogger(__name__)

BASELINES_FILE = 'baselines.json'


class RunService:
    """
    Manages the output root: one directory per scenario, the run manifest and
    verdict records, and the store of empirical baselines shared by all runs.
    """

    def __init__(self, output_root):
        self.output_root = Path(output_root)

    def _sanitize_name(self, value: str) -> str:
        cleaned = re.sub(r'[^a-zA-Z0-9_-]+', '_', (value or '').strip())
        return cleaned[:64].strip('_') or 'scenario'

    def _atomic_json_write(self, path: Path, payload: Dict[str, Any]):
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.json', dir=path.parent, encoding='utf-8') as tmp:
            json.dump(json_safe(payload), tmp, indent=2, ensure_ascii=False, sort_keys=True)
            tmp.write('\n')
            temp_path = Path(tmp.name)
        os.replace(temp_path, path)

    def _read_json(self, path: Path, default: Any):
        if not path.exists():
            return default
        with path.open('r', encoding='utf-8') as handle:
            return json.load(handle)

    def run_directory(self, scenario_name: str) -> Path:
        """Directory for a scenario's artifacts, created on demand."""
        path = self.output_root / self._sanitize_name(scenario_name)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def save_manifest(self, run_dir: Path, manifest: Dict[str, Any]) -> Tuple[bool, str]:
        try:
            self._atomic_json_write(Path(run_dir) / 'manifest.json', manifest)
            return True, "Manifest saved"
        except Exception as e:
            logger.error(f"Error saving manifest: {e}", exc_info=True)
            return False, f"Could not save manifest: {e}"

    def save_verdict(self, run_dir: Path, verdict: Dict[str, Any]) -> Tuple[bool, str]:
        try:
            self._atomic_json_write(Path(run_dir) / 'verdict.json', verdict)
            return True, "Verdict saved"
        except Exception as e:
            logger.error(f"Error saving verdict: {e}", exc_info=True)
            return False, f"Could not save verdict: {e}"

    def load_verdict(self, run_dir: Path) -> Optional[Dict[str, Any]]:
        try:
            return self._read_json(Path(run_dir) / 'verdict.json', None)
        except Exception as e:
            logger.error(f"Error loading verdict: {e}", exc_info=True)
            return None

    def load_baselines(self) -> Dict[str, float]:
        try:
            return self._read_json(self.output_root / BASELINES_FILE, {})
        except Exception as e:
            logger.error(f"Error loading baselines: {e}", exc_info=True)
            return {}

    def record_baselines(self, entries: Dict[str, float]) -> Tuple[bool, str]:
        """Add baselines that are not stored yet; existing values are kept."""
        if not entries:
            return True, "Nothing to record"
        try:
            baselines = self.load_baselines()
            added = {k: float(v) for k, v in entries.items() if k not in baselines}
            if added:
                baselines.update(added)
                self._atomic_json_write(self.output_root / BASELINES_FILE, baselines)
                logger.info(f"Recorded baselines {sorted(added)}")
            return True, f"{len(added)} baselines recorded"
        except Exception as e:
            logger.error(f"Error recording baselines: {e}", exc_info=True)
            return False, f"Could not record baselines: {e}"

    def compare_baseline(self, key: str, value: float, growth: float,
                         record: bool = True) -> Tuple[bool, float, bool]:
        """
        Compare value with the stored baseline for key. A missing baseline is
        taken from value (and stored when record is set).

        Returns:
            tuple: (passed, baseline, new). The check passes when
            value <= growth * baseline.
        """
        baselines = self.load_baselines()
        if key not in baselines:
            if record:
                self.record_baselines({key: value})
            return True, float(value), True
        baseline = float(baselines[key])
        passed = value <= growth * baseline
        if not passed:
            logger.warning(f"Baseline {key}: {value:.6g} exceeds {growth} x {baseline:.6g}")
        return passed, baseline, False
