# services\settings_service.py
import copy
import json
import logging
import os

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = 'SPME_OUT'


class SettingsService:
    """
    Manages loading and saving of laboratory settings from a JSON file.
    Holds the defaults the command line falls back on: output root, worker count,
    default resolution, the Harnack sweep and logging.
    """
    def __init__(self, file_path='settings.json', environ=None):
        """
        Initializes the SettingsService.

        Args:
            file_path (str): The path to the settings file.
            environ (dict, optional): Environment to read overrides from; os.environ by default.
        """
        self.file_path = file_path
        self.environ = os.environ if environ is None else environ
        self.settings = self.load_settings()

    def load_settings(self):
        """
        Loads the settings from the JSON file. If the file doesn't exist or
        cannot be parsed, it returns the default dictionary.
        """
        if not os.path.exists(self.file_path):
            return self._get_default_settings()
        try:
            with open(self.file_path, 'r') as f:
                settings = json.load(f)
        except (json.JSONDecodeError, FileNotFoundError):
            logger.warning(f"Unreadable settings file {self.file_path}; using defaults")
            return self._get_default_settings()
        # Ensure every section exists for backward compatibility
        for section, values in self._get_default_settings().items():
            current = settings.setdefault(section, values)
            if isinstance(values, dict) and isinstance(current, dict):
                for key, value in values.items():
                    current.setdefault(key, value)
        return settings

    def _get_default_settings(self):
        """Returns the default settings structure."""
        return copy.deepcopy({
            "output": {
                "root": "spme_out",
                "checkpoints": True
            },
            "execution": {
                "jobs": 1
            },
            "resolution": {
                "cells_1d": 2048,
                "cells_2d": 256
            },
            "harnack": {
                "times": [0.25, 1.0],
                "radius_factors": [1.5, 2.0, 4.0],
                "baseline_growth": 1.1
            },
            "logging": {
                "debug": False,
                "log_file": "spme_debug.log"
            }
        })

    def save_settings(self):
        """Writes the current settings back to the JSON file."""
        with open(self.file_path, 'w') as f:
            json.dump(self.settings, f, indent=4)

    def get_output_root(self):
        """Output root: SPME_OUT when set, else the configured root."""
        override = self.environ.get(OUTPUT_ENV_VAR)
        if override:
            return override
        return self.settings['output']['root']

    def get_checkpoints_enabled(self):
        return bool(self.settings['output'].get('checkpoints', True))

    def get_jobs(self):
        return max(1, int(self.settings['execution'].get('jobs', 1)))

    def get_default_cells(self):
        """Returns the default cells per axis keyed by dimension."""
        resolution = self.settings['resolution']
        return {1: int(resolution['cells_1d']), 2: int(resolution['cells_2d'])}

    def get_harnack_settings(self):
        """Returns the Harnack sweep settings."""
        return self.settings.get('harnack', self._get_default_settings()['harnack'])

    def get_logging_settings(self):
        return self.settings.get('logging', self._get_default_settings()['logging'])
