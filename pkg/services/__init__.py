# services\__init__.py
from .settings_service import SettingsService, OUTPUT_ENV_VAR
from .run_service import RunService, BASELINES_FILE
