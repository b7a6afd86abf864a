# experiment\__init__.py
from .scenario import (
    Bump,
    Scenario,
    ScenarioDefaults,
    CHECK_STAGES,
    parse_scenario,
    parse_scenario_text,
)
from .export_handler import ExportHandler, FieldExportHandler, grid_header
from .import_handler import FieldImportHandler, parse_grid_header
from .observers import CheckpointObserver
from .runner import (
    CheckResult,
    ExperimentResult,
    ExperimentRunner,
    run_experiment,
    run_path,
    run_many,
    verify_all,
    combined_exit_code,
)
from .study import StudyResult, refinement_study, run_study
