# experiment\study.py
"""
Grid refinement studies against a scenario's exact solution.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from numerics.core import l1_difference
from numerics.errors import PreconditionError
from numerics.numerics_config import run_timer
from numerics.report import ErrorRow, ErrorTable
from numerics.solver import run
from numerics.travelling import dirichlet_tw_run

from .export_handler import ExportHandler
from .scenario import Scenario

logger = logging.getLogger(__name__)

STUDY_FILE = 'study_errors.csv'


@dataclass
class StudyResult:
    """
    Attributes:
        table (ErrorTable): Errors per resolution, coarsest first.
        inconclusive (bool): Errors did not decrease under every refinement.
    """
    table: ErrorTable
    inconclusive: bool = False

    def verdict(self) -> dict:
        return {
            'inconclusive': self.inconclusive,
            'min_order': self.table.min_order(),
            'rows': self.table.to_rows(),
        }


def _barenblatt_table(scenario: Scenario, exact, levels: int) -> ErrorTable:
    t0, t_end = scenario.run.t0, scenario.run.t_end
    cfg = scenario.solver_config()
    table = ErrorTable()
    for level in range(levels):
        grid = scenario.grid.refined(2 ** level)
        final, _ = run(exact(grid, t0), cfg, t_end)
        reference = exact(grid, t_end)
        species_l1 = l1_difference(final, reference)
        linf = float(np.max(np.abs(final.fields - reference.fields)))
        row = table.add(ErrorRow(grid.h_min, math.fsum(species_l1), linf, species_l1))
        logger.info(f"Barenblatt run h={row.h:.4g}: L1={row.L1:.3e}, Linf={row.Linf:.3e}, "
                    f"order={row.order_estimate:.3f}")
    return table


def refinement_study(scenario: Scenario, levels: int) -> StudyResult:
    """
    Run the scenario at h, h/2, ... and tabulate errors with observed orders
    log2(e_h / e_{h/2}).

    Raises:
        PreconditionError: If levels < 2, or the scenario has no closed-form
            solution or no run section.
    """
    levels = int(levels)
    if levels < 2:
        raise PreconditionError(f"a refinement study needs at least 2 levels, got {levels}")
    exact = scenario.exact_solution()
    if exact is None:
        raise PreconditionError(f"scenario {scenario.name!r} has no exact solution to compare with")
    if scenario.run is None:
        raise PreconditionError(f"scenario {scenario.name!r} has no run section")

    run_timer.start_operation(f"study {scenario.name}")
    if scenario.is_wave:
        table = dirichlet_tw_run(scenario.travelling_wave(), scenario.grid,
                                 scenario.run.t0, scenario.run.t_end, levels)
    else:
        table = _barenblatt_table(scenario, exact, levels)
    run_timer.end_operation(f"study {scenario.name}")

    result = StudyResult(table, not table.is_monotone())
    if result.inconclusive:
        logger.warning(f"Study of {scenario.name}: errors do not decrease monotonically, "
                       f"result inconclusive")
    else:
        logger.info(f"Study of {scenario.name}: observed orders {table.orders()}")
    return result


def run_study(scenario: Scenario, levels: int, run_dir) -> StudyResult:
    """Study plus its error table written into run_dir."""
    result = refinement_study(scenario, levels)
    ExportHandler(run_dir).export_error_table(result.table, STUDY_FILE)
    return result
