# numerics\numerics_config.py
"""
Numerical configuration for the SPME laboratory.
Centralized constants for thresholds, quadrature, stepping and tolerances.
"""

import logging
import math
import time

logger = logging.getLogger(__name__)


class NumericsConfig:
    """
    Configuration for the discrete schemes and the verification checks.
    Adjust these values when changing the default resolution.
    """

    # Support Extraction
    # ==================

    # Absolute floor below which a cell never counts as supported
    SUPPORT_FLOOR = 1e-10

    # Relative threshold (fraction of the field maximum)
    SUPPORT_RELATIVE = 1e-8


    # Quadrature and Calibration
    # ==========================

    # Midpoint points on [0, R] for the radial mass integral
    QUADRATURE_POINTS = 2 ** 16

    # Bisection tolerance on C (relative); mass is a power of C so this
    # keeps the mass error below 1e-12
    BISECTION_RTOL = 1e-14

    # Bracket expansion limit when searching C_hi
    BISECTION_MAX_DOUBLINGS = 200


    # Time Stepping
    # =============

    # Fraction of the explicit diffusion limit used by default
    CFL_SAFETY = 0.9

    # Fraction of the combined diffusion/drift limit in self-similar variables
    DRIFT_SAFETY = 0.9

    # Largest step when the diffusivity vanishes everywhere
    MAX_DT = 1.0

    # Steps below this size count as stagnation
    DT_FLOOR = 1e-14

    # Relative slack before a caller-chosen dt is flagged as exceeding the CFL bound
    CFL_VIOLATION_SLACK = 1e-12


    # Invariant Tolerances
    # ====================

    MASS_DRIFT_TOL = 1e-12
    PROPORTIONALITY_TOL = 1e-12
    CAUCHY_SCHWARZ_SLACK = -1e-12
    CAP_TOL = 1e-12

    # Subsolution residual tolerance is SUBSOLUTION_FACTOR * h
    SUBSOLUTION_FACTOR = 10.0

    # Lost support cells tolerated per axis direction between samples
    SUPPORT_CHATTER_CELLS = 1

    # Linf decay: slope must stay below -a1 + LINF_SLOPE_SLACK
    LINF_SLOPE_SLACK = 0.05

    # Entropy: per-record increase tolerated, relative to |H|
    ENTROPY_MONOTONE_RTOL = 1e-8

    # Leading tau interval left out of the dissipation balance (start-up layer)
    BALANCE_WARMUP = 0.01

    # Relative drift of H along the discrete equilibrium, and the error ratio
    # under one refinement that counts as second-order approach to it
    EQUILIBRIUM_ENTROPY_TOL = 1e-6
    EQUILIBRIUM_ENTROPY_RATIO = 3.0

    # L1 distance to equilibrium must shrink by this factor over the selfsim span
    EQUILIBRIUM_APPROACH_FACTOR = 4.0


    # Diagnostics Windows
    # ===================

    # Compact window for the weighted sup distance (fraction of support radius)
    COMPACT_WINDOW_FRACTION = 0.8

    # Harnack sweep defaults
    HARNACK_TIMES = (0.25, 1.0)
    HARNACK_RADIUS_FACTORS = (1.5, 2.0, 4.0)

    # Baselines may not grow by more than this factor
    BASELINE_GROWTH = 1.1


    # Domain Sizing
    # =============

    # Margin on the Barenblatt support radius at t_end
    DOMAIN_MARGIN = 1.2

    # Default cells per axis
    DEFAULT_CELLS_1D = 2048
    DEFAULT_CELLS_2D = 256


    # Advanced Settings
    # =================

    # Log elapsed wall time of runs and studies
    ENABLE_TIMING_LOGS = True


    @classmethod
    def support_threshold(cls, field_max: float) -> float:
        """Default support threshold for a field whose maximum is field_max."""
        return max(cls.SUPPORT_FLOOR, cls.SUPPORT_RELATIVE * float(field_max))

    @classmethod
    def default_cells(cls, dim: int) -> int:
        """Default cells per axis for the given dimension."""
        return cls.DEFAULT_CELLS_1D if dim == 1 else cls.DEFAULT_CELLS_2D

    @classmethod
    def subsolution_tolerance(cls, h: float) -> float:
        return cls.SUBSOLUTION_FACTOR * h

    @classmethod
    def allowed_support_loss(cls, dim: int) -> int:
        """Cells that may leave the support between samples (one per axis direction)."""
        return 2 * dim * cls.SUPPORT_CHATTER_CELLS


class RunTimer:
    """Measure and log wall time of named operations."""

    def __init__(self):
        self.operations = {}
        self.enabled = NumericsConfig.ENABLE_TIMING_LOGS

    def start_operation(self, operation_name: str):
        """Mark operation start."""
        if self.enabled:
            self.operations[operation_name] = {
                'start': time.perf_counter(),
                'elapsed': math.nan
            }

    def end_operation(self, operation_name: str) -> float:
        """Mark operation end, log and return the elapsed seconds."""
        if not self.enabled or operation_name not in self.operations:
            return math.nan
        elapsed = time.perf_counter() - self.operations[operation_name]['start']
        self.operations[operation_name]['elapsed'] = elapsed
        logger.info(f"[TIMING] {operation_name}: {elapsed:.2f}s")
        return elapsed


# Global run timer
run_timer = RunTimer()
