# numerics\solver.py
"""
Explicit finite-volume stepper for the coupled system

    (u^i)_t = div(m (|u|^{m-1} + eps) grad u^i),   i = 1..k

on a uniform grid with zero-flux boundaries (or time-dependent Dirichlet values
in 1D). Every species is updated with the same face diffusivities, so the update
is one linear operator per step applied to each species.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import Grid, ScalarField, SpeciesState, l1_difference, masses, norm_array
from .errors import (ConfigurationError, NumericalBlowupError, ParameterError,
                     PreconditionError, StagnationError)
from .numerics_config import NumericsConfig
from .report import DiagnosticsReport

logger = logging.getLogger(__name__)

CONTINUATION_EPSILONS = (1e-2, 1e-3, 0.0)


@dataclass(frozen=True)
class DirichletBoundary:
    """
    Time-dependent boundary values for a 1D grid.

    Attributes:
        left: Callable t -> k values imposed at the lower domain edge.
        right: Callable t -> k values imposed at the upper domain edge.
    """
    left: Callable[[float], Sequence[float]]
    right: Callable[[float], Sequence[float]]

    def values(self, t: float, k: int) -> Tuple[np.ndarray, np.ndarray]:
        gl = np.asarray(self.left(t), dtype=np.float64).reshape(k)
        gr = np.asarray(self.right(t), dtype=np.float64).reshape(k)
        return gl, gr


@dataclass(frozen=True)
class SolverConfig:
    """
    Settings of the physical-space scheme.

    Attributes:
        m (float): Diffusion exponent, m > 1.
        epsilon (float): Regularization added to |u|^{m-1}; 0 keeps the degenerate equation.
        cap_M (float, optional): Initial data is truncated at this level before a run.
        cfl_safety (float): Fraction of the explicit stability limit, in (0, 1].
        clamp_negative (bool): Clamp rounding negatives to zero; when off they raise.
        max_dt (float): Largest step, used when the diffusivity vanishes.
        boundary (DirichletBoundary, optional): Dirichlet values; zero flux when None.
    """
    m: float
    epsilon: float = 0.0
    cap_M: Optional[float] = None
    cfl_safety: float = NumericsConfig.CFL_SAFETY
    clamp_negative: bool = True
    max_dt: float = NumericsConfig.MAX_DT
    boundary: Optional[DirichletBoundary] = None

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 1.0):
            raise ParameterError(f"m must be > 1, got {self.m}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ParameterError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.cap_M is not None and not self.cap_M > 0.0:
            raise ParameterError(f"cap_M must be positive, got {self.cap_M}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ParameterError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.max_dt > 0.0:
            raise ParameterError(f"max_dt must be positive, got {self.max_dt}")

    @classmethod
    def continuation_ladder(cls, m: float, epsilons: Sequence[float] = CONTINUATION_EPSILONS,
                            **kwargs) -> List['SolverConfig']:
        """Configs with decreasing regularization, ending at the degenerate equation."""
        return [cls(m=m, epsilon=eps, **kwargs) for eps in epsilons]


@dataclass(frozen=True)
class SamplingPlan:
    """
    When a run hands its state to the observers.

    Attributes:
        stride (int, optional): Sample every stride steps.
        times (tuple): Exact sample times; the stepper lands on each of them.
    """
    stride: Optional[int] = None
    times: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.stride is not None and int(self.stride) < 1:
            raise ConfigurationError(f"sample stride must be >= 1, got {self.stride}")
        object.__setattr__(self, 'times', tuple(sorted(float(t) for t in self.times)))

    def targets(self, t0: float, t_end: float) -> List[float]:
        return [t for t in self.times if t0 < t < t_end] + [t_end]


@dataclass
class SampleContext:
    """What an observer sees at a sampled time."""
    state: SpeciesState
    cfg: SolverConfig
    report: DiagnosticsReport
    step_index: int = 0
    previous_sample: Optional[SpeciesState] = None
    before_step: Optional[SpeciesState] = None


class RunObserver:
    """Diagnostics hook called by ``run``; subclasses override what they need."""

    name = 'observer'

    def start(self, context: SampleContext):
        pass

    def sample(self, context: SampleContext):
        pass

    def finish(self, context: SampleContext):
        pass


def _diffusivity_array(fields: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    return cfg.m * (norm_array(fields) ** (cfg.m - 1.0) + cfg.epsilon)


def diffusivity(state: SpeciesState, cfg: SolverConfig) -> ScalarField:
    """D = m (|u|^{m-1} + epsilon) cell by cell."""
    return ScalarField(state.grid, _diffusivity_array(state.fields, cfg))


def _axis_slices(axis: int, ndim: int):
    lo = [slice(None)] * ndim
    hi = [slice(None)] * ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return tuple(lo), tuple(hi)


def face_average(D: np.ndarray, axis: int) -> np.ndarray:
    """Arithmetic mean of the two cells adjacent to each interior face."""
    lo, hi = _axis_slices(axis, D.ndim)
    return 0.5 * (D[lo] + D[hi])


def _stencil_weight(grid: Grid, cfg: SolverConfig) -> float:
    # a Dirichlet face sits h/2 from the boundary cell center
    return 3.0 if cfg.boundary is not None else 2.0 * grid.dim


def _boundary_diffusivities(fields: np.ndarray, D: np.ndarray, cfg: SolverConfig, t: float):
    if D.ndim != 1:
        raise ConfigurationError("Dirichlet boundaries are only available on 1D grids")
    gl, gr = cfg.boundary.values(t, fields.shape[0])
    d_left = cfg.m * (np.linalg.norm(gl) ** (cfg.m - 1.0) + cfg.epsilon)
    d_right = cfg.m * (np.linalg.norm(gr) ** (cfg.m - 1.0) + cfg.epsilon)
    return gl, gr, 0.5 * (d_left + D[0]), 0.5 * (d_right + D[-1])


def _max_dt(grid: Grid, cfg: SolverConfig, D: np.ndarray, d_extra: float = 0.0) -> float:
    d_max = max(float(np.max(D)), d_extra)
    if d_max <= 0.0:
        return cfg.max_dt
    dt = cfg.cfl_safety * grid.h_min ** 2 / (_stencil_weight(grid, cfg) * d_max)
    return min(dt, cfg.max_dt)


def _stable_dt_arrays(fields: np.ndarray, D: np.ndarray, grid: Grid, cfg: SolverConfig, t: float) -> float:
    d_extra = 0.0
    if cfg.boundary is not None:
        _, _, d_left, d_right = _boundary_diffusivities(fields, D, cfg, t)
        d_extra = max(d_left, d_right)
    return _max_dt(grid, cfg, D, d_extra)


def stable_dt(state: SpeciesState, cfg: SolverConfig) -> float:
    """
    Explicit step limit cfl_safety * h_min^2 / (2 dim D_max).

    Returns cfg.max_dt when the diffusivity vanishes everywhere.
    """
    fields = state.fields
    return _stable_dt_arrays(fields, _diffusivity_array(fields, cfg), state.grid, cfg, state.time)


def diffusion_divergence(fields: np.ndarray, D: np.ndarray, grid: Grid,
                         boundary_flux: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> np.ndarray:
    """
    Discrete div(D grad u^i) for every species with shared face diffusivities.

    Args:
        fields: Species array of shape (k, *cells).
        D: Cell diffusivity of shape cells.
        grid: The grid.
        boundary_flux: Optional (left, right) fluxes for a 1D Dirichlet boundary;
            zero flux otherwise.
    """
    div = np.zeros_like(fields)
    pad = [(0, 0)] * fields.ndim
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        d_face = face_average(D, axis)[np.newaxis, ...]
        flux = d_face * np.diff(fields, axis=axis + 1) / h
        pad[axis + 1] = (1, 1)
        padded = np.pad(flux, pad)
        pad[axis + 1] = (0, 0)
        if boundary_flux is not None:
            padded[:, 0] = boundary_flux[0]
            padded[:, -1] = boundary_flux[1]
        div += np.diff(padded, axis=axis + 1) / h
    return div


def _advance(fields: np.ndarray, D: np.ndarray, grid: Grid, cfg: SolverConfig,
             dt: float, t: float, step_index: int) -> np.ndarray:
    boundary_flux = None
    if cfg.boundary is not None:
        gl, gr, d_left, d_right = _boundary_diffusivities(fields, D, cfg, t)
        half = 0.5 * grid.spacing[0]
        boundary_flux = (d_left * (fields[:, 0] - gl) / half, d_right * (gr - fields[:, -1]) / half)

    new = fields + dt * diffusion_divergence(fields, D, grid, boundary_flux)
    if not np.all(np.isfinite(new)):
        raise NumericalBlowupError(step_index, t)

    negative = new < 0.0
    if negative.any():
        if not cfg.clamp_negative:
            raise NumericalBlowupError(step_index, t, f"negative value {new[negative].min():.3e}")
        logger.debug(f"Clamped {int(negative.sum())} negative cells at step {step_index} "
                     f"(min {new[negative].min():.3e})")
        new[negative] = 0.0
    return new


def step(state: SpeciesState, cfg: SolverConfig, dt: float, step_index: int = 0) -> SpeciesState:
    """
    One forward-Euler finite-volume step.

    Args:
        state (SpeciesState): Current state.
        cfg (SolverConfig): Scheme settings.
        dt (float): Step size; larger than stable_dt is allowed but may not be monotone.
        step_index (int): Index reported if the step blows up.

    Raises:
        NumericalBlowupError: If a non-finite value is produced.
    """
    if not dt > 0.0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    fields = state.fields
    D = _diffusivity_array(fields, cfg)
    new = _advance(fields, D, state.grid, cfg, dt, state.time, step_index)
    return SpeciesState(state.grid, new, state.time + dt)


def apply_cap(state: SpeciesState, cap_M: float) -> SpeciesState:
    """Truncate every species at cap_M."""
    if not cap_M > 0.0:
        raise ParameterError(f"cap_M must be positive, got {cap_M}")
    return state.with_fields(np.minimum(state.fields, cap_M))


def _relative_drift(before: Sequence[float], after: Sequence[float]) -> float:
    drift = 0.0
    for m0, m1 in zip(before, after):
        scale = abs(m0) if m0 != 0.0 else 1.0
        drift = max(drift, abs(m1 - m0) / scale)
    return drift


def run(initial: SpeciesState, cfg: SolverConfig, t_end: float,
        observers: Sequence[RunObserver] = (), plan: Optional[SamplingPlan] = None,
        dt: Optional[float] = None) -> Tuple[SpeciesState, DiagnosticsReport]:
    """
    Advance initial to t_end with adaptive steps min(stable_dt, time to next sample).

    Observers are called at the initial state, every plan.stride steps, at each
    plan time and at t_end. The returned state carries time t_end exactly.

    Args:
        initial (SpeciesState): Initial data.
        cfg (SolverConfig): Scheme settings.
        t_end (float): Final time.
        observers (list): RunObserver hooks.
        plan (SamplingPlan, optional): Sampling stride and exact sample times.
        dt (float, optional): Fixed step; steps beyond the stability limit are flagged.

    Returns:
        tuple: (final SpeciesState, DiagnosticsReport).

    Raises:
        PreconditionError: If t_end precedes the initial time.
        NumericalBlowupError: If a step produces non-finite values.
        StagnationError: If the admissible step underflows.
    """
    t0 = initial.time
    if t_end < t0:
        raise PreconditionError(f"t_end={t_end} precedes the initial time {t0}")
    report = DiagnosticsReport()
    if t_end == t0:
        return initial, report

    plan = plan or SamplingPlan()
    state = apply_cap(initial, cfg.cap_M) if cfg.cap_M is not None else initial
    grid = state.grid
    targets = plan.targets(t0, t_end)
    initial_masses = masses(state)
    logger.info(f"Run start: k={state.k}, cells={grid.cells}, m={cfg.m}, eps={cfg.epsilon}, "
                f"t={t0:.6g} -> {t_end:.6g}")

    context = SampleContext(state, cfg, report)
    report.open_record(state.time, 0)
    for observer in observers:
        observer.start(context)
    for observer in observers:
        observer.sample(context)

    step_index = 0
    target_index = 0
    cfl_flagged = False
    previous_sample = state
    while target_index < len(targets):
        target = targets[target_index]
        fields = state.fields
        D = _diffusivity_array(fields, cfg)
        limit = _stable_dt_arrays(fields, D, grid, cfg, state.time)
        if dt is not None:
            h = float(dt)
            if h > limit * (1.0 + NumericsConfig.CFL_VIOLATION_SLACK) and not cfl_flagged:
                report.flag('cfl_violation', state.time, f"dt={h:.3e} exceeds stable dt={limit:.3e}")
                cfl_flagged = True
        else:
            h = limit
        if h < NumericsConfig.DT_FLOOR:
            raise StagnationError(state.time, h)

        remaining = target - state.time
        hit = h >= remaining
        if hit:
            h = remaining
        new_time = target if hit else state.time + h
        if new_time <= state.time:
            raise StagnationError(state.time, h)

        before = state
        state = SpeciesState(grid, _advance(fields, D, grid, cfg, h, state.time, step_index), new_time)
        step_index += 1
        if hit:
            target_index += 1

        if hit or (plan.stride is not None and step_index % plan.stride == 0):
            report.open_record(state.time, step_index)
            context = SampleContext(state, cfg, report, step_index, previous_sample, before)
            for observer in observers:
                observer.sample(context)
            previous_sample = state

    for observer in observers:
        observer.finish(context)

    final_masses = masses(state)
    drift = _relative_drift(initial_masses, final_masses)
    report.summary.update({
        'steps': step_index,
        'initial_masses': list(initial_masses),
        'final_masses': list(final_masses),
        'mass_drift': drift,
    })
    if drift > NumericsConfig.MASS_DRIFT_TOL and cfg.boundary is None:
        report.flag('mass_drift', state.time, f"relative drift {drift:.3e}")
    logger.info(f"Run end: {step_index} steps, t={state.time:.6g}, mass drift {drift:.3e}")
    return state, report


@dataclass
class ContinuationResult:
    """States of the same data evolved with decreasing regularization."""
    epsilons: List[float]
    states: List[SpeciesState] = field(default_factory=list)
    reports: List[DiagnosticsReport] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)


def continuation_run(initial: SpeciesState, ladder: Sequence[SolverConfig], t_end: float,
                     plan: Optional[SamplingPlan] = None,
                     observers_factory: Optional[Callable[[], Sequence[RunObserver]]] = None) -> ContinuationResult:
    """
    Evolve the same initial data through a regularization ladder.

    distances[j] is the summed L1 distance between the final states of rungs j and j+1.
    """
    if len(ladder) < 2:
        raise PreconditionError("a continuation ladder needs at least two configs")
    result = ContinuationResult([cfg.epsilon for cfg in ladder])
    for cfg in ladder:
        observers = observers_factory() if observers_factory else ()
        state, report = run(initial, cfg, t_end, observers, plan)
        result.states.append(state)
        result.reports.append(report)
    for a, b in zip(result.states, result.states[1:]):
        result.distances.append(math.fsum(l1_difference(a, b)))
    logger.info(f"Continuation distances over eps={result.epsilons}: {result.distances}")
    return result

