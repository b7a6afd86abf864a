# numerics\diagnostics.py
"""
Numerical checks for the qualitative properties of the system: isolation and
synchronization of supports, proportionality, convergence to the Barenblatt
profile, the Harnack-type quotient, and the step-level inequalities of the
scheme (Cauchy-Schwarz at faces, subsolution of the scalar equation, support
retention, L-infinity decay).
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .barenblatt import BarenblattProfile, coefficients, total_mass
from .core import (SpeciesState, _check_index, default_threshold, mass, norm_array,
                   norm_field, support, support_distance, ScalarField)
from .errors import DomainError, ParameterError, PreconditionError
from .numerics_config import NumericsConfig
from .solver import (RunObserver, SampleContext, SamplingPlan, SolverConfig,
                     diffusion_divergence, run)

logger = logging.getLogger(__name__)


def _species_supports(state: SpeciesState, threshold: Optional[float]):
    if threshold is None:
        threshold = default_threshold(norm_array(state.fields))
    return [support(state.species(i), threshold) for i in range(state.k)]


def waiting_time(trace: Sequence[SpeciesState], threshold: Optional[float] = None) -> Optional[float]:
    """
    First sampled time at which two species supports intersect.

    Args:
        trace: Sampled states in increasing time order.
        threshold (float, optional): Support threshold; default per state.

    Returns:
        float or None: None if the supports stay pairwise disjoint over the trace.

    Raises:
        PreconditionError: Fewer than two samples, or the initial supports intersect.
    """
    if len(trace) < 2:
        raise PreconditionError("waiting_time needs a trace with at least two samples")
    k = trace[0].k
    if k < 2:
        return None
    pairs = list(itertools.combinations(range(k), 2))
    initial = _species_supports(trace[0], threshold)
    for i, j in pairs:
        if not (initial[i] & initial[j]).is_empty():
            raise PreconditionError(f"initial supports of species {i} and {j} already intersect")
    for state in trace[1:]:
        supports = _species_supports(state, threshold)
        for i, j in pairs:
            if not (supports[i] & supports[j]).is_empty():
                logger.info(f"Supports of species {i} and {j} meet at t={state.time:.6g}")
                return state.time
    return None


def support_sync_defect(state: SpeciesState, i: int, j: int, threshold: Optional[float] = None) -> float:
    """
    |A xor B| / |A or B| for the supports A, B of species i and j.

    Raises:
        PreconditionError: If either support is empty or an index is out of range.
    """
    _check_index(i, state.k)
    _check_index(j, state.k)
    supports = _species_supports(state, threshold)
    a, b = supports[i], supports[j]
    if a.is_empty() or b.is_empty():
        raise PreconditionError(f"support of species {i if a.is_empty() else j} is empty")
    return (a ^ b).count / (a | b).count


def _check_masses(masses: Sequence[float], k: int) -> List[float]:
    masses = [float(v) for v in masses]
    if len(masses) != k:
        raise PreconditionError(f"expected {k} masses, got {len(masses)}")
    if any(not v > 0.0 for v in masses):
        raise ParameterError(f"masses must be positive, got {masses}")
    return masses


def ratio_defect(state: SpeciesState, masses: Sequence[float], threshold: Optional[float] = None) -> float:
    """
    max |M_j u^i - M_i u^j| / (M_i M_j max|u|) over supported cells and pairs.

    Raises:
        PreconditionError: If no cell exceeds the threshold.
    """
    masses = _check_masses(masses, state.k)
    norm = norm_array(state.fields)
    if threshold is None:
        threshold = default_threshold(norm)
    cells = norm > threshold
    if not cells.any():
        raise PreconditionError("ratio_defect: every cell is below the support threshold")
    scale = float(np.max(norm))
    worst = 0.0
    for i, j in itertools.combinations(range(state.k), 2):
        gap = np.abs(masses[j] * state.fields[i][cells] - masses[i] * state.fields[j][cells])
        worst = max(worst, float(np.max(gap)) / (masses[i] * masses[j] * scale))
    return worst


def barenblatt_distance(state: SpeciesState, masses: Sequence[float], m: float,
                        profile: Optional[BarenblattProfile] = None) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """
    Distance of each species to (M_i/|M|) B_{|M|}(., t).

    Returns:
        tuple: (L1 per species, t^{a1} times the max difference over the ball of
        80% of the Barenblatt support radius, per species).

    Raises:
        DomainError: If state.time <= 0.
    """
    t = state.time
    if not t > 0.0:
        raise DomainError(f"barenblatt_distance needs t > 0, got t={t}")
    masses = _check_masses(masses, state.k)
    if profile is None:
        profile = BarenblattProfile.calibrated(total_mass(masses), m, state.grid.dim)
    grid = state.grid
    base = profile.sample(grid, t)
    window = grid.radius_squared() < (NumericsConfig.COMPACT_WINDOW_FRACTION * profile.support_radius(t)) ** 2
    if not window.any():
        logger.warning(f"Compact window holds no cell at t={t:.6g}; sup distance is NaN")
    l1, linf = [], []
    for i, Mi in enumerate(masses):
        diff = np.abs(state.fields[i] - (Mi / profile.M) * base)
        l1.append(math.fsum(diff.ravel()) * grid.cell_volume)
        linf.append(t ** profile.a1 * float(np.max(diff[window])) if window.any() else math.nan)
    return tuple(l1), tuple(linf)


def lambda_rescale(state: SpeciesState, lam: float, m: float) -> SpeciesState:
    """
    u_lambda(x, t) = lambda^{a1} u(lambda^{a2} x, lambda t) as a state at time t / lambda.

    Raises:
        ParameterError: If lam <= 0.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise ParameterError(f"lambda must be > 0, got {lam}")
    a1, a2, _ = coefficients(m, state.grid.dim)
    return SpeciesState(state.grid.scaled(lam ** (-a2)), lam ** a1 * state.fields, state.time / lam)


def value_at_origin(field: ScalarField) -> float:
    """Multilinear interpolation of cell values at x = 0."""
    grid = field.grid
    axes = tuple(grid.axis_centers(a) for a in range(grid.dim))
    interpolator = RegularGridInterpolator(axes, field.values, method='linear',
                                           bounds_error=False, fill_value=None)
    return float(interpolator(np.zeros((1, grid.dim)))[0])


def harnack_quotient(initial: SpeciesState, final: SpeciesState, i: int, R: float,
                     masses: Sequence[float], m: float) -> float:
    """
    Quotient of the initial mass in the ball |x| < R over the Harnack bound.

        Q = int_{|x|<R} u^i(x, 0) dx
            / [ mu_i^{-p} (R^{n+2/(m-1)} / T^{1/(m-1)} + T^{n/2} u^i(0, T)^p) ]

    with p = ((m-1) n + 2)/2, mu_i = M_i / max M and T = final.time - initial.time.

    Raises:
        PreconditionError: If R <= sqrt(T) or i is out of range.
    """
    _check_index(i, initial.k)
    T = final.time - initial.time
    if not T > 0.0:
        raise PreconditionError(f"Harnack quotient needs T > 0, got T={T}")
    if not R > math.sqrt(T):
        raise PreconditionError(f"Harnack quotient needs R > sqrt(T): R={R}, T={T}")
    masses = [float(v) for v in masses]
    if len(masses) != initial.k or any(v < 0.0 for v in masses) or max(masses) <= 0.0:
        raise ParameterError(f"invalid masses {masses}")

    grid = initial.grid
    n = grid.dim
    inside = grid.radius_squared() < R * R
    numerator = math.fsum(initial.fields[i][inside].ravel()) * grid.cell_volume
    if numerator <= 0.0:
        return 0.0

    p = ((m - 1.0) * n + 2.0) / 2.0
    mu = masses[i] / max(masses)
    center = max(value_at_origin(final.species(i)), 0.0)
    bound = mu ** (-p) * (R ** (n + 2.0 / (m - 1.0)) / T ** (1.0 / (m - 1.0)) + T ** (n / 2.0) * center ** p)
    return numerator / bound


@dataclass(frozen=True)
class HarnackSample:
    T: float
    R: float
    species: int
    Q: float


def harnack_sweep(initial: SpeciesState, cfg: SolverConfig, masses: Sequence[float],
                  T_values: Sequence[float] = NumericsConfig.HARNACK_TIMES,
                  R_factors: Sequence[float] = NumericsConfig.HARNACK_RADIUS_FACTORS) -> List[HarnackSample]:
    """Q for every species over R = factor * sqrt(T) and the given times, from one run."""
    if any(f <= 1.0 for f in R_factors):
        raise PreconditionError(f"radius factors must exceed 1, got {list(R_factors)}")
    T_values = sorted(float(T) for T in T_values)
    recorder = TraceRecorder()
    t_end = initial.time + T_values[-1]
    run(initial, cfg, t_end, [recorder], SamplingPlan(times=[initial.time + T for T in T_values]))

    samples = []
    for T in T_values:
        final = recorder.at(initial.time + T)
        for factor in R_factors:
            R = factor * math.sqrt(T)
            for i in range(initial.k):
                samples.append(HarnackSample(T, R, i, harnack_quotient(initial, final, i, R, masses, cfg.m)))
    return samples


def cauchy_schwarz_slack(state: SpeciesState) -> float:
    """
    min over faces of sum_i |grad u^i|^2 - |grad |u||^2 with face differences.

    Nonnegative up to rounding for any state.
    """
    fields = state.fields
    norm = norm_array(fields)
    worst = math.inf
    for axis in range(state.grid.dim):
        h = state.grid.spacing[axis]
        grad_species = np.diff(fields, axis=axis + 1) / h
        grad_norm = np.diff(norm, axis=axis) / h
        slack = np.sum(grad_species * grad_species, axis=0) - grad_norm * grad_norm
        worst = min(worst, float(np.min(slack)))
    return worst


def subsolution_residual(prev: SpeciesState, curr: SpeciesState, m: float,
                         threshold: Optional[float] = None) -> float:
    """
    max of (|u|(curr) - |u|(prev)) / dt - Lap_h(|u|^m)(prev) over cells with |u| > threshold.

    Returns -inf if no cell is supported.
    """
    dt = curr.time - prev.time
    if not dt > 0.0:
        raise PreconditionError(f"subsolution residual needs curr after prev, got dt={dt}")
    w0 = norm_array(prev.fields)
    w1 = norm_array(curr.fields)
    if threshold is None:
        threshold = default_threshold(w0)
    cells = w0 > threshold
    if not cells.any():
        return -math.inf
    laplacian = diffusion_divergence((w0 ** m)[np.newaxis, ...], np.ones_like(w0), prev.grid)[0]
    residual = (w1 - w0) / dt - laplacian
    return float(np.max(residual[cells]))


def linf_decay_slope(times: Sequence[float], maxima: Sequence[float],
                     t_min: float = 1.0, t_max: float = 100.0) -> float:
    """
    Least-squares slope of log max|u| against log t over [t_min, t_max].

    Raises:
        PreconditionError: If fewer than two usable samples fall in the window.
    """
    times = np.asarray(times, dtype=float)
    maxima = np.asarray(maxima, dtype=float)
    keep = (times >= t_min * (1 - 1e-12)) & (times <= t_max * (1 + 1e-12)) & (maxima > 0.0)
    if np.count_nonzero(keep) < 2:
        raise PreconditionError(f"need two samples with t in [{t_min}, {t_max}] for the decay slope")
    slope, _ = np.polyfit(np.log(times[keep]), np.log(maxima[keep]), 1)
    return float(slope)


def support_retention(prev: SpeciesState, curr: SpeciesState, threshold: Optional[float] = None) -> int:
    """Cells in the support of |u| at prev that left it by curr (same threshold)."""
    w_prev = norm_field(prev)
    if threshold is None:
        threshold = default_threshold(w_prev)
    lost = support(w_prev, threshold) - support(norm_field(curr), threshold)
    return lost.count


# ---------------------------------------------------------------------------
# Run observers
# ---------------------------------------------------------------------------

class TraceRecorder(RunObserver):
    """Keeps every sampled state."""

    name = 'trace'

    def __init__(self):
        self.states: List[SpeciesState] = []

    def start(self, context: SampleContext):
        self.states = []

    def sample(self, context: SampleContext):
        self.states.append(context.state)

    def at(self, time: float) -> SpeciesState:
        for state in self.states:
            if math.isclose(state.time, time, rel_tol=1e-12, abs_tol=1e-15):
                return state
        raise PreconditionError(f"no sample recorded at t={time}")


class MassObserver(RunObserver):
    """Per-species mass and its relative drift from the first sample."""

    name = 'mass'

    def __init__(self):
        self.initial: Tuple[float, ...] = ()
        self.max_drift = 0.0

    def start(self, context: SampleContext):
        state = context.state
        self.initial = tuple(mass(state, i) for i in range(state.k))
        self.max_drift = 0.0

    def sample(self, context: SampleContext):
        state = context.state
        for i in range(state.k):
            value = mass(state, i)
            context.report.put(f'mass_{i + 1}', value)
            scale = abs(self.initial[i]) or 1.0
            self.max_drift = max(self.max_drift, abs(value - self.initial[i]) / scale)
        context.report.put('mass_drift', self.max_drift)

    def finish(self, context: SampleContext):
        context.report.summary['max_mass_drift'] = self.max_drift


class SupportObserver(RunObserver):
    """Support sizes, pairwise support distances and synchronization defects."""

    name = 'support'

    def __init__(self, threshold: Optional[float] = None):
        self.threshold = threshold

    def sample(self, context: SampleContext):
        state, report = context.state, context.report
        supports = _species_supports(state, self.threshold)
        for i, s in enumerate(supports):
            report.put(f'support_cells_{i + 1}', s.count)
        for i, j in itertools.combinations(range(state.k), 2):
            a, b = supports[i], supports[j]
            report.put(f'distance_{i + 1}_{j + 1}', support_distance(a, b, state.grid))
            if not (a.is_empty() or b.is_empty()):
                report.put(f'sync_{i + 1}_{j + 1}', (a ^ b).count / (a | b).count)


class InvariantObserver(RunObserver):
    """Face Cauchy-Schwarz slack, subsolution residual and support retention."""

    name = 'invariants'

    def __init__(self, threshold: Optional[float] = None, subsolution: bool = True):
        self.threshold = threshold
        self.subsolution = subsolution
        self.min_slack = math.inf
        self.max_residual = -math.inf
        self.max_lost = 0

    def start(self, context: SampleContext):
        self.min_slack = math.inf
        self.max_residual = -math.inf
        self.max_lost = 0

    def sample(self, context: SampleContext):
        state, report, cfg = context.state, context.report, context.cfg
        slack = cauchy_schwarz_slack(state)
        self.min_slack = min(self.min_slack, slack)
        report.put('cs_slack', slack)
        if slack < NumericsConfig.CAUCHY_SCHWARZ_SLACK:
            report.flag('cauchy_schwarz', state.time, f"slack {slack:.3e}")

        before = context.before_step
        if self.subsolution and before is not None and cfg.epsilon == 0.0 and cfg.boundary is None:
            residual = subsolution_residual(before, state, cfg.m, self.threshold)
            self.max_residual = max(self.max_residual, residual)
            report.put('subsolution_residual', residual)
            if residual > NumericsConfig.subsolution_tolerance(state.grid.h_min):
                report.flag('subsolution', state.time, f"residual {residual:.3e}")

        previous = context.previous_sample
        if previous is not None:
            lost = support_retention(previous, state, self.threshold)
            self.max_lost = max(self.max_lost, lost)
            report.put('support_lost', lost)
            if lost > NumericsConfig.allowed_support_loss(state.grid.dim):
                report.flag('support_retention', state.time, f"{lost} cells left the support")

    def finish(self, context: SampleContext):
        context.report.summary.update({
            'min_cs_slack': self.min_slack,
            'max_subsolution_residual': self.max_residual,
            'max_support_lost': self.max_lost,
        })


class RatioObserver(RunObserver):
    """Pointwise proportionality defect against the species masses."""

    name = 'ratio'

    def __init__(self, masses: Sequence[float], threshold: Optional[float] = None):
        self.masses = list(masses)
        self.threshold = threshold

    def sample(self, context: SampleContext):
        state = context.state
        if state.k < 2 or not np.any(state.fields):
            return
        context.report.put('ratio_defect', ratio_defect(state, self.masses, self.threshold))


class BarenblattObserver(RunObserver):
    """L1 and weighted sup distance to the scaled Barenblatt solution."""

    name = 'barenblatt'

    def __init__(self, masses: Sequence[float], m: float, dim: int):
        self.masses = list(masses)
        self.profile = BarenblattProfile.calibrated(total_mass(masses), m, dim)
        self.m = m

    def sample(self, context: SampleContext):
        state = context.state
        if not state.time > 0.0:
            return
        l1, linf = barenblatt_distance(state, self.masses, self.m, self.profile)
        for i in range(state.k):
            context.report.put(f'l1_{i + 1}', l1[i])
            context.report.put(f'linf_{i + 1}', linf[i])


class DecayObserver(RunObserver):
    """max|u| per sample and the log-log decay slope over [t_min, t_max]."""

    name = 'decay'

    def __init__(self, t_min: float = 1.0, t_max: float = 100.0):
        self.t_min = t_min
        self.t_max = t_max

    def sample(self, context: SampleContext):
        context.report.put('linf', float(np.max(norm_array(context.state.fields))))

    def finish(self, context: SampleContext):
        times, maxima = context.report.column('linf')
        try:
            slope = linf_decay_slope(times, maxima, self.t_min, self.t_max)
        except PreconditionError:
            logger.warning("Not enough samples in the decay window; slope not computed")
            return
        context.report.summary['linf_slope'] = slope
