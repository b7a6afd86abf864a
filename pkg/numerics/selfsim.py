# numerics\selfsim.py
"""
Self-similar variables and the entropy functional.

With theta = t^{a1} u, eta = x t^{-a2} and tau = log t the system becomes the
drift-diffusion flow

    (theta^i)_tau = div(m Theta^{m-1} grad theta^i) + a2 div(eta theta^i),

Theta = |theta|, whose stationary state is the rescaled Barenblatt profile. The
entropy H = int(Theta^m/(m-1) + a2/2 |eta|^2 Theta) decays at rate I1 + I2.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .barenblatt import BarenblattProfile, coefficients, total_mass
from .core import Grid, SpeciesState, _freeze, default_threshold, norm_array
from .errors import DomainError, GridError, NumericalBlowupError, PreconditionError, StagnationError
from .numerics_config import NumericsConfig
from .solver import _axis_slices, diffusion_divergence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RescaledState:
    """
    Species in self-similar variables.

    Attributes:
        grid (Grid): Grid in eta.
        theta (np.ndarray): Array of shape (k, *cells), nonnegative.
        tau (float): Logarithmic time.
    """
    grid: Grid
    theta: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.ndim == self.grid.dim:
            theta = theta[np.newaxis, ...]
        if theta.shape[1:] != self.grid.shape:
            raise GridError(f"theta shape {theta.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(theta)):
            raise GridError("theta contains non-finite values")
        np.maximum(theta, 0.0, out=theta)
        object.__setattr__(self, 'theta', _freeze(theta))
        object.__setattr__(self, 'tau', float(self.tau))

    @property
    def k(self) -> int:
        return self.theta.shape[0]

    def norm(self) -> np.ndarray:
        return norm_array(self.theta)

    def masses(self) -> Tuple[float, ...]:
        volume = self.grid.cell_volume
        return tuple(math.fsum(self.theta[i].ravel()) * volume for i in range(self.k))


@dataclass(frozen=True)
class EntropyRecord:
    tau: float
    H: float
    I1: float
    I2: float
    dH_dtau_numeric: float = math.nan

    def dissipation(self) -> float:
        return self.I1 + self.I2

    def to_row(self) -> dict:
        return {'tau': self.tau, 'H': self.H, 'I1': self.I1, 'I2': self.I2,
                'dH_dtau_numeric': self.dH_dtau_numeric}


def to_selfsimilar(state: SpeciesState, m: float) -> RescaledState:
    """
    Relabel a physical state in self-similar variables.

    Raises:
        DomainError: If state.time <= 0.
    """
    t = state.time
    if not t > 0.0:
        raise DomainError(f"self-similar variables need t > 0, got t={t}")
    a1, a2, _ = coefficients(m, state.grid.dim)
    grid = state.grid.scaled(t ** (-a2))
    return RescaledState(grid, t ** a1 * state.fields, math.log(t))


def to_physical(rs: RescaledState, m: float) -> SpeciesState:
    """Inverse of to_selfsimilar."""
    a1, a2, _ = coefficients(m, rs.grid.dim)
    t = math.exp(rs.tau)
    return SpeciesState(rs.grid.scaled(t ** a2), t ** (-a1) * rs.theta, t)


def equilibrium_state(grid: Grid, masses: Sequence[float], m: float, tau: float = 0.0) -> RescaledState:
    """(M_i / |M|) times the rescaled Barenblatt profile of mass |M|, sampled on grid."""
    profile = BarenblattProfile.calibrated(total_mass(masses), m, grid.dim)
    base = profile.sample_rescaled(grid)
    return RescaledState(grid, np.stack([(Mi / profile.M) * base for Mi in masses]), tau)


def equilibrium_distance(rs: RescaledState, masses: Sequence[float], m: float) -> Tuple[float, ...]:
    """Per-species L1 distance of theta^i to its equilibrium."""
    target = equilibrium_state(rs.grid, masses, m, rs.tau)
    volume = rs.grid.cell_volume
    return tuple(math.fsum(np.abs(rs.theta[i] - target.theta[i]).ravel()) * volume
                 for i in range(rs.k))


def _max_face_eta(grid: Grid) -> float:
    return max(float(np.max(np.abs(grid.axis_faces(a)))) for a in range(grid.dim))


def stable_dtau(rs: RescaledState, m: float, safety: float = NumericsConfig.DRIFT_SAFETY) -> float:
    """
    safety / (2 n D_max / h^2 + n a2 max|eta_face| / h).

    Below this bound the update is a combination of old values with nonnegative
    weights, so theta stays nonnegative without clamping.
    """
    _, a2, _ = coefficients(m, rs.grid.dim)
    n = rs.grid.dim
    h = rs.grid.h_min
    d_max = m * float(np.max(rs.norm())) ** (m - 1.0)
    rate = 2.0 * n * d_max / h ** 2 + n * a2 * _max_face_eta(rs.grid) / h
    return safety / rate


def drift_divergence(theta: np.ndarray, grid: Grid, a2: float) -> np.ndarray:
    """Upwind discrete a2 div(eta theta^i) with zero flux at the boundary."""
    div = np.zeros_like(theta)
    pad = [(0, 0)] * theta.ndim
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        shape = [1] * theta.ndim
        shape[axis + 1] = grid.cells[axis] - 1
        eta_face = grid.axis_faces(axis).reshape(shape)
        lo, hi = _axis_slices(axis + 1, theta.ndim)
        # transport velocity is -a2 eta, so eta > 0 takes the right cell
        upwind = np.where(eta_face > 0.0, theta[hi], theta[lo])
        pad[axis + 1] = (1, 1)
        flux = np.pad(a2 * eta_face * upwind, pad)
        pad[axis + 1] = (0, 0)
        div += np.diff(flux, axis=axis + 1) / h
    return div


def step_theta(rs: RescaledState, m: float, dtau: float, step_index: int = 0) -> RescaledState:
    """
    One forward-Euler step of the rescaled flow.

    Raises:
        NumericalBlowupError: If a non-finite value is produced.
    """
    if not dtau > 0.0:
        raise PreconditionError(f"dtau must be positive, got {dtau}")
    _, a2, _ = coefficients(m, rs.grid.dim)
    theta = rs.theta
    D = m * norm_array(theta) ** (m - 1.0)
    rate = diffusion_divergence(theta, D, rs.grid) + drift_divergence(theta, rs.grid, a2)
    new = theta + dtau * rate
    if not np.all(np.isfinite(new)):
        raise NumericalBlowupError(step_index, rs.tau, "self-similar step")
    return RescaledState(rs.grid, new, rs.tau + dtau)


def _march(initial: RescaledState, m: float, tau_end: float, stride: Optional[int],
           dtau: Optional[float]) -> Iterator[RescaledState]:
    state = initial
    yield state
    steps = 0
    warned = False
    while state.tau < tau_end:
        limit = stable_dtau(state, m)
        h = limit if dtau is None else float(dtau)
        if h > limit and not warned:
            logger.warning(f"dtau={h:.3e} exceeds the stable bound {limit:.3e}")
            warned = True
        if h < NumericsConfig.DT_FLOOR:
            raise StagnationError(state.tau, h)
        remaining = tau_end - state.tau
        hit = h >= remaining
        state = step_theta(state, m, remaining if hit else h, steps)
        steps += 1
        if hit:
            state = RescaledState(state.grid, state.theta, tau_end)
        if hit or (stride is not None and steps % stride == 0):
            yield state
    logger.debug(f"Self-similar march: {steps} steps to tau={tau_end:.6g}")


def evolve(initial: RescaledState, m: float, tau_end: float, dtau: Optional[float] = None) -> RescaledState:
    """Advance to tau_end with stable steps; the result carries tau_end exactly."""
    if tau_end < initial.tau:
        raise PreconditionError(f"tau_end={tau_end} precedes tau={initial.tau}")
    state = initial
    for state in _march(initial, m, tau_end, None, dtau):
        pass
    return state


def entropy(rs: RescaledState, m: float, threshold: Optional[float] = None) -> EntropyRecord:
    """
    Entropy H and the dissipation terms I1, I2 by midpoint quadrature.

    Gradients are face differences taken only across faces whose two cells both
    carry Theta above threshold; elsewhere the integrands are 0.
    """
    grid = rs.grid
    _, a2, _ = coefficients(m, grid.dim)
    theta = rs.theta
    Theta = norm_array(theta)
    eta2 = grid.radius_squared()
    volume = grid.cell_volume

    H = math.fsum((Theta ** m / (m - 1.0) + 0.5 * a2 * eta2 * Theta).ravel()) * volume

    if threshold is None:
        threshold = default_threshold(Theta)
    supported = Theta > threshold
    G = m / (m - 1.0) * Theta ** (m - 1.0) + 0.5 * a2 * eta2

    i1_terms: List[float] = []
    i2_terms: List[float] = []
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        lo, hi = _axis_slices(axis, grid.dim)
        both = supported[lo] & supported[hi]
        if not both.any():
            continue
        theta_face = 0.5 * (Theta[lo] + Theta[hi])
        g_face = 0.5 * (G[lo] + G[hi])
        grad_G = (G[hi] - G[lo]) / h
        grad_Theta = (Theta[hi] - Theta[lo]) / h
        grad_species = np.diff(theta, axis=axis + 1) / h
        gap = np.sum(grad_species * grad_species, axis=0) - grad_Theta * grad_Theta
        i1_terms.extend((theta_face * grad_G * grad_G)[both].tolist())
        i2_terms.extend((m * theta_face[both] ** (m - 2.0) * g_face[both] * gap[both]).tolist())

    I1 = math.fsum(i1_terms) * volume
    I2 = math.fsum(i2_terms) * volume
    return EntropyRecord(rs.tau, H, I1, I2)


def entropy_run(initial: RescaledState, m: float, tau_end: float, stride: int,
                dtau: Optional[float] = None) -> Tuple[List[EntropyRecord], RescaledState]:
    """
    Entropy records every stride steps from initial.tau to tau_end, and the
    final state.

    dH_dtau_numeric of record j is the slope of H between records j-1 and j;
    the first record carries NaN.
    """
    if not tau_end > initial.tau:
        raise PreconditionError(f"tau_end={tau_end} must exceed tau={initial.tau}")
    if int(stride) < 1:
        raise PreconditionError(f"stride must be >= 1, got {stride}")
    records: List[EntropyRecord] = []
    state = initial
    for state in _march(initial, m, tau_end, int(stride), dtau):
        record = entropy(state, m)
        if records:
            prev = records[-1]
            slope = (record.H - prev.H) / (record.tau - prev.tau)
            record = EntropyRecord(record.tau, record.H, record.I1, record.I2, slope)
        records.append(record)
    return records, state


def entropy_trace(initial: RescaledState, m: float, tau_end: float, stride: int,
                  dtau: Optional[float] = None) -> List[EntropyRecord]:
    return entropy_run(initial, m, tau_end, stride, dtau)[0]


def dissipation_mismatch(trace: Sequence[EntropyRecord], warmup: float = 0.0) -> float:
    """
    max |dH/dtau + (I1 + I2)| with the dissipation averaged over each record interval.

    Intervals ending within warmup of the first record are skipped. The slope
    between records is only a first-order difference, so the trace should be
    taken with stride 1 for the maximum to measure the scheme rather than the
    record spacing.
    """
    if not trace:
        return 0.0
    start = trace[0].tau + warmup
    worst = 0.0
    for prev, record in zip(trace, trace[1:]):
        if record.tau <= start:
            continue
        mean_dissipation = 0.5 * (prev.dissipation() + record.dissipation())
        worst = max(worst, abs(record.dH_dtau_numeric + mean_dissipation))
    return worst


def entropy_increase(trace: Sequence[EntropyRecord]) -> float:
    """Largest per-record increase of H relative to |H|."""
    worst = 0.0
    for prev, record in zip(trace, trace[1:]):
        scale = max(abs(prev.H), 1e-300)
        worst = max(worst, (record.H - prev.H) / scale)
    return worst


def equilibrium_entropy_drift(grid: Grid, masses: Sequence[float], m: float, tau_span: float,
                              stride: int = 10) -> float:
    """
    Largest |H(tau) - H(0)| / |H(0)| while the sampled equilibrium evolves for tau_span.

    The continuous equilibrium is stationary; on a grid the drift is a
    discretization error and shrinks like h^2.
    """
    trace = entropy_trace(equilibrium_state(grid, masses, m), m, tau_span, stride)
    h0 = trace[0].H
    scale = max(abs(h0), 1e-300)
    return max(abs(record.H - h0) for record in trace) / scale
