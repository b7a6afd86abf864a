# numerics\travelling.py
"""
One-directional travelling waves

    u^i(x, t) = c_i (c_hat t - x.e)_+^{1/(m-1)}     (Orientation.LEFT)
    u^i(x, t) = c_i (c_hat t + x.e)_+^{1/(m-1)}     (Orientation.RIGHT)

of (u^i)_t = div(kappa |u|^{m-1} grad u^i) with speed
c_hat = kappa/(m-1) * (sum c_i^2)^{(m-1)/2}. kappa = 1 gives the classical speed
law; kappa = m is the equation the solver integrates.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import Grid, SpeciesState, _check_index, l1_difference
from .errors import ConfigurationError, MixedOrientationError, ParameterError
from .report import ErrorRow, ErrorTable
from .solver import DirichletBoundary, SolverConfig, run

logger = logging.getLogger(__name__)

DIRECTION_TOL = 1e-14

# residual samples closer than this many h_s to the front are skipped
FRONT_BAND = 5


class Orientation(Enum):
    """Which closed form a wave uses: (c_hat t - x.e)_+ or (c_hat t + x.e)_+."""
    LEFT = 'left'
    RIGHT = 'right'

    @property
    def sign(self) -> float:
        return 1.0 if self is Orientation.LEFT else -1.0


def speed_from_coeffs(coeffs: Sequence[float], m: float, mobility: float = 1.0) -> float:
    """
    c_hat = mobility/(m-1) * (sum c_i^2)^{(m-1)/2}.

    Raises:
        ParameterError: If a coefficient is not positive or m <= 1.
    """
    coeffs = [float(c) for c in coeffs]
    if not coeffs or any(not (math.isfinite(c) and c > 0.0) for c in coeffs):
        raise ParameterError(f"travelling-wave coefficients must be positive, got {coeffs}")
    if not m > 1.0:
        raise ParameterError(f"m must be > 1, got {m}")
    if not mobility > 0.0:
        raise ParameterError(f"mobility must be positive, got {mobility}")
    return mobility / (m - 1.0) * math.fsum(c * c for c in coeffs) ** ((m - 1.0) / 2.0)


@dataclass(frozen=True)
class TravellingWave:
    """
    Closed-form wave shared by all species.

    Attributes:
        m (float): Diffusion exponent.
        coeffs (tuple): Amplitudes c_1..c_k.
        direction (tuple): Unit vector e.
        orientation (Orientation): Closed form in use.
        mobility (float): kappa in div(kappa |u|^{m-1} grad u).
        speed (float): c_hat, derived from the other fields.
    """
    m: float
    coeffs: Tuple[float, ...]
    direction: Tuple[float, ...] = (1.0,)
    orientation: Orientation = Orientation.LEFT
    mobility: float = 1.0
    speed: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, 'direction', tuple(float(v) for v in np.atleast_1d(self.direction)))
        if len(self.direction) not in (1, 2):
            raise ParameterError(f"direction must have 1 or 2 components, got {self.direction}")
        if abs(math.hypot(*self.direction) - 1.0) > DIRECTION_TOL:
            raise ParameterError(f"direction must be a unit vector, got {self.direction}")
        object.__setattr__(self, 'speed', speed_from_coeffs(self.coeffs, self.m, self.mobility))

    @classmethod
    def along(cls, m: float, coeffs: Sequence[float], direction: Sequence[float],
              orientation: Orientation = Orientation.LEFT, mobility: float = 1.0) -> 'TravellingWave':
        """Wave along direction, normalized to unit length."""
        e = np.atleast_1d(np.asarray(direction, dtype=float))
        length = float(np.linalg.norm(e))
        if not length > 0.0:
            raise ParameterError("direction must be nonzero")
        return cls(m, tuple(coeffs), tuple(e / length), orientation, mobility)

    @classmethod
    def for_solver(cls, m: float, coeffs: Sequence[float], direction: Sequence[float] = (1.0,),
                   orientation: Orientation = Orientation.LEFT) -> 'TravellingWave':
        """Wave of the solver's equation, mobility m."""
        return cls.along(m, coeffs, direction, orientation, mobility=m)

    @classmethod
    def from_species_orientations(cls, m: float, coeffs: Sequence[float],
                                  orientations: Sequence[Orientation],
                                  direction: Sequence[float] = (1.0,),
                                  mobility: float = 1.0) -> 'TravellingWave':
        """
        Build a wave from per-species orientations, which must all agree.

        Raises:
            MixedOrientationError: If two species ask for different orientations.
        """
        orientations = [Orientation(o) for o in orientations]
        if len(orientations) != len(coeffs):
            raise ParameterError(f"{len(coeffs)} coefficients but {len(orientations)} orientations")
        if len(set(orientations)) > 1:
            raise MixedOrientationError(
                f"all species of a travelling wave share one orientation, got {[o.value for o in orientations]}")
        return cls.along(m, coeffs, direction, orientations[0], mobility)

    @property
    def k(self) -> int:
        return len(self.coeffs)

    @property
    def dim(self) -> int:
        return len(self.direction)

    @property
    def exponent(self) -> float:
        return 1.0 / (self.m - 1.0)

    @property
    def amplitude(self) -> float:
        """|c| = sqrt(sum c_i^2)."""
        return math.sqrt(math.fsum(c * c for c in self.coeffs))

    def front(self, t: float) -> float:
        """Value of x.e at the front."""
        return self.orientation.sign * self.speed * t

    def _projection(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.dim == 1:
            if x.ndim >= 2 and x.shape[-1] == 1:
                x = x[..., 0]
            return x * self.direction[0]
        return x @ np.asarray(self.direction)

    def profile_argument(self, x, t: float) -> np.ndarray:
        return self.speed * t - self.orientation.sign * self._projection(x)

    def evaluate(self, i: int, x, t: float):
        """u^i(x, t) for one point or an array of points."""
        _check_index(i, self.k)
        value = self.coeffs[i] * np.maximum(self.profile_argument(x, t), 0.0) ** self.exponent
        return float(value) if np.ndim(value) == 0 else value

    def sample(self, grid: Grid, t: float) -> SpeciesState:
        """Point values at the cell centers."""
        if grid.dim != self.dim:
            raise ConfigurationError(f"wave dimension {self.dim} does not match grid dimension {grid.dim}")
        base = np.maximum(self.profile_argument(grid.points(), t), 0.0) ** self.exponent
        return SpeciesState(grid, np.stack([c * base for c in self.coeffs]), t)

    def profile(self, xi) -> np.ndarray:
        """Species profiles g^i(xi) with u^i = g^i(x.e -+ c_hat t); shape (k, len(xi))."""
        xi = np.asarray(xi, dtype=np.float64)
        base = np.maximum(-self.orientation.sign * xi, 0.0) ** self.exponent
        return np.stack([c * base for c in self.coeffs])


def evaluate(tw: TravellingWave, i: int, x, t: float):
    return tw.evaluate(i, x, t)


def ode_residual(tw: TravellingWave, s_samples: Sequence[float], h_s: float = 1e-3,
                 speed: Optional[float] = None) -> Tuple[float, float]:
    """
    max over samples and species of |kappa |g|^{m-1} g' + sign c_hat g|.

    g' is a centered difference at spacing h_s; samples within FRONT_BAND * h_s of
    the front are skipped.

    Args:
        tw (TravellingWave): The wave whose profile is tested.
        s_samples: Wave coordinates xi = x.e -+ c_hat t.
        h_s (float): Difference spacing.
        speed (float, optional): Speed to test against instead of tw.speed.

    Returns:
        tuple: (max residual, h_s).
    """
    if not h_s > 0.0:
        raise ParameterError(f"h_s must be positive, got {h_s}")
    c_hat = tw.speed if speed is None else float(speed)
    xi = np.asarray(s_samples, dtype=np.float64)
    xi = xi[np.abs(xi) > FRONT_BAND * h_s]
    if xi.size == 0:
        return 0.0, h_s
    g = tw.profile(xi)
    dg = (tw.profile(xi + h_s) - tw.profile(xi - h_s)) / (2.0 * h_s)
    norm = np.sqrt(np.sum(g * g, axis=0))
    residual = tw.mobility * norm ** (tw.m - 1.0) * dg + tw.orientation.sign * c_hat * g
    return float(np.max(np.abs(residual))), h_s


def epsilon_scale(state: SpeciesState, epsilon: float, m: float) -> SpeciesState:
    """
    u_eps(x, t) = eps^{1/(m-1)} u(x/eps, t/eps).

    Raises:
        ParameterError: If epsilon <= 0.
    """
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if not m > 1.0:
        raise ParameterError(f"m must be > 1, got {m}")
    return SpeciesState(state.grid.scaled(epsilon), epsilon ** (1.0 / (m - 1.0)) * state.fields,
                        state.time * epsilon)


def wave_boundary(tw: TravellingWave, grid: Grid) -> DirichletBoundary:
    """Exact wave values at both edges of a 1D grid."""
    lower, upper = grid.origin[0], grid.upper[0]
    return DirichletBoundary(
        left=lambda t: [tw.evaluate(i, lower, t) for i in range(tw.k)],
        right=lambda t: [tw.evaluate(i, upper, t) for i in range(tw.k)],
    )


def dirichlet_tw_run(tw: TravellingWave, grid: Grid, t0: float, t_end: float,
                     levels: int = 3) -> ErrorTable:
    """
    Solver runs with the exact wave imposed at the boundary, on grid and its
    refinements by 2, 4, ...; errors against the wave at t_end.

    Raises:
        ConfigurationError: If the grid is not 1D, the wave mobility is not m,
            or the front leaves the domain during [t0, t_end].
    """
    if grid.dim != 1 or tw.dim != 1:
        raise ConfigurationError("the Dirichlet wave harness runs on 1D grids")
    if not math.isclose(tw.mobility, tw.m):
        raise ConfigurationError(f"wave mobility {tw.mobility} differs from the solver's m={tw.m}")
    if not t_end > t0:
        raise ConfigurationError(f"t_end={t_end} must exceed t0={t0}")
    if int(levels) < 1:
        raise ConfigurationError(f"levels must be >= 1, got {levels}")
    lower, upper = grid.origin[0], grid.upper[0]
    for t in (t0, t_end):
        position = tw.front(t) * tw.direction[0]
        if not lower < position < upper:
            raise ConfigurationError(f"wave front x={position:.6g} at t={t:.6g} lies outside [{lower}, {upper}]")

    table = ErrorTable()
    for level in range(int(levels)):
        fine = grid.refined(2 ** level)
        cfg = SolverConfig(m=tw.m, boundary=wave_boundary(tw, fine))
        final, _ = run(tw.sample(fine, t0), cfg, t_end)
        exact = tw.sample(fine, t_end)
        species_l1 = l1_difference(final, exact)
        linf = float(np.max(np.abs(final.fields - exact.fields)))
        row = table.add(ErrorRow(fine.spacing[0], math.fsum(species_l1), linf, species_l1))
        logger.info(f"Wave run h={row.h:.4g}: L1={row.L1:.3e}, Linf={row.Linf:.3e}, "
                    f"order={row.order_estimate:.3f}")
    return table
