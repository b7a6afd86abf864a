# numerics\barenblatt.py
"""
Closed-form Barenblatt oracle for the porous medium equation.

    B_M(x, t) = t^{-a1} (C_M - a3 |x|^2 / t^{2 a2})_+^{1/(m-1)}

with a1 = n/((m-1)n+2), a2 = a1/n and a3 = a1 (m-1)/(2 m n). The constant C_M
is calibrated numerically so that the profile carries mass M.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from .core import Grid, SpeciesState, _check_index
from .errors import DomainError, GridError, ParameterError, PreconditionError
from .numerics_config import NumericsConfig

logger = logging.getLogger(__name__)


def _check_model(m: float, n: int):
    if not (math.isfinite(m) and m > 1.0):
        raise ParameterError(f"m must be > 1 (slow diffusion), got {m}")
    if n not in (1, 2):
        raise ParameterError(f"dimension must be 1 or 2, got {n}")


def coefficients(m: float, n: int) -> Tuple[float, float, float]:
    """
    Barenblatt exponents and the profile constant.

    Args:
        m (float): Diffusion exponent, m > 1.
        n (int): Spatial dimension.

    Returns:
        tuple: (a1, a2, a3).

    Raises:
        ParameterError: If m <= 1 or n is not 1 or 2.
    """
    _check_model(m, n)
    a1 = n / ((m - 1.0) * n + 2.0)
    a2 = a1 / n
    a3 = a1 * (m - 1.0) / (2.0 * m * n)
    return a1, a2, a3


def unit_sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 points for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def profile_mass(C: float, m: float, n: int, points: int = NumericsConfig.QUADRATURE_POINTS) -> float:
    """
    Mass of (C - a3 |x|^2)_+^{1/(m-1)} over R^n.

    Radial composite midpoint rule on the support ball, which never evaluates the
    integrand at the free boundary.
    """
    if C <= 0.0:
        return 0.0
    _, _, a3 = coefficients(m, n)
    radius = math.sqrt(C / a3)
    dr = radius / points
    r = (np.arange(points) + 0.5) * dr
    integrand = np.maximum(C - a3 * r * r, 0.0) ** (1.0 / (m - 1.0)) * r ** (n - 1)
    return unit_sphere_measure(n) * math.fsum(integrand) * dr


def closed_form_mass(C: float, m: float, n: int) -> float:
    """Mass of (C - a3 |x|^2)_+^{p} through Gamma functions, p = 1/(m-1)."""
    _, _, a3 = coefficients(m, n)
    p = 1.0 / (m - 1.0)
    return (C ** (p + n / 2.0) * a3 ** (-n / 2.0) * math.pi ** (n / 2.0)
            * special.gamma(p + 1.0) / special.gamma(p + 1.0 + n / 2.0))


def mass_constant(M: float, m: float, n: int) -> float:
    """
    C_M such that the Barenblatt profile carries mass M.

    Bisection on C over [0, C_hi], with C_hi doubled until the quadrature mass
    exceeds M.

    Raises:
        ParameterError: If M <= 0, m <= 1 or n is not 1 or 2.
    """
    _check_model(m, n)
    if not (math.isfinite(M) and M > 0.0):
        raise ParameterError(f"mass M must be > 0, got {M}")

    def excess(C):
        return profile_mass(C, m, n) - M

    c_hi = 1.0
    for _ in range(NumericsConfig.BISECTION_MAX_DOUBLINGS):
        if excess(c_hi) > 0.0:
            break
        c_hi *= 2.0
    else:
        raise ParameterError(f"could not bracket C_M for M={M}, m={m}, n={n}")

    C = optimize.bisect(excess, 0.0, c_hi, xtol=1e-300,
                        rtol=NumericsConfig.BISECTION_RTOL, maxiter=400)
    logger.debug(f"C_M calibrated: M={M}, m={m}, n={n}, C_M={C:.15g}")
    return float(C)


def _radius_squared(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if n == 1:
        if x.ndim >= 2 and x.shape[-1] == 1:
            x = x[..., 0]
        return x * x
    if x.shape[-1:] != (n,):
        raise GridError(f"points for n={n} need a trailing axis of length {n}, got shape {x.shape}")
    return np.sum(x * x, axis=-1)


def _scalar_or_array(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


@dataclass(frozen=True)
class BarenblattProfile:
    """
    Source-type solution of the porous medium equation with L1 mass M.

    Attributes:
        M (float): Mass.
        m (float): Diffusion exponent.
        n (int): Spatial dimension.
        C_M (float): Calibrated profile constant.
        a1, a2, a3 (float): Scaling exponents and profile constant.
    """
    M: float
    m: float
    n: int
    C_M: float
    a1: float
    a2: float
    a3: float

    @classmethod
    def calibrated(cls, M: float, m: float, n: int) -> 'BarenblattProfile':
        a1, a2, a3 = coefficients(m, n)
        return cls(float(M), float(m), int(n), mass_constant(M, m, n), a1, a2, a3)

    @property
    def exponent(self) -> float:
        return 1.0 / (self.m - 1.0)

    def evaluate_radius_squared(self, r2, t: float):
        if not t > 0.0:
            raise DomainError(f"Barenblatt profile needs t > 0, got t={t}")
        r2 = np.asarray(r2, dtype=np.float64)
        core = np.maximum(self.C_M - self.a3 * r2 / t ** (2.0 * self.a2), 0.0)
        return _scalar_or_array(t ** (-self.a1) * core ** self.exponent)

    def evaluate(self, x, t: float):
        """
        B_M(x, t).

        Args:
            x: One point or an array of points (trailing axis of length n when n = 2).
            t (float): Time, t > 0.

        Raises:
            DomainError: If t <= 0.
        """
        return self.evaluate_radius_squared(_radius_squared(x, self.n), t)

    def rescaled_profile(self, eta):
        """Stationary profile (C_M - a3 |eta|^2)_+^{1/(m-1)} in self-similar variables."""
        r2 = _radius_squared(eta, self.n)
        return _scalar_or_array(np.maximum(self.C_M - self.a3 * r2, 0.0) ** self.exponent)

    def support_radius(self, t: float = 1.0) -> float:
        if not t > 0.0:
            raise DomainError(f"Barenblatt profile needs t > 0, got t={t}")
        return math.sqrt(self.C_M / self.a3) * t ** self.a2

    def sample(self, grid: Grid, t: float) -> np.ndarray:
        """Point values at the cell centers of grid."""
        self._check_grid(grid)
        return np.asarray(self.evaluate_radius_squared(grid.radius_squared(), t), dtype=np.float64)

    def sample_rescaled(self, grid: Grid) -> np.ndarray:
        self._check_grid(grid)
        return np.maximum(self.C_M - self.a3 * grid.radius_squared(), 0.0) ** self.exponent

    def entropy(self) -> float:
        """H of the stationary rescaled profile, by the closed-form moments."""
        p = self.exponent
        # integral of (C - a3 r^2)^q r^2 follows from the same Gamma moments
        q_m = p * self.m
        base = (math.pi ** (self.n / 2.0) * self.a3 ** (-self.n / 2.0))
        first = (self.C_M ** (q_m + self.n / 2.0) * base * special.gamma(q_m + 1.0)
                 / special.gamma(q_m + 1.0 + self.n / 2.0))
        second_moment = (self.C_M ** (p + 1.0 + self.n / 2.0) * base * (self.n / 2.0) / self.a3
                         * special.gamma(p + 1.0) / special.gamma(p + 2.0 + self.n / 2.0))
        return float(first / (self.m - 1.0) + 0.5 * self.a2 * second_moment)

    def to_record(self) -> Dict[str, float]:
        return {
            'M': self.M, 'm': self.m, 'n': self.n, 'C_M': self.C_M,
            'a1': self.a1, 'a2': self.a2, 'a3': self.a3,
        }

    def _check_grid(self, grid: Grid):
        if grid.dim != self.n:
            raise GridError(f"profile dimension {self.n} does not match grid dimension {grid.dim}")


def total_mass(masses: Sequence[float]) -> float:
    """|M| = sqrt(sum M_i^2) for positive species masses."""
    masses = [float(v) for v in masses]
    if not masses or any(not (math.isfinite(v) and v > 0.0) for v in masses):
        raise ParameterError(f"species masses must all be > 0, got {masses}")
    return math.sqrt(math.fsum(v * v for v in masses))


def _check_species_profile(p: BarenblattProfile, masses: Sequence[float]) -> float:
    norm = total_mass(masses)
    if not math.isclose(norm, p.M, rel_tol=1e-12):
        raise PreconditionError(f"profile mass {p.M} does not equal |M| = {norm}")
    return norm


def species_profile(p: BarenblattProfile, masses: Sequence[float], i: int, x, t: float):
    """
    Species i of the delta-data solution, (M_i / |M|) B_{|M|}(x, t).

    Raises:
        ParameterError: If a mass is not positive.
        PreconditionError: If i is out of range or p was not built with mass |M|.
    """
    norm = _check_species_profile(p, masses)
    _check_index(i, len(masses))
    return (masses[i] / norm) * p.evaluate(x, t)


def species_state(grid: Grid, masses: Sequence[float], m: float, t: float) -> SpeciesState:
    """Sample every species of the delta-data solution on grid at time t."""
    profile = BarenblattProfile.calibrated(total_mass(masses), m, grid.dim)
    base = profile.sample(grid, t)
    fields = np.stack([(Mi / profile.M) * base for Mi in masses])
    return SpeciesState(grid, fields, t)
