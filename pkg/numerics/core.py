# numerics\core.py
"""
Grids, multi-species field states, norms, masses and support extraction.

All fields are cell averages on a uniform cell-centered grid. Arrays are stored
with the species axis first, so a state on a 2D grid holds an array of shape
``(k, nx, ny)``.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from .errors import GridError, PreconditionError
from .numerics_config import NumericsConfig

logger = logging.getLogger(__name__)

MIN_CELLS = 4
SUPPORTED_DIMS = (1, 2)


def _as_axis_tuple(value, dim: int, cast) -> tuple:
    """Broadcast a scalar or sequence to one entry per axis."""
    if np.ndim(value) == 0:
        return tuple(cast(value) for _ in range(dim))
    items = tuple(cast(v) for v in value)
    if len(items) != dim:
        raise GridError(f"expected {dim} entries per axis, got {len(items)}")
    return items


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid:
    """
    Uniform rectangular cell-centered mesh in one or two dimensions.

    Attributes:
        dim (int): Spatial dimension, 1 or 2.
        cells (tuple): Cells per axis.
        origin (tuple): Lower corner of the domain per axis.
        spacing (tuple): Cell width per axis.
    """
    dim: int
    cells: Tuple[int, ...]
    origin: Tuple[float, ...]
    spacing: Tuple[float, ...]

    def __post_init__(self):
        if self.dim not in SUPPORTED_DIMS:
            raise GridError(f"grid dimension must be 1 or 2, got {self.dim}")
        object.__setattr__(self, 'cells', _as_axis_tuple(self.cells, self.dim, int))
        object.__setattr__(self, 'origin', _as_axis_tuple(self.origin, self.dim, float))
        object.__setattr__(self, 'spacing', _as_axis_tuple(self.spacing, self.dim, float))
        if any(c < MIN_CELLS for c in self.cells):
            raise GridError(f"need at least {MIN_CELLS} cells per axis, got {self.cells}")
        if any(not (h > 0.0 and math.isfinite(h)) for h in self.spacing):
            raise GridError(f"spacing must be positive and finite, got {self.spacing}")
        if any(not math.isfinite(o) for o in self.origin):
            raise GridError(f"origin must be finite, got {self.origin}")

    @classmethod
    def centered(cls, dim: int, half_width: float, cells: Union[int, Sequence[int]]) -> 'Grid':
        """Symmetric box [-half_width, half_width]^dim."""
        if not half_width > 0.0:
            raise GridError(f"half width must be positive, got {half_width}")
        cells = _as_axis_tuple(cells, dim, int)
        spacing = tuple(2.0 * half_width / c for c in cells)
        return cls(dim, cells, tuple(-half_width for _ in cells), spacing)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float], cells: Union[int, Sequence[int]]) -> 'Grid':
        """Box between lower and upper corners."""
        lower = tuple(float(v) for v in np.atleast_1d(lower))
        upper = tuple(float(v) for v in np.atleast_1d(upper))
        dim = len(lower)
        cells = _as_axis_tuple(cells, dim, int)
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise GridError(f"upper corner {upper} must exceed lower corner {lower}")
        spacing = tuple((hi - lo) / c for lo, hi, c in zip(lower, upper, cells))
        return cls(dim, cells, lower, spacing)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.cells

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    @property
    def upper(self) -> Tuple[float, ...]:
        return tuple(o + c * h for o, c, h in zip(self.origin, self.cells, self.spacing))

    def axis_centers(self, axis: int) -> np.ndarray:
        """Cell centers origin + (j + 1/2) h along one axis."""
        return self.origin[axis] + (np.arange(self.cells[axis]) + 0.5) * self.spacing[axis]

    def axis_faces(self, axis: int) -> np.ndarray:
        """Coordinates of the interior faces along one axis."""
        return self.origin[axis] + np.arange(1, self.cells[axis]) * self.spacing[axis]

    def centers(self) -> Tuple[np.ndarray, ...]:
        """Cell-center coordinates, one array of grid shape per axis."""
        return tuple(np.meshgrid(*[self.axis_centers(a) for a in range(self.dim)], indexing='ij'))

    def points(self) -> np.ndarray:
        """Cell centers stacked on a trailing axis, shape ``(*cells, dim)``."""
        return np.stack(self.centers(), axis=-1)

    def radius_squared(self) -> np.ndarray:
        """|x|^2 at the cell centers."""
        return sum(c ** 2 for c in self.centers())

    def contains(self, point: Sequence[float]) -> bool:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.dim,):
            return False
        return all(lo <= p <= hi for p, lo, hi in zip(point, self.origin, self.upper))

    def refined(self, factor: int) -> 'Grid':
        """Same extent with factor times as many cells per axis."""
        if int(factor) < 1:
            raise GridError(f"refinement factor must be >= 1, got {factor}")
        factor = int(factor)
        return Grid(self.dim, tuple(c * factor for c in self.cells), self.origin,
                    tuple(h / factor for h in self.spacing))

    def scaled(self, scale: float) -> 'Grid':
        """Grid with every coordinate multiplied by scale."""
        if not scale > 0.0:
            raise GridError(f"scale must be positive, got {scale}")
        return Grid(self.dim, self.cells, tuple(o * scale for o in self.origin),
                    tuple(h * scale for h in self.spacing))

    def is_compatible(self, other: 'Grid') -> bool:
        return (self.dim == other.dim and self.cells == other.cells
                and np.allclose(self.origin, other.origin, rtol=1e-12, atol=1e-14)
                and np.allclose(self.spacing, other.spacing, rtol=1e-12, atol=0.0))


@dataclass(frozen=True)
class ScalarField:
    """Cell averages of one scalar quantity, for example |u| or a diffusivity."""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise GridError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("scalar field contains non-finite values")
        object.__setattr__(self, 'values', _freeze(values))

    def max(self) -> float:
        return float(np.max(self.values))

    def integral(self) -> float:
        return math.fsum(self.values.ravel()) * self.grid.cell_volume


@dataclass(frozen=True)
class SpeciesState:
    """
    k nonnegative species fields on one grid at one time.

    Negative entries produced by rounding are clamped to zero on construction.
    """
    grid: Grid
    fields: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        fields = np.array(self.fields, dtype=np.float64)
        if fields.ndim == self.grid.dim:
            fields = fields[np.newaxis, ...]
        if fields.ndim != self.grid.dim + 1 or fields.shape[1:] != self.grid.shape:
            raise GridError(f"species array shape {fields.shape} does not match grid {self.grid.shape}")
        if fields.shape[0] < 1:
            raise GridError("a state needs at least one species")
        if not np.all(np.isfinite(fields)):
            raise GridError("species fields contain non-finite values")
        if not (math.isfinite(self.time) and self.time >= 0.0):
            raise GridError(f"state time must be finite and nonnegative, got {self.time}")
        np.maximum(fields, 0.0, out=fields)
        object.__setattr__(self, 'fields', _freeze(fields))
        object.__setattr__(self, 'time', float(self.time))

    @classmethod
    def zeros(cls, grid: Grid, k: int, time: float = 0.0) -> 'SpeciesState':
        return cls(grid, np.zeros((k,) + grid.shape), time)

    @property
    def k(self) -> int:
        return self.fields.shape[0]

    def species(self, i: int) -> ScalarField:
        _check_index(i, self.k)
        return ScalarField(self.grid, self.fields[i])

    def with_fields(self, fields: np.ndarray, time: Optional[float] = None) -> 'SpeciesState':
        return SpeciesState(self.grid, fields, self.time if time is None else time)

    def with_time(self, time: float) -> 'SpeciesState':
        return SpeciesState(self.grid, self.fields, time)


@dataclass(frozen=True)
class SupportSet:
    """Cells of a grid where a field exceeds a threshold."""
    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != self.grid.shape:
            raise GridError(f"mask shape {mask.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, 'mask', _freeze(mask))

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def is_empty(self) -> bool:
        return not self.mask.any()

    def indices(self) -> np.ndarray:
        return np.argwhere(self.mask)

    def bounding_box(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        """(lowest, highest) cell center per axis, None for an empty set."""
        if self.is_empty():
            return None
        idx = self.indices()
        box = []
        for axis in range(self.grid.dim):
            centers = self.grid.axis_centers(axis)
            box.append((float(centers[idx[:, axis].min()]), float(centers[idx[:, axis].max()])))
        return tuple(box)

    def _other_mask(self, other: 'SupportSet') -> np.ndarray:
        if not self.grid.is_compatible(other.grid):
            raise GridError("support sets live on different grids")
        return other.mask

    def __and__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(self.grid, self.mask & self._other_mask(other))

    def __or__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(self.grid, self.mask | self._other_mask(other))

    def __xor__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(self.grid, self.mask ^ self._other_mask(other))

    def __sub__(self, other: 'SupportSet') -> 'SupportSet':
        return SupportSet(self.grid, self.mask & ~self._other_mask(other))

    def __le__(self, other: 'SupportSet') -> bool:
        return not np.any(self.mask & ~self._other_mask(other))


def _check_index(i: int, k: int):
    if not isinstance(i, (int, np.integer)) or not 0 <= i < k:
        raise PreconditionError(f"species index {i} out of range for k={k}")


def norm_array(fields: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean norm over the leading species axis."""
    if fields.shape[0] == 1:
        return np.abs(fields[0])
    return np.sqrt(np.sum(fields * fields, axis=0))


def norm_field(state: SpeciesState) -> ScalarField:
    """
    Pointwise Euclidean norm |u| across species.

    Args:
        state (SpeciesState): The multi-species state.

    Returns:
        ScalarField: |u| on the state's grid.
    """
    return ScalarField(state.grid, norm_array(state.fields))


def mass(state: SpeciesState, i: int) -> float:
    """
    Midpoint-quadrature mass of species i.

    The sum is compensated, so the result does not depend on traversal order.

    Raises:
        PreconditionError: If i is not a valid species index.
    """
    _check_index(i, state.k)
    return math.fsum(state.fields[i].ravel()) * state.grid.cell_volume


def masses(state: SpeciesState) -> Tuple[float, ...]:
    return tuple(mass(state, i) for i in range(state.k))


def l1_difference(a: SpeciesState, b: SpeciesState) -> Tuple[float, ...]:
    """Per-species L1 distance between two states on the same grid."""
    if not a.grid.is_compatible(b.grid) or a.k != b.k:
        raise GridError("states are not on the same grid with the same species count")
    volume = a.grid.cell_volume
    return tuple(math.fsum(np.abs(a.fields[i] - b.fields[i]).ravel()) * volume for i in range(a.k))


def default_threshold(field: Union[ScalarField, np.ndarray]) -> float:
    """max(floor, relative * max value) for the given field."""
    values = field.values if isinstance(field, ScalarField) else np.asarray(field)
    peak = float(np.max(values)) if values.size else 0.0
    return NumericsConfig.support_threshold(peak)


def support(field: ScalarField, threshold: Optional[float] = None) -> SupportSet:
    """
    Cells with value strictly above threshold.

    Args:
        field (ScalarField): Field to inspect.
        threshold (float, optional): Cut-off; the default threshold when omitted.

    Raises:
        PreconditionError: If threshold is negative.
    """
    if threshold is None:
        threshold = default_threshold(field)
    if threshold < 0.0:
        raise PreconditionError(f"support threshold must be >= 0, got {threshold}")
    return SupportSet(field.grid, field.values > threshold)


def support_distance(a: SupportSet, b: SupportSet, grid: Optional[Grid] = None) -> float:
    """
    Minimum center-to-center distance between two cell sets.

    Returns +inf if either set is empty and 0 if they intersect.
    """
    grid = grid or a.grid
    if not (grid.is_compatible(a.grid) and grid.is_compatible(b.grid)):
        raise GridError("support sets live on different grids")
    if a.is_empty() or b.is_empty():
        return math.inf
    if np.any(a.mask & b.mask):
        return 0.0
    # distance from every cell to the nearest cell of b
    distance = ndimage.distance_transform_edt(~b.mask, sampling=grid.spacing)
    return float(np.min(distance[a.mask]))
