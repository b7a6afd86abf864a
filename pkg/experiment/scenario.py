# experiment\scenario.py
"""
Scenario files: one YAML document per file, ``.cfg`` extension.

    name: isolation
    model: {m: 2.0, k: 2, n: 1}
    grid: {cells: 1024, half_width: auto}       # or lower: [...] / upper: [...]
    initial:
      - {species: 1, shape: pme-bump, center: [-1.0], radius: 0.25, amplitude: 0.5}
      - {species: 2, shape: pme-bump, center: [1.0], radius: 0.25, amplitude: 0.5}
    solver: {epsilon: 0.0, cap_M: null, cfl_safety: 0.9, continuation: []}
    run: {t0: 0.0, t_end: 0.25, stride: 500, sample_times: [0.1]}
    selfsim: {t0: 1.0, tau_span: 1.5, stride: 100, balance_span: 0.05}
    travelling: {direction: [1.0], levels: 3}
    harnack: {times: [0.25, 1.0], radius_factors: [1.5, 2.0, 4.0], mu0: 0.5}
    checks: [mass, waiting_time, {barenblatt_error: {l1_tol: 0.01}}]
    output: {directory: isolation, checkpoints: true}

Species keys are 1-based in files and 0-based once parsed. Every problem in a
file is collected and reported together with its key path and line number.
"""
import functools
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy import special

from numerics.barenblatt import BarenblattProfile, total_mass
from numerics.core import Grid, SpeciesState
from numerics.errors import (ConfigurationError, MixedOrientationError, ParameterError,
                             PreconditionError, ScenarioValidationError)
from numerics.numerics_config import NumericsConfig
from numerics.solver import SamplingPlan, SolverConfig
from numerics.travelling import Orientation, TravellingWave

logger = logging.getLogger(__name__)

SHAPES = ('pme-bump', 'barenblatt', 'travelling-wave')

SECTIONS = ('name', 'model', 'grid', 'initial', 'solver', 'run', 'selfsim',
            'travelling', 'harnack', 'checks', 'output')

# check name -> stage that produces its data
CHECK_STAGES = {
    'mass': 'run',
    'waiting_time': 'run',
    'synchronization': 'run',
    'stabilization': 'run',
    'linf_decay': 'run',
    'proportionality': 'run',
    'ratio_trend': 'run',
    'cauchy_schwarz': 'run',
    'subsolution': 'run',
    'support_retention': 'run',
    'cap': 'run',
    'barenblatt_error': 'run',
    'entropy_monotone': 'selfsim',
    'entropy_dissipation': 'selfsim',
    'dissipation_balance': 'selfsim',
    'entropy_equilibrium': 'selfsim',
    'equilibrium_approach': 'selfsim',
    'harnack': 'harnack',
    'wave_order': 'travelling',
    'wave_profile': 'travelling',
    'wave_scaling': 'travelling',
    'continuation': 'continuation',
}

_MISSING = object()


@functools.lru_cache(maxsize=64)
def _calibrated(M: float, m: float, n: int) -> BarenblattProfile:
    return BarenblattProfile.calibrated(M, m, n)


def _bump_mass(radius: float, m: float, n: int) -> float:
    """Mass of (1 - |y|^2/r^2)_+^{1/(m-1)} in n dimensions."""
    p = 1.0 / (m - 1.0)
    return radius ** n * math.pi ** (n / 2.0) * special.gamma(p + 1.0) / special.gamma(p + 1.0 + n / 2.0)


@dataclass(frozen=True)
class Bump:
    """
    One piece of initial data for one species.

    Attributes:
        species (int): 0-based species index.
        shape (str): 'pme-bump', 'barenblatt' or 'travelling-wave'.
        center (tuple): Center of the bump.
        radius (float): Support radius of a pme-bump.
        amplitude (float): Multiplier (the wave coefficient c_i for travelling waves).
        mass (float): Mass M of the Barenblatt profile B_M.
        time (float): Profile time of a Barenblatt bump at the scenario's initial time.
        orientation (str): 'left' or 'right' for travelling waves.
    """
    species: int
    shape: str = 'pme-bump'
    center: Tuple[float, ...] = (0.0,)
    radius: float = 0.0
    amplitude: float = 1.0
    mass: float = 0.0
    time: float = 1.0
    orientation: str = 'left'

    @property
    def is_wave(self) -> bool:
        return self.shape == 'travelling-wave'

    def extent(self, m: float, n: int) -> float:
        """Distance from the origin to the far edge of the bump's support."""
        reach = math.sqrt(math.fsum(c * c for c in self.center))
        if self.shape == 'barenblatt':
            return reach + _calibrated(self.mass, m, n).support_radius(self.time)
        return reach + self.radius

    def support_box(self, m: float, n: int) -> Tuple[Tuple[float, float], ...]:
        r = self.extent(m, n) - math.sqrt(math.fsum(c * c for c in self.center))
        return tuple((c - r, c + r) for c in self.center)

    def mass_estimate(self, m: float, n: int) -> float:
        if self.shape == 'barenblatt':
            return self.amplitude * self.mass
        if self.shape == 'pme-bump':
            return self.amplitude * _bump_mass(self.radius, m, n)
        return math.nan

    def sample(self, grid: Grid, m: float, elapsed: float = 0.0) -> np.ndarray:
        """Values at the cell centers, elapsed time after the scenario's initial time."""
        offset = grid.points() - np.asarray(self.center)
        r2 = np.sum(offset * offset, axis=-1)
        if self.shape == 'barenblatt':
            profile = _calibrated(self.mass, m, grid.dim)
            return self.amplitude * np.asarray(profile.evaluate_radius_squared(r2, self.time + elapsed))
        return self.amplitude * np.maximum(1.0 - r2 / self.radius ** 2, 0.0) ** (1.0 / (m - 1.0))


@dataclass(frozen=True)
class SolverSpec:
    epsilon: float = 0.0
    cap_M: Optional[float] = None
    cfl_safety: float = NumericsConfig.CFL_SAFETY
    continuation: Tuple[float, ...] = ()


@dataclass(frozen=True)
class RunSpec:
    t0: float = 0.0
    t_end: float = 1.0
    stride: Optional[int] = None
    sample_times: Tuple[float, ...] = ()

    def plan(self) -> SamplingPlan:
        return SamplingPlan(self.stride, self.sample_times)


@dataclass(frozen=True)
class SelfSimilarSpec:
    t0: float = 1.0
    tau_span: float = 1.0
    stride: int = 100
    balance_span: float = 0.05


@dataclass(frozen=True)
class TravellingSpec:
    direction: Tuple[float, ...] = (1.0,)
    levels: int = 3


@dataclass(frozen=True)
class HarnackSpec:
    times: Tuple[float, ...] = NumericsConfig.HARNACK_TIMES
    radius_factors: Tuple[float, ...] = NumericsConfig.HARNACK_RADIUS_FACTORS
    mu0: float = 0.0


@dataclass(frozen=True)
class OutputSpec:
    directory: str
    checkpoints: bool = True


@dataclass(frozen=True)
class ScenarioDefaults:
    """Values a scenario file may leave out."""
    cells: Dict[int, int] = field(default_factory=lambda: {
        1: NumericsConfig.DEFAULT_CELLS_1D, 2: NumericsConfig.DEFAULT_CELLS_2D})
    checkpoints: bool = True
    harnack_times: Tuple[float, ...] = NumericsConfig.HARNACK_TIMES
    harnack_radius_factors: Tuple[float, ...] = NumericsConfig.HARNACK_RADIUS_FACTORS

    @classmethod
    def from_settings(cls, settings) -> 'ScenarioDefaults':
        harnack = settings.get_harnack_settings()
        return cls(cells=settings.get_default_cells(),
                   checkpoints=settings.get_checkpoints_enabled(),
                   harnack_times=tuple(float(t) for t in harnack['times']),
                   harnack_radius_factors=tuple(float(f) for f in harnack['radius_factors']))


@dataclass(frozen=True)
class Scenario:
    """A validated scenario with every default applied."""
    name: str
    m: float
    k: int
    n: int
    grid: Grid
    bumps: Tuple[Bump, ...]
    solver: SolverSpec = SolverSpec()
    run: Optional[RunSpec] = None
    selfsim: Optional[SelfSimilarSpec] = None
    travelling: Optional[TravellingSpec] = None
    harnack: Optional[HarnackSpec] = None
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    output: Optional[OutputSpec] = None
    path: Optional[str] = None

    @property
    def t0(self) -> float:
        return self.run.t0 if self.run is not None else 0.0

    @property
    def is_wave(self) -> bool:
        return any(b.is_wave for b in self.bumps)

    def check_names(self) -> List[str]:
        return list(self.checks)

    def stage_checks(self, stage: str) -> List[str]:
        return [name for name in self.checks if CHECK_STAGES[name] == stage]

    def check_option(self, check: str, key: str, default: Any) -> Any:
        return self.checks.get(check, {}).get(key, default)

    def with_grid(self, grid: Grid) -> 'Scenario':
        return replace(self, grid=grid)

    def solver_config(self, epsilon: Optional[float] = None) -> SolverConfig:
        return SolverConfig(m=self.m,
                            epsilon=self.solver.epsilon if epsilon is None else epsilon,
                            cap_M=self.solver.cap_M,
                            cfl_safety=self.solver.cfl_safety)

    def travelling_wave(self) -> Optional[TravellingWave]:
        """The wave of the solver's equation described by the travelling-wave bumps."""
        if not self.is_wave:
            return None
        bumps = sorted(self.bumps, key=lambda b: b.species)
        direction = self.travelling.direction if self.travelling else (1.0,)
        return TravellingWave.from_species_orientations(
            self.m, [b.amplitude for b in bumps], [b.orientation for b in bumps],
            direction, mobility=self.m)

    def initial_state(self, grid: Optional[Grid] = None, time: Optional[float] = None) -> SpeciesState:
        """Initial data sampled on grid (the scenario grid by default) at time."""
        grid = grid or self.grid
        time = self.t0 if time is None else float(time)
        wave = self.travelling_wave()
        if wave is not None:
            return wave.sample(grid, time)
        fields = np.zeros((self.k,) + grid.shape)
        for bump in self.bumps:
            fields[bump.species] += bump.sample(grid, self.m)
        return SpeciesState(grid, fields, time)

    def species_masses(self) -> Tuple[float, ...]:
        """Masses of the initial data from the closed-form bump masses."""
        totals = [0.0] * self.k
        for bump in self.bumps:
            totals[bump.species] += bump.mass_estimate(self.m, self.n)
        return tuple(totals)

    def mu0(self) -> float:
        """min M_i / max M_i."""
        masses = self.species_masses()
        return min(masses) / max(masses)

    def exact_solution(self) -> Optional[Callable[[Grid, float], SpeciesState]]:
        """
        Closed-form solution of the scenario, if it has one: a travelling wave, or
        one Barenblatt bump per species sharing center, mass and time with
        amplitudes of unit Euclidean norm.
        """
        wave = self.travelling_wave()
        if wave is not None:
            return wave.sample
        bumps = sorted(self.bumps, key=lambda b: b.species)
        if len(bumps) != self.k or any(b.shape != 'barenblatt' for b in bumps):
            return None
        first = bumps[0]
        if any(b.center != first.center or b.mass != first.mass or b.time != first.time for b in bumps):
            return None
        if not math.isclose(math.fsum(b.amplitude ** 2 for b in bumps), 1.0, rel_tol=1e-12):
            return None
        t0 = self.t0

        def exact(grid: Grid, t: float) -> SpeciesState:
            fields = np.stack([b.sample(grid, self.m, t - t0) for b in bumps])
            return SpeciesState(grid, fields, t)

        return exact

    def to_record(self) -> Dict[str, Any]:
        record = {
            'name': self.name,
            'path': self.path,
            'model': {'m': self.m, 'k': self.k, 'n': self.n},
            'grid': {'cells': list(self.grid.cells), 'origin': list(self.grid.origin),
                     'spacing': list(self.grid.spacing)},
            'initial': [{'species': b.species + 1, 'shape': b.shape, 'center': list(b.center),
                         'radius': b.radius, 'amplitude': b.amplitude, 'mass': b.mass,
                         'time': b.time, 'orientation': b.orientation} for b in self.bumps],
            'solver': {'epsilon': self.solver.epsilon, 'cap_M': self.solver.cap_M,
                       'cfl_safety': self.solver.cfl_safety,
                       'continuation': list(self.solver.continuation)},
            'checks': {name: dict(options) for name, options in self.checks.items()},
        }
        for key in ('run', 'selfsim', 'travelling', 'harnack'):
            spec = getattr(self, key)
            if spec is not None:
                record[key] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(spec).items()}
        return record


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _format_path(path: Sequence) -> str:
    text = ''
    for part in path:
        if isinstance(part, int):
            text += f'[{part}]'
        else:
            text += f'.{part}' if text else str(part)
    return text or '<document>'


def _line_map(node, path: Tuple = (), lines: Optional[Dict[Tuple, int]] = None) -> Dict[Tuple, int]:
    """1-based line of every node of a composed YAML document, keyed by path."""
    lines = {} if lines is None else lines
    if node is None:
        return lines
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            _line_map(value_node, path + (key_node.value,), lines)
    elif isinstance(node, yaml.SequenceNode):
        for index, item in enumerate(node.value):
            _line_map(item, path + (index,), lines)
    return lines


class _ScenarioReader:
    """Typed access to the raw document that records problems instead of raising."""

    def __init__(self, lines: Dict[Tuple, int]):
        self.lines = lines
        self.issues: List[str] = []

    def _line(self, path: Tuple) -> Optional[int]:
        for cut in range(len(path), -1, -1):
            if path[:cut] in self.lines:
                return self.lines[path[:cut]]
        return None

    def issue(self, path: Tuple, message: str):
        line = self._line(path)
        where = _format_path(path) + (f" (line {line})" if line else "")
        self.issues.append(f"{where}: {message}")

    def mapping(self, value: Any, path: Tuple, required: bool = False) -> Optional[dict]:
        if value is None:
            if required:
                self.issue(path, "missing required section")
            return None
        if not isinstance(value, dict):
            self.issue(path, f"expected a mapping, got {type(value).__name__}")
            return None
        return value

    def unknown_keys(self, mapping: dict, path: Tuple, known: Sequence[str]):
        for key in mapping:
            if key not in known:
                self.issue(path + (key,), f"unknown key (expected one of {', '.join(known)})")

    def _coerce(self, value: Any, path: Tuple) -> Optional[float]:
        # YAML 1.1 reads exponent forms without a dot (1e-2) as strings
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.issue(path, f"expected a number, got {value!r}")
            return None
        if not math.isfinite(value):
            self.issue(path, f"must be finite, got {value!r}")
            return None
        return value

    def number(self, mapping: dict, path: Tuple, key: str, default: Any = _MISSING, *,
               integer: bool = False, positive: bool = False, nonnegative: bool = False):
        where = path + (key,)
        if mapping is None or mapping.get(key) is None:
            if default is _MISSING:
                self.issue(where, "missing required key")
                return None
            return default
        value = self._coerce(mapping[key], where)
        if value is None:
            return None
        if integer:
            if not float(value).is_integer():
                self.issue(where, f"expected an integer, got {mapping[key]!r}")
                return None
            value = int(value)
        else:
            value = float(value)
        if positive and not value > 0:
            self.issue(where, f"must be > 0, got {value}")
            return None
        if nonnegative and value < 0:
            self.issue(where, f"must be >= 0, got {value}")
            return None
        return value

    def vector(self, mapping: dict, path: Tuple, key: str, length: Optional[int],
               default: Any = _MISSING) -> Optional[Tuple[float, ...]]:
        where = path + (key,)
        if mapping is None or mapping.get(key) is None:
            if default is _MISSING:
                self.issue(where, "missing required key")
                return None
            return default
        raw = mapping[key]
        items = raw if isinstance(raw, list) else [raw]
        values = []
        for index, item in enumerate(items):
            value = self._coerce(item, where + (index,) if isinstance(raw, list) else where)
            if value is None:
                return None
            values.append(float(value))
        if length is not None and len(values) != length:
            self.issue(where, f"expected {length} component(s), got {len(values)}")
            return None
        return tuple(values)

    def choice(self, mapping: dict, path: Tuple, key: str, options: Sequence[str], default: str) -> Optional[str]:
        value = mapping.get(key, default) if mapping else default
        if value not in options:
            self.issue(path + (key,), f"expected one of {', '.join(options)}, got {value!r}")
            return None
        return value


def parse_scenario(path, defaults: Optional[ScenarioDefaults] = None) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        PreconditionError: If the file does not exist.
        ScenarioValidationError: With every problem found in the file.
    """
    path = Path(path)
    if not path.is_file():
        raise PreconditionError(f"scenario file not found: {path}")
    text = path.read_text(encoding='utf-8')
    return parse_scenario_text(text, str(path), defaults)


def parse_scenario_text(text: str, path: Optional[str] = None,
                        defaults: Optional[ScenarioDefaults] = None) -> Scenario:
    defaults = defaults or ScenarioDefaults()
    try:
        data = yaml.safe_load(text)
        lines = _line_map(yaml.compose(text))
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise ScenarioValidationError([f"<document>{where}: {e}"], path)

    reader = _ScenarioReader(lines)
    if not isinstance(data, dict):
        raise ScenarioValidationError(["<document>: expected a mapping of sections"], path)
    reader.unknown_keys(data, (), SECTIONS)

    stem = Path(path).stem if path else 'scenario'
    name = str(data.get('name') or stem)

    # model
    model = reader.mapping(data.get('model'), ('model',), required=True) or {}
    m = reader.number(model, ('model',), 'm')
    if m is not None and not m > 1.0:
        reader.issue(('model', 'm'), f"m must be > 1 (got {m})")
        m = None
    n = reader.number(model, ('model',), 'n', 1, integer=True)
    if n is not None and n not in (1, 2):
        reader.issue(('model', 'n'), f"n must be 1 or 2, got {n}")
        n = None
    reader.unknown_keys(model, ('model',), ('m', 'k', 'n'))

    # initial data
    bumps = _parse_bumps(reader, data.get('initial'), n or 1)
    k_default = max((b.species + 1 for b in bumps), default=1)
    k = reader.number(model, ('model',), 'k', k_default, integer=True, positive=True)
    if k is not None:
        for index, bump in enumerate(bumps):
            if bump.species >= k:
                reader.issue(('initial', index, 'species'), f"species {bump.species + 1} exceeds k={k}")
        for species in range(k):
            if not any(b.species == species for b in bumps):
                reader.issue(('initial',), f"species {species + 1} has no initial data")

    solver = _parse_solver(reader, data.get('solver'))
    run = _parse_run(reader, data.get('run'))
    selfsim = _parse_selfsim(reader, data.get('selfsim'))
    harnack = _parse_harnack(reader, data.get('harnack'), defaults)
    travelling = _parse_travelling(reader, data.get('travelling'), n or 1,
                                   any(b.is_wave for b in bumps))
    checks = _parse_checks(reader, data.get('checks'), run is not None)

    output = reader.mapping(data.get('output'), ('output',)) or {}
    reader.unknown_keys(output, ('output',), ('directory', 'checkpoints'))
    output_spec = OutputSpec(str(output.get('directory') or name),
                             bool(output.get('checkpoints', defaults.checkpoints)))

    if m is None or n is None or k is None or reader.issues:
        raise ScenarioValidationError(reader.issues, path)

    scenario = Scenario(name=name, m=m, k=k, n=n, grid=Grid.centered(n, 1.0, 4), bumps=tuple(bumps),
                        solver=solver, run=run, selfsim=selfsim, travelling=travelling,
                        harnack=harnack, checks=checks, output=output_spec, path=path)
    grid = _parse_grid(reader, data.get('grid'), scenario, defaults)
    if grid is not None:
        scenario = scenario.with_grid(grid)
        _validate_scenario(reader, scenario)
    if reader.issues:
        raise ScenarioValidationError(reader.issues, path)
    logger.info(f"Parsed scenario '{name}': m={m}, k={k}, n={n}, cells={scenario.grid.cells}, "
                f"checks={scenario.check_names()}")
    return scenario


def _parse_bumps(reader: _ScenarioReader, raw: Any, n: int) -> List[Bump]:
    path = ('initial',)
    if raw is None:
        reader.issue(path, "missing required section")
        return []
    if not isinstance(raw, list) or not raw:
        reader.issue(path, "expected a non-empty list of bumps")
        return []
    known = ('species', 'shape', 'center', 'radius', 'amplitude', 'mass', 'time', 'orientation')
    bumps = []
    for index, entry in enumerate(raw):
        where = path + (index,)
        entry = reader.mapping(entry, where, required=True)
        if entry is None:
            continue
        reader.unknown_keys(entry, where, known)
        count = len(reader.issues)
        species = reader.number(entry, where, 'species', 1, integer=True, positive=True)
        shape = reader.choice(entry, where, 'shape', SHAPES, 'pme-bump')
        center = reader.vector(entry, where, 'center', n, tuple(0.0 for _ in range(n)))
        amplitude = reader.number(entry, where, 'amplitude', 1.0, positive=True)
        radius = reader.number(entry, where, 'radius', _MISSING if shape == 'pme-bump' else 0.0,
                               positive=shape == 'pme-bump')
        mass = reader.number(entry, where, 'mass', _MISSING if shape == 'barenblatt' else 0.0,
                             positive=shape == 'barenblatt')
        time = reader.number(entry, where, 'time', 1.0, positive=True)
        orientation = reader.choice(entry, where, 'orientation', [o.value for o in Orientation], 'left')
        if len(reader.issues) == count:
            bumps.append(Bump(species - 1, shape, center, radius, amplitude, mass, time, orientation))
    return bumps


def _parse_solver(reader: _ScenarioReader, raw: Any) -> SolverSpec:
    path = ('solver',)
    solver = reader.mapping(raw, path) or {}
    reader.unknown_keys(solver, path, ('epsilon', 'cap_M', 'cfl_safety', 'continuation'))
    epsilon = reader.number(solver, path, 'epsilon', 0.0, nonnegative=True)
    cap_M = reader.number(solver, path, 'cap_M', None, positive=True)
    cfl = reader.number(solver, path, 'cfl_safety', NumericsConfig.CFL_SAFETY, positive=True)
    if cfl is not None and cfl > 1.0:
        reader.issue(path + ('cfl_safety',), f"must lie in (0, 1], got {cfl}")
    ladder = reader.vector(solver, path, 'continuation', None, ()) or ()
    if any(eps < 0.0 for eps in ladder):
        reader.issue(path + ('continuation',), "regularization values must be >= 0")
    if ladder and len(ladder) < 2:
        reader.issue(path + ('continuation',), "a continuation ladder needs at least two values")
    return SolverSpec(epsilon or 0.0, cap_M, cfl or NumericsConfig.CFL_SAFETY, tuple(ladder))


def _parse_run(reader: _ScenarioReader, raw: Any) -> Optional[RunSpec]:
    path = ('run',)
    run = reader.mapping(raw, path)
    if run is None:
        return None
    reader.unknown_keys(run, path, ('t0', 't_end', 'stride', 'sample_times'))
    t0 = reader.number(run, path, 't0', 0.0, nonnegative=True)
    t_end = reader.number(run, path, 't_end')
    stride = reader.number(run, path, 'stride', None, integer=True, positive=True)
    times = reader.vector(run, path, 'sample_times', None, ()) or ()
    if t0 is None or t_end is None:
        return None
    if not t_end > t0:
        reader.issue(path + ('t_end',), f"t_end={t_end} must exceed t0={t0}")
        return None
    for index, t in enumerate(times):
        if not t0 < t <= t_end:
            reader.issue(path + ('sample_times', index), f"sample time {t} outside ({t0}, {t_end}]")
    return RunSpec(t0, t_end, stride, tuple(times))


def _parse_selfsim(reader: _ScenarioReader, raw: Any) -> Optional[SelfSimilarSpec]:
    path = ('selfsim',)
    selfsim = reader.mapping(raw, path)
    if selfsim is None:
        return None
    reader.unknown_keys(selfsim, path, ('t0', 'tau_span', 'stride', 'balance_span'))
    t0 = reader.number(selfsim, path, 't0', 1.0, positive=True)
    span = reader.number(selfsim, path, 'tau_span', 1.0, positive=True)
    stride = reader.number(selfsim, path, 'stride', 100, integer=True, positive=True)
    balance = reader.number(selfsim, path, 'balance_span', 0.05, positive=True)
    if None in (t0, span, stride, balance):
        return None
    return SelfSimilarSpec(t0, span, stride, balance)


def _parse_harnack(reader: _ScenarioReader, raw: Any, defaults: ScenarioDefaults) -> Optional[HarnackSpec]:
    path = ('harnack',)
    harnack = reader.mapping(raw, path)
    if harnack is None:
        return None
    reader.unknown_keys(harnack, path, ('times', 'radius_factors', 'mu0'))
    times = reader.vector(harnack, path, 'times', None, defaults.harnack_times)
    factors = reader.vector(harnack, path, 'radius_factors', None, defaults.harnack_radius_factors)
    mu0 = reader.number(harnack, path, 'mu0', 0.0, nonnegative=True)
    if times is not None and (not times or any(t <= 0.0 for t in times)):
        reader.issue(path + ('times',), "times must be a non-empty list of positive values")
    if factors is not None and (not factors or any(f <= 1.0 for f in factors)):
        reader.issue(path + ('radius_factors',), "radius factors must exceed 1 (R > sqrt(T))")
    if None in (times, factors, mu0):
        return None
    return HarnackSpec(tuple(times), tuple(factors), mu0)


def _parse_travelling(reader: _ScenarioReader, raw: Any, n: int, has_waves: bool) -> Optional[TravellingSpec]:
    path = ('travelling',)
    travelling = reader.mapping(raw, path)
    if travelling is None:
        return TravellingSpec(tuple([1.0] + [0.0] * (n - 1))) if has_waves else None
    reader.unknown_keys(travelling, path, ('direction', 'levels'))
    direction = reader.vector(travelling, path, 'direction', n, tuple([1.0] + [0.0] * (n - 1)))
    levels = reader.number(travelling, path, 'levels', 3, integer=True, positive=True)
    if direction is not None and not math.hypot(*direction) > 0.0:
        reader.issue(path + ('direction',), "direction must be nonzero")
        direction = None
    if direction is None or levels is None:
        return None
    length = math.hypot(*direction)
    return TravellingSpec(tuple(v / length for v in direction), levels)


def _parse_checks(reader: _ScenarioReader, raw: Any, has_run: bool) -> Dict[str, Dict[str, Any]]:
    path = ('checks',)
    if raw is None:
        return {'mass': {}} if has_run else {}
    if not isinstance(raw, list):
        reader.issue(path, "expected a list of check names")
        return {}
    checks: Dict[str, Dict[str, Any]] = {}
    for index, entry in enumerate(raw):
        if isinstance(entry, str):
            name, options = entry, {}
        elif isinstance(entry, dict) and len(entry) == 1:
            name, options = next(iter(entry.items()))
            options = options or {}
            if not isinstance(options, dict):
                reader.issue(path + (index, name), "check options must be a mapping")
                continue
        else:
            reader.issue(path + (index,), "expected a check name or {name: {options}}")
            continue
        if name not in CHECK_STAGES:
            reader.issue(path + (index,), f"unknown check {name!r} (known: {', '.join(CHECK_STAGES)})")
            continue
        clean = {}
        for key, value in options.items():
            number = reader._coerce(value, path + (index, name, key))
            if number is not None:
                clean[key] = float(number)
        checks[name] = clean
    return checks


def _auto_half_width(scenario: Scenario) -> float:
    """Margin times (largest bump extent + Barenblatt radius of |M| at the horizon)."""
    m, n = scenario.m, scenario.n
    horizon = 0.0
    if scenario.run is not None:
        horizon = max(horizon, scenario.run.t_end)
    if scenario.harnack is not None:
        horizon = max(horizon, scenario.t0 + max(scenario.harnack.times))
    if scenario.selfsim is not None:
        # the equilibrium support in eta is the Barenblatt radius at t = 1
        horizon = max(horizon, 1.0)
    norm = total_mass(scenario.species_masses())
    radius = _calibrated(norm, m, n).support_radius(max(horizon, 1e-12))
    extent = max(b.extent(m, n) for b in scenario.bumps)
    return NumericsConfig.DOMAIN_MARGIN * (extent + radius)


def _parse_grid(reader: _ScenarioReader, raw: Any, scenario: Scenario,
                defaults: ScenarioDefaults) -> Optional[Grid]:
    path = ('grid',)
    grid = reader.mapping(raw, path) or {}
    reader.unknown_keys(grid, path, ('cells', 'half_width', 'lower', 'upper'))
    n = scenario.n
    cells_default = defaults.cells.get(n, NumericsConfig.default_cells(n))
    raw_cells = grid.get('cells', cells_default)
    cells_list = raw_cells if isinstance(raw_cells, list) else [raw_cells] * n
    if len(cells_list) != n:
        reader.issue(path + ('cells',), f"expected {n} cell counts, got {len(cells_list)}")
        return None
    cells = []
    for value in cells_list:
        count = reader.number({'cells': value}, path, 'cells', integer=True, positive=True)
        if count is None:
            return None
        cells.append(count)

    try:
        if 'lower' in grid or 'upper' in grid:
            lower = reader.vector(grid, path, 'lower', n)
            upper = reader.vector(grid, path, 'upper', n)
            if lower is None or upper is None:
                return None
            return Grid.box(lower, upper, cells)
        half_width = grid.get('half_width', 'auto')
        if half_width == 'auto':
            if scenario.is_wave:
                reader.issue(path, "travelling-wave scenarios need explicit lower and upper corners")
                return None
            half_width = _auto_half_width(scenario)
            logger.debug(f"Automatic half width {half_width:.6g}")
        else:
            half_width = reader.number(grid, path, 'half_width', positive=True)
            if half_width is None:
                return None
        return Grid.centered(n, half_width, cells)
    except ConfigurationError as e:
        reader.issue(path, str(e))
        return None


def _validate_scenario(reader: _ScenarioReader, scenario: Scenario):
    """Cross-section constraints, once the grid is known."""
    grid = scenario.grid
    lower, upper = grid.origin, grid.upper
    m, n = scenario.m, scenario.n

    if scenario.is_wave:
        if not all(b.is_wave for b in scenario.bumps):
            reader.issue(('initial',), "travelling-wave data cannot be mixed with other shapes")
            return
        if len(scenario.bumps) != scenario.k:
            reader.issue(('initial',), "a travelling wave needs exactly one entry per species")
            return
        try:
            wave = scenario.travelling_wave()
        except MixedOrientationError as e:
            reader.issue(('initial',), str(e))
            return
        except ParameterError as e:
            reader.issue(('travelling',), str(e))
            return
        t0 = scenario.t0
        for t in (t0, scenario.run.t_end if scenario.run else t0):
            front = np.asarray(wave.direction) * wave.front(t)
            if not grid.contains(front):
                reader.issue(('grid',), f"wave front {tuple(front)} at t={t} lies outside the grid")
    else:
        for index, bump in enumerate(scenario.bumps):
            for axis, (lo, hi) in enumerate(bump.support_box(m, n)):
                if lo < lower[axis] or hi > upper[axis]:
                    reader.issue(('initial', index, 'center'),
                                 f"bump support [{lo:.6g}, {hi:.6g}] on axis {axis} leaves the grid "
                                 f"[{lower[axis]:.6g}, {upper[axis]:.6g}]")

    for name in scenario.checks:
        stage = CHECK_STAGES[name]
        where = ('checks',)
        if stage == 'run' and scenario.run is None:
            reader.issue(where, f"check {name!r} needs a run section")
        elif stage == 'selfsim' and scenario.selfsim is None:
            reader.issue(where, f"check {name!r} needs a selfsim section")
        elif stage == 'harnack' and scenario.harnack is None:
            reader.issue(where, f"check {name!r} needs a harnack section")
        elif stage == 'travelling' and (not scenario.is_wave or scenario.run is None):
            reader.issue(where, f"check {name!r} needs travelling-wave initial data and a run section")
        elif stage == 'continuation' and (not scenario.solver.continuation or scenario.run is None):
            reader.issue(where, f"check {name!r} needs solver.continuation and a run section")
    if scenario.is_wave and scenario.stage_checks('run'):
        reader.issue(('checks',), "travelling-wave scenarios only support the wave checks")
    if scenario.is_wave and scenario.travelling is not None and scenario.n != 1:
        reader.issue(('model', 'n'), "the travelling-wave harness runs in one dimension")
    if 'barenblatt_error' in scenario.checks and scenario.exact_solution() is None:
        reader.issue(('checks',), "check 'barenblatt_error' needs one Barenblatt bump per species "
                                  "with shared center, mass and time and unit-norm amplitudes")
    if 'cap' in scenario.checks and scenario.solver.cap_M is None:
        reader.issue(('checks',), "check 'cap' needs solver.cap_M")
    if ('stabilization' in scenario.checks or 'linf_decay' in scenario.checks) and scenario.run is not None:
        if not scenario.run.t_end > 1.0:
            reader.issue(('run', 't_end'), "stabilization checks compare against t = 1 and need t_end > 1")

    if not scenario.is_wave:
        masses = scenario.species_masses()
        if any(not v > 0.0 for v in masses):
            reader.issue(('initial',), f"species masses must be positive, got {masses}")
        elif scenario.harnack is not None:
            mu0 = scenario.mu0()
            if mu0 < scenario.harnack.mu0:
                reader.issue(('harnack', 'mu0'),
                             f"mass ratio min/max = {mu0:.6g} is below the required mu0={scenario.harnack.mu0}")
