# experiment\runner.py
"""
Experiment runner: turns a validated scenario into solver runs, evaluates the
requested checks and writes the run directory (manifest, report CSVs, field
checkpoints, verdict).
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from numerics.barenblatt import BarenblattProfile, coefficients, total_mass
from numerics.core import l1_difference, masses
from numerics.diagnostics import (BarenblattObserver, DecayObserver, InvariantObserver,
                                  MassObserver, RatioObserver, SupportObserver,
                                  TraceRecorder, harnack_sweep, waiting_time)
from numerics.errors import NumericalBlowupError, PreconditionError, SpmeError, StagnationError
from numerics.numerics_config import NumericsConfig, run_timer
from numerics.selfsim import (dissipation_mismatch, entropy_increase, entropy_run,
                              entropy_trace, equilibrium_distance, equilibrium_entropy_drift,
                              to_selfsimilar)
from numerics.solver import SolverConfig, continuation_run, run
from numerics.travelling import dirichlet_tw_run, epsilon_scale, ode_residual
from services.run_service import RunService

from .export_handler import ExportHandler
from .observers import CheckpointObserver
from .scenario import Scenario, ScenarioDefaults, parse_scenario

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1

STAGES = ('run', 'selfsim', 'harnack', 'travelling', 'continuation')


@dataclass
class CheckResult:
    """Outcome of one requested check."""
    name: str
    passed: bool
    value: Any = None
    detail: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {'passed': bool(self.passed), 'value': self.value, 'detail': self.detail}


@dataclass
class ExperimentResult:
    """
    Attributes:
        scenario (str): Scenario name, or the file stem when parsing failed.
        exit_code (int): 0 pass, 1 check failure, 2 configuration, 3 numerical.
        checks (list): CheckResult per requested check, in request order.
        run_dir (str): Directory holding the artifacts.
        error (dict): Type and message of the error that stopped the experiment.
        baselines (dict): Baselines measured for the first time and not stored yet.
    """
    scenario: str
    exit_code: int
    checks: List[CheckResult] = field(default_factory=list)
    run_dir: Optional[str] = None
    error: Optional[Dict[str, Any]] = None
    flags: List[Dict[str, Any]] = field(default_factory=list)
    baselines: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_PASS

    @property
    def status(self) -> str:
        if self.exit_code == EXIT_PASS:
            return 'pass'
        return 'fail' if self.exit_code == EXIT_CHECK_FAILED else 'error'

    def check(self, name: str) -> Optional[CheckResult]:
        return next((c for c in self.checks if c.name == name), None)

    def verdict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario,
            'status': self.status,
            'exit_code': self.exit_code,
            'checks': {c.name: c.to_record() for c in self.checks},
            'flags': self.flags,
            'error': self.error,
        }


def _error_record(error: SpmeError) -> Dict[str, Any]:
    record = {'type': type(error).__name__, 'message': str(error)}
    if isinstance(error, NumericalBlowupError):
        record.update({'step_index': error.step_index, 'time': error.time})
    elif isinstance(error, StagnationError):
        record.update({'time': error.time, 'dt': error.dt})
    issues = getattr(error, 'issues', None)
    if issues:
        record['issues'] = list(issues)
    return record


def _non_increasing(values: Sequence[float], slack: float) -> bool:
    values = list(values)
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def _tail_non_increasing(values: Sequence[float], slack: float, count: int = 3) -> bool:
    return _non_increasing(list(values)[-count:], slack)


class ExperimentRunner:
    """Runs the stages a scenario's checks need and collects their verdicts."""

    def __init__(self, scenario: Scenario, run_service: RunService,
                 baseline_growth: float = NumericsConfig.BASELINE_GROWTH,
                 record_baselines: bool = True):
        """
        Args:
            scenario (Scenario): Validated scenario.
            run_service (RunService): Storage for artifacts and baselines.
            baseline_growth (float): Allowed growth over a stored baseline.
            record_baselines (bool): Store new baselines immediately; when off
                they are returned in the result for the caller to store.
        """
        self.scenario = scenario
        self.run_service = run_service
        self.baseline_growth = baseline_growth
        self.record_baselines = record_baselines
        self.run_dir = run_service.run_directory(scenario.output.directory)
        self.exporter = ExportHandler(self.run_dir)
        self.results: List[CheckResult] = []
        self.flags: List[Dict[str, Any]] = []
        self.pending_baselines: Dict[str, float] = {}
        self.manifest: Dict[str, Any] = {'scenario': scenario.to_record(), 'stages': {}, 'times': []}

    def _result(self, name: str, passed: bool, value: Any = None, detail: str = ""):
        result = CheckResult(name, bool(passed), value, detail)
        self.results.append(result)
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"[{self.scenario.name}] check {name}: "
                          f"{'pass' if result.passed else 'FAIL'} ({detail or value})")

    def _export(self, outcome) -> bool:
        """Keep an artifact write failure as a verdict flag."""
        ok, message = outcome
        if not ok:
            self.flags.append({'name': 'artifact_write', 'time': None, 'detail': message})
        return ok

    def _stages(self) -> List[str]:
        s = self.scenario
        stages = [stage for stage in STAGES if s.stage_checks(stage)]
        if not s.checks and s.run is not None and not s.is_wave:
            stages.append('run')
        return stages

    def execute(self) -> ExperimentResult:
        s = self.scenario
        run_timer.start_operation(s.name)
        error = None
        try:
            for stage in self._stages():
                logger.info(f"[{s.name}] stage {stage}")
                getattr(self, f'_{stage}_stage')()
            exit_code = EXIT_PASS if all(r.passed for r in self.results) else EXIT_CHECK_FAILED
        except SpmeError as e:
            logger.error(f"[{s.name}] experiment stopped: {e}", exc_info=True)
            exit_code = e.exit_code
            error = _error_record(e)
        run_timer.end_operation(s.name)

        order = list(s.checks)
        self.results.sort(key=lambda r: order.index(r.name) if r.name in order else len(order))
        result = ExperimentResult(s.name, exit_code, self.results, str(self.run_dir), error,
                                  self.flags, dict(self.pending_baselines))
        self.manifest['times'] = sorted(set(self.manifest['times']))
        self.manifest['artifacts'] = list(self.exporter.written)
        self.run_service.save_manifest(self.run_dir, self.manifest)
        self.run_service.save_verdict(self.run_dir, result.verdict())
        logger.info(f"[{s.name}] verdict {result.status} (exit {exit_code}) in {self.run_dir}")
        return result

    # ------------------------------------------------------------------
    # Physical-space run
    # ------------------------------------------------------------------

    def _run_stage(self):
        s = self.scenario
        wanted = set(s.stage_checks('run'))
        initial = s.initial_state()
        initial_masses = masses(initial)

        observers = [MassObserver(), SupportObserver()]
        recorder = None
        if 'waiting_time' in wanted:
            recorder = TraceRecorder()
            observers.append(recorder)
        if wanted & {'cauchy_schwarz', 'subsolution', 'support_retention'}:
            observers.append(InvariantObserver(subsolution='subsolution' in wanted))
        if wanted & {'proportionality', 'ratio_trend'}:
            observers.append(RatioObserver(initial_masses))
        if 'stabilization' in wanted:
            observers.append(BarenblattObserver(initial_masses, s.m, s.n))
        if 'linf_decay' in wanted:
            observers.append(DecayObserver())
        if s.output.checkpoints:
            checkpoints = CheckpointObserver(self.exporter)
            observers.append(checkpoints)

        final, report = run(initial, s.solver_config(), s.run.t_end, observers, s.run.plan())
        self._export(self.exporter.export_report(report))
        if s.output.checkpoints and checkpoints.failures:
            self._export((False, f"{checkpoints.failures} checkpoint(s) could not be written"))
        self.manifest['times'].extend(float(t) for t in report.times())
        self.flags.extend({'name': f.name, 'time': f.time, 'detail': f.detail} for f in report.flags)
        self.manifest['stages']['run'] = {'summary': dict(report.summary), 'samples': len(report)}
        if all(v > 0.0 for v in initial_masses):
            profile = BarenblattProfile.calibrated(total_mass(initial_masses), s.m, s.n)
            self.manifest['barenblatt'] = profile.to_record()

        for name in s.stage_checks('run'):
            getattr(self, f'_check_{name}')(report, final, recorder)

    def _check_mass(self, report, final, recorder):
        drift = report.summary.get('max_mass_drift', report.summary.get('mass_drift', math.nan))
        tol = self.scenario.check_option('mass', 'tol', NumericsConfig.MASS_DRIFT_TOL)
        self._result('mass', drift <= tol, drift, f"max relative drift {drift:.3e} (tol {tol:g})")

    def _check_waiting_time(self, report, final, recorder):
        t0 = self.scenario.run.t0
        met = waiting_time(recorder.states)
        if met is None:
            horizon = self.scenario.run.t_end - t0
            self._result('waiting_time', horizon > 0.0, horizon,
                         f"supports disjoint over all {len(recorder.states)} samples up to t={t0 + horizon:.6g}")
        else:
            self._result('waiting_time', False, met - t0, f"supports met at t={met:.6g}")

    def _check_synchronization(self, report, final, recorder):
        s = self.scenario
        tol = s.check_option('synchronization', 'tol', 0.05)
        at = s.check_option('synchronization', 'time', 1.0)
        names = [n for n in report.metric_names() if n.startswith('sync_')]
        if not names:
            self._result('synchronization', False, None, "no overlapping species supports were sampled")
            return
        value = max(report.value_at(n, at) for n in names)
        cells = max(report.last(n) for n in report.metric_names() if n.startswith('support_cells_'))
        slack = NumericsConfig.allowed_support_loss(s.n) / max(cells, 1.0)
        trend = all(_tail_non_increasing(report.column(n)[1], slack) for n in names)
        passed = math.isfinite(value) and value < tol and trend
        self._result('synchronization', passed, value,
                     f"defect {value:.4g} at t={at:g} (tol {tol:g}); last three samples "
                     f"{'non-increasing' if trend else 'increasing'}")

    def _check_stabilization(self, report, final, recorder):
        s = self.scenario
        at = s.check_option('stabilization', 'time', 1.0)
        factor = s.check_option('stabilization', 'factor', 0.5)
        values, passed = {}, True
        for i in range(s.k):
            for kind in ('l1', 'linf'):
                name = f'{kind}_{i + 1}'
                early, late = report.value_at(name, at), report.last(name)
                values[name] = [early, late]
                passed = passed and math.isfinite(late) and late <= factor * early
        self._result('stabilization', passed, values,
                     f"distances at t={at:g} and t={report.times()[-1]:g}, required ratio <= {factor:g}")

    def _check_linf_decay(self, report, final, recorder):
        s = self.scenario
        a1 = coefficients(s.m, s.n)[0]
        slope = report.summary.get('linf_slope', math.nan)
        bound = -a1 + NumericsConfig.LINF_SLOPE_SLACK
        self._result('linf_decay', slope <= bound, slope, f"log-log slope {slope:.4f}, bound {bound:.4f}")

    def _check_proportionality(self, report, final, recorder):
        tol = self.scenario.check_option('proportionality', 'tol', NumericsConfig.PROPORTIONALITY_TOL)
        min_steps = int(self.scenario.check_option('proportionality', 'min_steps', 0))
        _, defects = report.column('ratio_defect')
        worst = float(np.max(defects)) if defects.size else math.nan
        steps = report.summary['steps']
        passed = defects.size > 0 and worst <= tol and steps >= min_steps
        self._result('proportionality', passed, worst,
                     f"max ratio defect {worst:.3e} over {steps} steps (tol {tol:g})")

    def _check_ratio_trend(self, report, final, recorder):
        s = self.scenario
        start = s.check_option('ratio_trend', 'from', s.run.t0)
        rtol = s.check_option('ratio_trend', 'rtol', 1e-3)
        times, defects = report.column('ratio_defect')
        window = [float(d) for t, d in zip(times, defects) if t >= start]
        if len(window) < 2:
            self._result('ratio_trend', False, None, f"fewer than two ratio samples from t={start:g}")
            return
        first, last = window[0], window[-1]
        monotone = _non_increasing(window, rtol * first)
        self._result('ratio_trend', monotone and last < first, window,
                     f"ratio defect {first:.4g} -> {last:.4g} over {len(window)} samples from t={start:g}; "
                     f"{'non-increasing' if monotone else 'not monotone'}")

    def _check_cauchy_schwarz(self, report, final, recorder):
        slack = report.summary.get('min_cs_slack', math.nan)
        self._result('cauchy_schwarz', slack >= NumericsConfig.CAUCHY_SCHWARZ_SLACK, slack,
                     f"smallest face slack {slack:.3e}")

    def _check_subsolution(self, report, final, recorder):
        residual = report.summary.get('max_subsolution_residual', -math.inf)
        tol = NumericsConfig.subsolution_tolerance(self.scenario.grid.h_min)
        self._result('subsolution', residual <= tol and not report.has_flag('subsolution'), residual,
                     f"largest residual {residual:.3e} (tol {tol:.3e})")

    def _check_support_retention(self, report, final, recorder):
        lost = report.summary.get('max_support_lost', 0)
        allowed = NumericsConfig.allowed_support_loss(self.scenario.n)
        self._result('support_retention', lost <= allowed, lost,
                     f"at most {lost} cells left the support between samples (allowed {allowed})")

    def _check_cap(self, report, final, recorder):
        cap = self.scenario.solver.cap_M
        peak = float(np.max(final.fields))
        self._result('cap', peak <= cap + NumericsConfig.CAP_TOL, peak, f"final maximum {peak:.6g}, cap {cap:g}")

    def _check_barenblatt_error(self, report, final, recorder):
        s = self.scenario
        tol = s.check_option('barenblatt_error', 'l1_tol', 0.02)
        exact = s.exact_solution()(final.grid, final.time)
        error = math.fsum(l1_difference(final, exact))
        self._result('barenblatt_error', error <= tol, error, f"L1 error {error:.3e} at t={final.time:g} (tol {tol:g})")

    # ------------------------------------------------------------------
    # Self-similar entropy
    # ------------------------------------------------------------------

    def _selfsim_stage(self):
        s = self.scenario
        spec = s.selfsim
        rs = to_selfsimilar(s.initial_state(time=spec.t0), s.m)
        trace, final = entropy_run(rs, s.m, rs.tau + spec.tau_span, spec.stride)
        self._export(self.exporter.export_entropy(trace))
        self.manifest['stages']['selfsim'] = {'records': len(trace), 'tau': [rs.tau, final.tau]}
        self.manifest['times'].extend(math.exp(r.tau) for r in trace)
        wanted = s.stage_checks('selfsim')

        if 'entropy_monotone' in wanted:
            rtol = s.check_option('entropy_monotone', 'rtol', NumericsConfig.ENTROPY_MONOTONE_RTOL)
            increase = entropy_increase(trace)
            self._result('entropy_monotone', increase <= rtol, increase,
                         f"largest relative increase of H {increase:.3e} over {len(trace)} records")

        if 'entropy_dissipation' in wanted:
            min_i1 = min(r.I1 for r in trace)
            min_i2 = min(r.I2 for r in trace)
            floor = NumericsConfig.CAUCHY_SCHWARZ_SLACK * max(1.0, max(r.I1 for r in trace))
            self._result('entropy_dissipation', min_i1 >= 0.0 and min_i2 >= floor, [min_i1, min_i2],
                         f"min I1 {min_i1:.3e}, min I2 {min_i2:.3e}")

        if 'dissipation_balance' in wanted:
            span = spec.balance_span
            warmup = s.check_option('dissipation_balance', 'warmup', NumericsConfig.BALANCE_WARMUP)
            # per-step records on both grids
            coarse = dissipation_mismatch(entropy_trace(rs, s.m, rs.tau + span, 1), warmup)
            fine_rs = to_selfsimilar(s.initial_state(grid=s.grid.refined(2), time=spec.t0), s.m)
            fine = dissipation_mismatch(entropy_trace(fine_rs, s.m, fine_rs.tau + span, 1), warmup)
            self._result('dissipation_balance', fine < coarse, [coarse, fine],
                         f"|dH/dtau + I1 + I2| {coarse:.3e} -> {fine:.3e} under refinement "
                         f"(tau > {rs.tau + warmup:.4g})")

        if 'entropy_equilibrium' in wanted:
            span = s.check_option('entropy_equilibrium', 'tau_span', 1.0)
            tol = s.check_option('entropy_equilibrium', 'tol', NumericsConfig.EQUILIBRIUM_ENTROPY_TOL)
            ratio = s.check_option('entropy_equilibrium', 'ratio', NumericsConfig.EQUILIBRIUM_ENTROPY_RATIO)
            species_masses = rs.masses()
            coarse = equilibrium_entropy_drift(rs.grid, species_masses, s.m, span, spec.stride)
            fine = equilibrium_entropy_drift(rs.grid.refined(2), species_masses, s.m, span, spec.stride)
            observed = coarse / fine if fine > 0.0 else math.inf
            passed = fine <= tol or observed >= ratio
            self._result('entropy_equilibrium', passed, [coarse, fine],
                         f"relative H drift over tau in [0, {span:g}]: {coarse:.3e} -> {fine:.3e} "
                         f"(ratio {observed:.3g}, required {ratio:g} or drift <= {tol:g})")

        if 'equilibrium_approach' in wanted:
            factor = s.check_option('equilibrium_approach', 'factor', NumericsConfig.EQUILIBRIUM_APPROACH_FACTOR)
            species_masses = rs.masses()
            start = math.fsum(equilibrium_distance(rs, species_masses, s.m))
            end = math.fsum(equilibrium_distance(final, species_masses, s.m))
            self._result('equilibrium_approach', end * factor <= start, [start, end],
                         f"L1 distance to equilibrium {start:.4g} -> {end:.4g} "
                         f"over tau in [{rs.tau:.4g}, {final.tau:.4g}] (required factor {factor:g})")

    # ------------------------------------------------------------------
    # Harnack sweep
    # ------------------------------------------------------------------

    def _harnack_stage(self):
        s = self.scenario
        spec = s.harnack
        initial = s.initial_state()
        species_masses = masses(initial)
        mu0 = min(species_masses) / max(species_masses)
        samples = harnack_sweep(initial, s.solver_config(), species_masses, spec.times, spec.radius_factors)
        self._export(self.exporter.export_harnack(samples))
        self.manifest['times'].extend(initial.time + t for t in spec.times)
        q_max = max(sample.Q for sample in samples)
        key = f"{s.name}.harnack_max_Q"
        within, baseline, new = self.run_service.compare_baseline(
            key, q_max, self.baseline_growth, record=self.record_baselines)
        if new and not self.record_baselines:
            self.pending_baselines[key] = q_max
        self.manifest['stages']['harnack'] = {'samples': len(samples), 'mu0': mu0}
        passed = math.isfinite(q_max) and within
        detail = (f"max Q {q_max:.6g}, baseline {baseline:.6g}"
                  + (" (recorded now)" if new else f", growth limit {self.baseline_growth:g}"))
        self._result('harnack', passed, {'max_Q': q_max, 'baseline': baseline, 'mu0': mu0}, detail)

    # ------------------------------------------------------------------
    # Travelling waves
    # ------------------------------------------------------------------

    def _travelling_stage(self):
        s = self.scenario
        wave = s.travelling_wave()
        wanted = s.stage_checks('travelling')
        t0, t_end = s.run.t0, s.run.t_end
        self.manifest['times'].extend([t0, t_end])

        if 'wave_order' in wanted:
            min_order = s.check_option('wave_order', 'min_order', 0.8)
            table = dirichlet_tw_run(wave, s.grid, t0, t_end, s.travelling.levels)
            self._export(self.exporter.export_error_table(table))
            order = table.min_order()
            passed = table.is_monotone() and order >= min_order
            self._result('wave_order', passed, order,
                         f"observed orders {[round(o, 3) for o in table.orders()]} (required {min_order:g})")

        if 'wave_profile' in wanted:
            tol = s.check_option('wave_profile', 'tol', 1e-12)
            h_s = s.check_option('wave_profile', 'h_s', 1e-3)
            residual, _ = ode_residual(wave, np.linspace(-1.0, 1.0, 401), h_s)
            self._result('wave_profile', residual <= tol, residual, f"profile ODE residual {residual:.3e}")

        if 'wave_scaling' in wanted:
            eps = s.check_option('wave_scaling', 'epsilon', 0.5)
            tol = s.check_option('wave_scaling', 'tol', 1e-13)
            state = wave.sample(s.grid, t0)
            scaled = epsilon_scale(state, eps, s.m)
            exact = wave.sample(s.grid.scaled(eps), eps * t0)
            scale = max(1.0, float(np.max(np.abs(exact.fields))))
            gap = float(np.max(np.abs(scaled.fields - exact.fields))) / scale
            self._result('wave_scaling', gap <= tol, gap, f"max relative gap {gap:.3e} at eps={eps:g}")

    # ------------------------------------------------------------------
    # Regularization continuation
    # ------------------------------------------------------------------

    def _continuation_stage(self):
        s = self.scenario
        ladder = SolverConfig.continuation_ladder(s.m, s.solver.continuation, cap_M=s.solver.cap_M,
                                                  cfl_safety=s.solver.cfl_safety)
        result = continuation_run(s.initial_state(), ladder, s.run.t_end)
        distances = result.distances
        self.manifest['times'].extend([s.run.t0, s.run.t_end])
        self.manifest['stages']['continuation'] = {'epsilons': result.epsilons, 'distances': distances}
        passed = all(math.isfinite(d) for d in distances) and distances[-1] <= distances[0]
        self._result('continuation', passed, {'epsilons': result.epsilons, 'distances': distances},
                     f"L1 gaps between rungs {['%.3e' % d for d in distances]}")


def run_experiment(scenario: Scenario, output_root, baseline_growth: float = NumericsConfig.BASELINE_GROWTH,
                   record_baselines: bool = True) -> ExperimentResult:
    """Run every check the scenario requests and write its run directory."""
    return ExperimentRunner(scenario, RunService(output_root), baseline_growth, record_baselines).execute()


def run_path(path, output_root, defaults: Optional[ScenarioDefaults] = None,
             baseline_growth: float = NumericsConfig.BASELINE_GROWTH,
             record_baselines: bool = True) -> ExperimentResult:
    """Parse and run one scenario file; parse failures still leave a verdict."""
    try:
        scenario = parse_scenario(path, defaults)
    except SpmeError as e:
        logger.error(f"Invalid scenario {path}: {e}")
        service = RunService(output_root)
        run_dir = service.run_directory(Path(path).stem)
        result = ExperimentResult(Path(path).stem, e.exit_code, run_dir=str(run_dir), error=_error_record(e))
        service.save_verdict(run_dir, result.verdict())
        return result
    return run_experiment(scenario, output_root, baseline_growth, record_baselines)


def run_many(paths: Sequence, output_root, jobs: int = 1, defaults: Optional[ScenarioDefaults] = None,
             baseline_growth: float = NumericsConfig.BASELINE_GROWTH) -> List[ExperimentResult]:
    """
    Run scenario files, concurrently when jobs > 1.

    Worker processes share nothing; baselines they measure for the first time
    are stored here once every worker has finished.
    """
    paths = [str(p) for p in paths]
    if jobs <= 1 or len(paths) <= 1:
        return [run_path(p, output_root, defaults, baseline_growth) for p in paths]

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_path, p, str(output_root), defaults, baseline_growth, False) for p in paths]
        results = [future.result() for future in futures]
    pending: Dict[str, float] = {}
    for result in results:
        pending.update(result.baselines)
    RunService(output_root).record_baselines(pending)
    return results


def verify_all(directory, output_root, jobs: int = 1, defaults: Optional[ScenarioDefaults] = None,
               baseline_growth: float = NumericsConfig.BASELINE_GROWTH) -> List[ExperimentResult]:
    """
    Run every ``*.cfg`` scenario in directory.

    Raises:
        PreconditionError: If the directory holds no scenario file.
    """
    paths = sorted(Path(directory).glob('*.cfg'))
    if not paths:
        raise PreconditionError(f"no *.cfg scenarios in {directory}")
    return run_many(paths, output_root, jobs, defaults, baseline_growth)


def combined_exit_code(results: Sequence[ExperimentResult]) -> int:
    """Worst exit code over several experiments."""
    return max((r.exit_code for r in results), default=EXIT_PASS)
