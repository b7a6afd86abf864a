# main.py
import argparse
import logging
import sys

from debug_utils import setup_logging
from experiment.runner import combined_exit_code, run_many, verify_all
from experiment.scenario import ScenarioDefaults, parse_scenario
from experiment.study import run_study
from numerics.errors import SpmeError
from services.run_service import RunService
from services.settings_service import SettingsService

logger = logging.getLogger(__name__)


def build_parser():
    """
    Command line of the laboratory:

        spme run <scenario.cfg>... [--jobs N] [--out DIR]
        spme study <scenario.cfg> --levels L [--out DIR]
        spme verify-all <dir> [--jobs N] [--out DIR]
    """
    parser = argparse.ArgumentParser(prog='spme', description="Numerical laboratory for the porous medium system")
    parser.add_argument('--settings', default='settings.json', help="settings file (default: settings.json)")
    parser.add_argument('--verbose', '-v', action='store_true', help="debug logging")
    commands = parser.add_subparsers(dest='command', required=True)

    run_cmd = commands.add_parser('run', help="run scenario files and write their verdicts")
    run_cmd.add_argument('scenarios', nargs='+', help="scenario .cfg files")
    run_cmd.add_argument('--jobs', type=int, default=None, help="scenarios run concurrently")
    run_cmd.add_argument('--out', default=None, help="output root (default: $SPME_OUT or settings)")

    study_cmd = commands.add_parser('study', help="grid refinement study against the exact solution")
    study_cmd.add_argument('scenario', help="scenario .cfg file")
    study_cmd.add_argument('--levels', type=int, required=True, help="number of grids, at least 2")
    study_cmd.add_argument('--out', default=None, help="output root (default: $SPME_OUT or settings)")

    verify_cmd = commands.add_parser('verify-all', help="run every scenario in a directory")
    verify_cmd.add_argument('directory', help="directory holding *.cfg scenarios")
    verify_cmd.add_argument('--jobs', type=int, default=None, help="scenarios run concurrently")
    verify_cmd.add_argument('--out', default=None, help="output root (default: $SPME_OUT or settings)")
    return parser


def _print_results(results):
    for result in results:
        failed = [c.name for c in result.checks if not c.passed]
        line = f"{result.scenario}: {result.status} (exit {result.exit_code})"
        if failed:
            line += f" failed: {', '.join(failed)}"
        if result.error:
            line += f" error: {result.error['message']}"
        print(line)


def main(argv=None):
    """
    The main function of the command line.

    Returns:
        int: Exit code, 0 pass, 1 check failure, 2 configuration error, 3 numerical failure.
    """
    args = build_parser().parse_args(argv)
    settings_service = SettingsService(args.settings)
    log_settings = settings_service.get_logging_settings()
    setup_logging(debug_mode=args.verbose or bool(log_settings.get('debug')),
                  log_file=log_settings.get('log_file'), console=True)

    defaults = ScenarioDefaults.from_settings(settings_service)
    output_root = args.out or settings_service.get_output_root()
    growth = float(settings_service.get_harnack_settings().get('baseline_growth', 1.1))

    try:
        if args.command == 'study':
            scenario = parse_scenario(args.scenario, defaults)
            run_dir = RunService(output_root).run_directory(scenario.output.directory)
            result = run_study(scenario, args.levels, run_dir)
            for row in result.table.rows:
                print(f"h={row.h:.6g} L1={row.L1:.6e} Linf={row.Linf:.6e} order={row.order_estimate:.3f}")
            if result.inconclusive:
                print("inconclusive: errors do not decrease under refinement")
            return 0

        jobs = args.jobs if args.jobs is not None else settings_service.get_jobs()
        if args.command == 'run':
            results = run_many(args.scenarios, output_root, jobs, defaults, growth)
        else:
            results = verify_all(args.directory, output_root, jobs, defaults, growth)
    except SpmeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    _print_results(results)
    return combined_exit_code(results)


if __name__ == '__main__':
    sys.exit(main())
