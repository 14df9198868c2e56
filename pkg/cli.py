"""Command-line entry point: python cli.py <subcommand> [options]

Subcommands compute reduced Khovanov tables and their invariants for braid
closures and twist-knot branch sets, check cone bookkeeping, and re-run the
figure regression suite. Exit codes: 0 ok, 1 computation error, 2 failing
check, 64 usage error.
"""

import argparse
import json
import logging
import sys
from typing import Callable, Dict, List, Optional, Tuple

from config import Config
from cones import cone_page, e1_dominates, e1_page
from diagrams import PlanarDiagram, braid_from_text, closure
from figures import verify_all, verify_figure
from khovanov import KhTable, determinant, jones, kh_reduced, width
from perturbed import bn_homology_rank, lee_lower_bound_check
from twistlab import finite_filling_report, require_engine, tau, tau_rational, width_profile
from validators import InputValidator, ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors to run() instead of exiting with status 2."""

    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    """Subcommands, each sharing the common output and engine flags."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=None, help="Emit JSON (sorted keys)")
    common.add_argument("--ascii", action="store_true", default=None, help="Render tables with delta across, q up")
    common.add_argument("--threads", type=int, default=None, help="Worker count (default: all cores)")
    common.add_argument("--max-crossings", type=int, default=None, help="Crossing cap for homology computations")
    common.add_argument("--config", default=None, help="key=value file presetting these flags")
    common.add_argument("--extended", action="store_true", default=None, help="Allow t = 3 branch sets")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable DEBUG-level logging to stderr")

    parser = UsageParser(prog="khwidth", description="Reduced Khovanov homology and width of braid closures")
    sub = parser.add_subparsers(dest="command", parser_class=UsageParser)
    sub.required = True

    for name, text in (("kh", "reduced Khovanov table"), ("width", "homological width"),
                       ("jones", "Jones polynomial from the table"), ("det", "determinant"),
                       ("turner", "perturbed ranks and the lower-bound check")):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--braid", required=True, help="Braid word, e.g. '3: 1 -2 1'")

    twist = sub.add_parser("twistknot", parents=[common], help="branch set of a surgery on a twist knot")
    twist.add_argument("--t", type=int, required=True, help="Twist parameter")
    slope = twist.add_mutually_exclusive_group(required=True)
    slope.add_argument("--framing", type=int, help="Integer surgery coefficient")
    slope.add_argument("--slope", help="Rational surgery coefficient p/q")
    twist.add_argument("action", nargs="?", default="kh", choices=InputValidator.TWISTKNOT_ACTIONS)

    cone = sub.add_parser("cone", parents=[common], help="skein cone at one positive crossing")
    cone.add_argument("--braid", required=True)
    cone.add_argument("--crossing", type=int, required=True)

    e1 = sub.add_parser("e1", parents=[common], help="E1 page of iterated resolutions of a positive braid")
    e1.add_argument("--braid", required=True)
    e1.add_argument("--crossings", required=True, help="Comma-separated crossing ids, in resolution order")

    profile = sub.add_parser("profile", parents=[common], help="width sweep over framings")
    profile.add_argument("--t", type=int, required=True)
    profile.add_argument("--from", dest="n_lo", type=int, required=True)
    profile.add_argument("--to", dest="n_hi", type=int, required=True)

    verdict = sub.add_parser("verdict", parents=[common], help="finite-filling verdict for a twist knot")
    verdict.add_argument("--t", type=int, required=True)

    verify = sub.add_parser("verify", parents=[common], help="figure regression suite")
    which = verify.add_mutually_exclusive_group(required=True)
    which.add_argument("--figure", help="Figure id or number")
    which.add_argument("--all", action="store_true")
    verify.add_argument("--t", type=int, default=None)
    return parser


def configure_logging(verbose: bool):
    """Console logging to stderr, plus the optional log file."""
    level = 'DEBUG' if verbose else Config.CONSOLE_LOG_LEVEL
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    handlers = [console_handler]
    if Config.LOG_FILE:
        file_handler = logging.FileHandler(Config.LOG_FILE)
        file_handler.setLevel(Config.FILE_LOG_LEVEL)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)
    logging.basicConfig(level=getattr(logging, level, logging.INFO), handlers=handlers, force=True)


def resolve_settings(args) -> Dict[str, object]:
    """Built-in default < environment (already in Config) < config file < flag."""
    try:
        from_file = Config.load_file(args.config) if args.config else {}
    except (OSError, ValueError) as e:
        raise ValidationError(f"Bad config file: {e}")
    defaults = {'max_crossings': Config.MAX_CROSSINGS, 'threads': Config.THREADS,
                'extended': Config.ENABLE_EXTENDED, 'json': False, 'ascii': False}
    settings = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        settings[key] = flag if flag is not None else from_file.get(key, default)
    is_valid, error = InputValidator.validate_thread_count(settings['threads'])
    if not is_valid:
        raise ValidationError(error)
    if settings['max_crossings'] < 1:
        raise ValidationError("--max-crossings must be positive")
    return settings


class Writer:
    """Single output path for results: JSON with sorted keys, or plain text."""

    def __init__(self, as_json: bool, stream=None):
        self.as_json = as_json
        self.stream = stream or sys.stdout

    def emit(self, payload: Dict, text: Callable[[], str]):
        if self.as_json:
            self.stream.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        else:
            self.stream.write(text() + "\n")
        self.stream.flush()


def _entries_text(table: KhTable) -> str:
    if table.is_empty():
        return "(empty)"
    return "\n".join(f"delta={g.delta} q={g.q}: {r}" for g, r in table.entries)


def _diagram_action(action: str, diagram: PlanarDiagram, label: str, settings, writer: Writer) -> int:
    if action == 'turner':
        total, diagonals = bn_homology_rank(diagram)
        report = lee_lower_bound_check(kh_reduced(diagram), diagonals)
        writer.emit({'input': label, **diagonals.to_json(), 'lower_bound': report.to_json()},
                    lambda: f"total {total}\n" + "\n".join(f"n={n}: {r}" for n, r in diagonals.entries)
                    + f"\nlower bound {'holds' if report.passed else 'FAILS: ' + '; '.join(report.violations)}")
        return EXIT_OK if report.passed else EXIT_FAILED

    table = kh_reduced(diagram)
    if action == 'kh':
        writer.emit({'input': label, 'table': table.to_json()},
                    lambda: table.ascii() if settings['ascii'] else _entries_text(table))
    elif action == 'width':
        w = width(table)
        writer.emit({'input': label, 'width': w}, lambda: str(w))
    elif action == 'jones':
        polynomial = jones(table)
        writer.emit({'input': label, 'jones': polynomial.to_json()}, lambda: str(polynomial))
    elif action == 'det':
        det = determinant(table)
        writer.emit({'input': label, 'det': det}, lambda: str(det))
    return EXIT_OK


def _twistknot_diagram(args) -> Tuple[PlanarDiagram, str]:
    request = {'t': args.t, 'framing': args.framing, 'slope': args.slope, 'action': args.action}
    is_valid, error, cleaned = InputValidator.validate_twistknot_request(request)
    if not is_valid:
        raise ValidationError(error)
    require_engine(cleaned['t'])
    t, p, q = cleaned['t'], cleaned['p'], cleaned['q']
    if q == 1:
        return tau(t, p), f"tau_{t}({p})"
    return tau_rational(t, p, q), f"tau_{t}({p}/{q})"


def _report_text(report) -> str:
    lines = [f"{report.figure}{'' if report.t is None else f' (t={report.t})'}: "
             f"{'PASS' if report.passed else 'FAIL'}"]
    lines.extend(f"  mismatch: {m}" for m in report.mismatches)
    for block in report.wildcards:
        lines.append(f"  indeterminate block of {block['link']}: computed rank {block['computed_rank']}, "
                     f"predicted {block['predicted_rank']}")
    if report.diff:
        lines.append(report.diff)
    return "\n".join(lines)


def dispatch(args, settings, writer: Writer) -> int:
    """Run one parsed subcommand and return its exit code."""
    command = args.command
    if command in ('kh', 'width', 'jones', 'det', 'turner'):
        return _diagram_action(command, closure(braid_from_text(args.braid)), args.braid, settings, writer)

    if command == 'twistknot':
        diagram, label = _twistknot_diagram(args)
        return _diagram_action(args.action, diagram, label, settings, writer)

    if command == 'cone':
        diagram = closure(braid_from_text(args.braid))
        page = cone_page(diagram, args.crossing)
        report = e1_dominates(page, kh_reduced(diagram))
        writer.emit({'input': args.braid, 'crossing': args.crossing, 'c': page.constants[0],
                     'page': page.to_json(), 'report': report.to_json()},
                    lambda: f"c = {page.constants[0]}, defect {report.defect}, "
                            f"{'consistent' if report.passed else 'INCONSISTENT: ' + '; '.join(report.violations)}")
        return EXIT_OK if report.passed else EXIT_FAILED

    if command == 'e1':
        braid = braid_from_text(args.braid)
        is_valid, error, crossings = InputValidator.validate_crossing_ids(args.crossings, len(braid))
        if not is_valid:
            raise ValidationError(error)
        page = e1_page(braid, crossings)
        report = e1_dominates(page, kh_reduced(closure(braid)))
        writer.emit({'input': args.braid, 'page': page.to_json(), 'report': report.to_json()},
                    lambda: f"constants {list(page.constants)}, defect {report.defect}, "
                            f"{'dominates' if report.passed else 'FAILS: ' + '; '.join(report.violations)}")
        return EXIT_OK if report.passed else EXIT_FAILED

    if command == 'profile':
        profile = width_profile(args.t, args.n_lo, args.n_hi, settings['threads'])
        writer.emit(profile.to_json(),
                    lambda: "\n".join(f"n={n}: width {w}" for n, w in sorted(profile.entries.items()))
                    + f"\njump framing {profile.jump_framing}, w_K = {profile.w_K}")
        return EXIT_OK

    if command == 'verdict':
        verdict = finite_filling_report(args.t, settings['threads'])
        writer.emit(verdict.to_json(),
                    lambda: f"t = {verdict.t}: {verdict.verdict} (w_K = {verdict.w_K})"
                            + "".join(f"\n  caveat: {c}" for c in verdict.caveats))
        return EXIT_OK

    if command == 'verify':
        if args.all:
            reports = verify_all(args.t, settings['threads'])
        else:
            reports = [verify_figure(args.figure, args.t)]
        writer.emit({'reports': [report.to_json() for report in reports]},
                    lambda: "\n".join(_report_text(report) for report in reports))
        return EXIT_OK if all(report.passed for report in reports) else EXIT_FAILED

    raise UsageError(f"Unknown command '{command}'")


def run(argv: Optional[List[str]] = None, stream=None) -> int:
    """Parse argv, apply settings and dispatch; every failure maps to an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK

    configure_logging(args.verbose)
    saved = (Config.MAX_CROSSINGS, Config.THREADS, Config.ENABLE_EXTENDED)
    try:
        settings = resolve_settings(args)
        Config.MAX_CROSSINGS = settings['max_crossings']
        Config.THREADS = settings['threads']
        Config.ENABLE_EXTENDED = settings['extended']
        return dispatch(args, settings, Writer(settings['json'], stream))
    except (UsageError, ValidationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        Config.MAX_CROSSINGS, Config.THREADS, Config.ENABLE_EXTENDED = saved


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
