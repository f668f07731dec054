"""
coil-link command-line front end.

    coil-link pte [--preset flat|bended]
    coil-link impedance --k 0.05 --frequency 40.68MHz
    coil-link sweep-k --cp 12p --k 0.01:0.2 --out sweep.csv --svg
    coil-link flip-threshold --cp 12p --cs1-error 1
    coil-link detune --cp 12p --margin 0
    coil-link transient --cp 12p --cs1 17.03p --k 0.06 --pattern 1010 --stride 10
    coil-link decode --cp 12p --cs1-error 1 --k 0.06
    coil-link reproduce --out results/ --svg

Exit codes: 0 ok, 1 usage, 2 invalid input, 3 computation failure.
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import CoilLinkError, ComputationError, ValidationError
from .link_model import LoadState
from .logger import configure_logging
from .lsk_analysis import (SweepScale, apply_mismatch, detune_solve, flip_threshold,
                           sweep_coupling)
from .presets import PRESETS
from .reports import (decode_table, detune_table, flip_table, impedance_table, pte_table,
                      sweep_table, trace_table)
from .results import ResultTable, write_csv, write_svg
from .scenario_file import ScenarioConfig, parse_scenario
from .study import raise_for_failures, reproduction_study, run_study
from .transient import decode_lsk, parse_pattern, simulate
from .utils import parse_si

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of 2"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _si(text: str) -> float:
    try:
        return parse_si(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _percent(text: str) -> float:
    return _si(text.strip().rstrip("%")) / 100.0


def _pattern(text: str) -> Tuple[int, ...]:
    try:
        return parse_pattern(text)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))


def _coupling(text: str) -> Tuple[float, Optional[float]]:
    """'0.05' or a range '0.01:0.2'"""
    if ":" in text:
        low, high = text.split(":", 1)
        return _si(low), _si(high)
    return _si(text), None


def _stride(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"stride must be ≥ 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = UsageParser(add_help=False)
    group = common.add_argument_group("scenario")
    group.add_argument("--scenario", metavar="FILE", help="Scenario file")
    group.add_argument("--preset", choices=sorted(PRESETS), help="Preset supplying the defaults")
    group.add_argument("--cp", type=_si, metavar="VALUE", help="Secondary parasitic capacitance")
    cs1 = group.add_mutually_exclusive_group()
    cs1.add_argument("--cs1", type=_si, metavar="VALUE", help="Absolute primary capacitor")
    cs1.add_argument("--cs1-error", type=_percent, metavar="PCT",
                     help="Primary capacitor error in percent of its designed value")
    group.add_argument("--k", type=_coupling, metavar="VALUE|LOW:HIGH",
                       help="Coupling, or the coupling range of a sweep or search")
    output = common.add_argument_group("output")
    output.add_argument("--out", metavar="FILE", help="CSV path (stdout when omitted)")
    output.add_argument("--svg", action="store_true", help="Also write a chart next to --out")
    output.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS,
                        help="Log level (default from COIL_LINK_LOG_LEVEL, else WARNING)")
    output.add_argument("--log-file", metavar="PATH", help="Also log to this file")

    parser = UsageParser(prog="coil-link",
                         description="Series-parallel inductive link and LSK uplink analysis")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    pte = subparsers.add_parser("pte", parents=[common], help="Power transfer efficiency")
    pte.add_argument("--bare-cs2", action="store_true", help="Use C_s2 without C_p in α")
    pte.add_argument("--load", choices=[s.value for s in LoadState], default="light")

    impedance = subparsers.add_parser("impedance", parents=[common],
                                      help="Z11, Zeq, Zpri and I1 for both load states")
    impedance.add_argument("--frequency", type=_si, metavar="VALUE",
                           help="Evaluation frequency (default: drive frequency)")

    sweep = subparsers.add_parser("sweep-k", parents=[common], help="ΔZpri and ΔI1 versus k")
    sweep.add_argument("--points", type=int, help="Number of sweep points")
    sweep.add_argument("--scale", choices=[s.value for s in SweepScale])

    flip = subparsers.add_parser("flip-threshold", parents=[common],
                                 help="Coupling at which the uplink polarity flips")
    flip.add_argument("--points", type=int, help="Sampling grid size")

    detune = subparsers.add_parser("detune", parents=[common],
                                   help="Primary capacitor detune that removes the flip")
    detune.add_argument("--margin", type=_si, default=0.0, metavar="AMPS",
                        help="Required −ΔI1 over the range")

    for name, text in (("transient", "Time-domain waveforms"), ("decode", "Decoded LSK bits")):
        sub = subparsers.add_parser(name, parents=[common], help=text)
        sub.add_argument("--pattern", type=_pattern, metavar="BITS", help="SW bits, e.g. 1010")
        sub.add_argument("--bit-period", type=_si, metavar="VALUE")
        if name == "transient":
            sub.add_argument("--stride", type=_stride, default=1, help="Write every N-th sample")

    subparsers.add_parser("reproduce", parents=[common],
                          help="Write every figure and table dataset into --out DIR")
    return parser


def load_config(args: argparse.Namespace, preset: Optional[str] = None) -> ScenarioConfig:
    """Scenario file (or preset) with the command-line overrides applied"""
    if args.scenario:
        config = parse_scenario(Path(args.scenario))
        if args.preset:
            raise ValidationError("--preset and --scenario are mutually exclusive")
    else:
        name = preset or args.preset
        config = parse_scenario(f"preset = {name}\n" if name else "")

    scenario = config.scenario
    mismatch = config.mismatch
    if args.cp is not None:
        scenario = scenario.with_c_p(args.cp)
        mismatch = replace(mismatch, c_p_override=None)
    if args.cs1 is not None:
        scenario = scenario.with_c_s1(args.cs1)
        mismatch = replace(mismatch, c_s1_relative_error=None)
    if args.cs1_error is not None:
        mismatch = replace(mismatch, c_s1_relative_error=args.cs1_error)

    sweep = config.sweep
    if args.k is not None:
        low, high = args.k
        if high is None:
            scenario = scenario.with_coupling(low)
        else:
            sweep = replace(sweep, k_min=low, k_max=high)
    if getattr(args, "points", None) is not None:
        sweep = replace(sweep, points=args.points)
    if getattr(args, "scale", None) is not None:
        sweep = replace(sweep, scale=SweepScale(args.scale))

    transient = config.transient
    changes = {}
    if getattr(args, "pattern", None) is not None:
        changes["sw_pattern"] = args.pattern
    if getattr(args, "bit_period", None) is not None:
        changes["bit_period"] = args.bit_period
    if changes:
        # a fixed duration from the file may no longer cover the new pattern
        pattern_end = (transient.settle_time + changes.get("bit_period", transient.bit_period)
                       * len(changes.get("sw_pattern", transient.sw_pattern)))
        if transient.duration is not None and transient.duration < pattern_end:
            changes["duration"] = None
        transient = replace(transient, **changes)

    return ScenarioConfig(scenario, mismatch, sweep, transient, config.preset)


def _require_range(args: argparse.Namespace):
    if args.k is not None and args.k[1] is None:
        raise ValidationError(f"{args.command} needs a coupling range LOW:HIGH, got a single k")


def _require_single(args: argparse.Namespace):
    if args.k is not None and args.k[1] is not None:
        raise ValidationError(f"{args.command} takes a single coupling value, got a range")


def run_subcommand(args: argparse.Namespace) -> ResultTable:
    command = args.command
    if command == "pte":
        _require_single(args)
        names = [args.preset] if (args.preset or args.scenario) else sorted(PRESETS)
        rows = []
        for name in names:
            config = load_config(args, preset=name)
            label = name if not args.scenario else config.preset
            rows.append((label, apply_mismatch(config.scenario, config.mismatch)))
        return pte_table(rows, LoadState(args.load), args.bare_cs2)

    config = load_config(args)
    scenario = apply_mismatch(config.scenario, config.mismatch)
    k_range = (config.sweep.k_min, config.sweep.k_max)

    if command == "impedance":
        _require_single(args)
        return impedance_table(scenario, args.frequency)
    if command == "sweep-k":
        _require_range(args)
        return sweep_table(sweep_coupling(scenario, None, config.sweep))
    if command == "flip-threshold":
        _require_range(args)
        return flip_table(flip_threshold(scenario, None, k_range, config.sweep.points))
    if command == "detune":
        _require_range(args)
        return detune_table(detune_solve(scenario, None, k_range, args.margin), scenario)
    if command in ("transient", "decode"):
        _require_single(args)
        trace = simulate(scenario, config.transient)
        if command == "transient":
            return trace_table(trace, args.stride)
        return decode_table(decode_lsk(trace.envelope, config.transient), config.transient)
    raise ValidationError(f"unknown command {command!r}")


def _reproduce(args: argparse.Namespace):
    config = load_config(args)
    results = run_study(reproduction_study(args.out, args.svg, config.sweep))
    raise_for_failures(results)
    for step_id in sorted(results["completed"]):
        logger.info(f"{step_id}: done")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.svg and not args.out:
        parser.error("--svg requires --out")
    if args.command == "reproduce" and not args.out:
        parser.error("reproduce requires --out DIR")
    configure_logging(args.log_level, args.log_file)

    try:
        if args.command == "reproduce":
            _reproduce(args)
            return EXIT_OK
        table = run_subcommand(args)
        if args.out:
            write_csv(table, args.out)
            if args.svg:
                write_svg(table, Path(args.out).with_suffix(".svg"))
        else:
            sys.stdout.write(table.to_csv())
        return EXIT_OK
    except ValidationError as e:
        logger.debug("validation failure", exc_info=True)
        sys.stderr.write(f"coil-link: invalid input: {e}\n")
        return EXIT_VALIDATION
    except ComputationError as e:
        logger.debug("computation failure", exc_info=True)
        sys.stderr.write(f"coil-link: computation failed: {e}\n")
        return EXIT_COMPUTATION
    except (OSError, CoilLinkError) as e:
        sys.stderr.write(f"coil-link: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
