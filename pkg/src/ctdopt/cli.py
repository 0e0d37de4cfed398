"""Command-line driver for the seeded experiments and CTD file operations.

Examples
--------
::

    ctdopt demo-convergence --seed 7 --out artifacts/convergence
    ctdopt compare --trials 100 --out artifacts/compare
    ctdopt ackley --out artifacts/ackley
    ctdopt reduce input.json --epsilon 1e-6 --norm snorm --algorithm id --out red
    ctdopt max-entry input.json --termination rank:1 --out located

A ``--config FILE`` JSON object overrides any flag of the same name.  On
success the run's summary is printed to stdout as JSON and the exit code is
0; on failure a one-line JSON error object goes to stderr and the exit code
is nonzero (2 for usage errors, 1 otherwise).
"""

import argparse
import json
import sys

from .experiments import (
    ExperimentConfig,
    max_entry_file,
    parse_termination,
    reduce_file,
    run_ackley,
    run_compare,
    run_demo_convergence,
    run_demo_two_maxima,
)
from .maxentry import MaxEntrySearchConfig, RankThreshold
from .reduction import ReductionConfig


class CommandLineError(ValueError):
    """A problem with the invocation itself, as opposed to the run."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of calling sys.exit, so usage
    errors reach the JSON error path."""

    def error(self, message):
        raise CommandLineError(message)


_EXPERIMENT_COMMANDS = ("demo-convergence", "demo-two-maxima", "compare", "ackley")
_CONFIG_KEYS = ("seed", "trials", "epsilon", "norm", "algorithm", "termination", "out", "method")


def _build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--trials", type=int, default=100,
                        help="trial count (compare only)")
    common.add_argument("--epsilon", type=float, default=None,
                        help="rank-reduction tolerance")
    common.add_argument("--norm", choices=("frobenius", "snorm"), default=None,
                        help="norm the tolerance is measured in")
    common.add_argument("--algorithm", choices=("als", "id"), default=None,
                        help="rank-reduction algorithm")
    common.add_argument("--termination", default=None, metavar="RULE",
                        help="fixed:N, lambda:DELTA, or rank:R")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="artifact output directory")
    common.add_argument("--config", default=None, metavar="FILE",
                        help="JSON file whose entries override flags")

    parser = _Parser(prog="ctdopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name in _EXPERIMENT_COMMANDS:
        sub.add_parser(name, parents=[common])
    for name in ("reduce", "max-entry"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("input", help="serialized CTD file")
        if name == "max-entry":
            p.add_argument("--method", choices=("squaring", "power"),
                           default="squaring", help="which search iteration")
    return parser


def _apply_config_file(args):
    if args.config is None:
        return
    with open(args.config) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise CommandLineError("config file must contain a JSON object")
    for key, value in doc.items():
        if key not in _CONFIG_KEYS:
            raise CommandLineError(f"unknown config key {key!r}")
        if key == "method" and args.command != "max-entry":
            raise CommandLineError("config key 'method' only applies to max-entry")
        setattr(args, key, value)


def _termination(args, default):
    if args.termination is None:
        return default
    try:
        return parse_termination(args.termination)
    except ValueError as exc:
        raise CommandLineError(str(exc)) from exc


def _dispatch(args):
    if args.command in _EXPERIMENT_COMMANDS:
        cfg = ExperimentConfig(
            experiment=args.command,
            out_dir=args.out,
            seed=args.seed,
            trials=args.trials,
            epsilon=args.epsilon,
            norm=args.norm,
            algorithm=args.algorithm,
            termination=_termination(args, None),
        )
        runner = {
            "demo-convergence": run_demo_convergence,
            "demo-two-maxima": run_demo_two_maxima,
            "compare": run_compare,
            "ackley": run_ackley,
        }[args.command]
        return runner(cfg)
    reduction = ReductionConfig(
        epsilon=args.epsilon if args.epsilon is not None else 1e-6,
        norm=args.norm if args.norm is not None else "frobenius",
        algorithm=args.algorithm if args.algorithm is not None else "id",
    )
    if args.command == "reduce":
        return reduce_file(args.input, reduction, args.out)
    search = MaxEntrySearchConfig(
        reduction=reduction,
        termination=_termination(args, RankThreshold(1)),
    )
    return max_entry_file(args.input, search, args.out, method=args.method)


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args)
        summary = _dispatch(args)
    except CommandLineError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0
