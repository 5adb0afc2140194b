"""Command-line entry point: ``isosections <command> [options]``.

Exit status: 0 when every check passes, 1 when a check fails, 2 for usage
or configuration errors.
"""

import argparse
import sys

from .bodies import DegenerateBodyError
from .experiments import COMMANDS, ExperimentConfig, run
from .integral_geometry import DEFAULT_POLE_RESOLUTION
from .quadrature import DEFAULT_RESOLUTION, DimensionError
from .specs import SpecError
from .symmetry import NonOrthogonalError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _tolerance(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def build_parser():
    p = argparse.ArgumentParser(
        prog="isosections",
        description="Numerical experiments on isotropic sections and "
                    "ball rigidity.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--dim", type=int, default=3, help="ambient dimension n")
        s.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION,
                       help="sphere/equator grid resolution")
        s.add_argument("--pole-resolution", type=int,
                       default=DEFAULT_POLE_RESOLUTION,
                       help="resolution of pole quadratures (theorem-chain)")
        s.add_argument("--poles", type=int, default=None,
                       help="number of sampled poles")
        s.add_argument("--samples", type=int, default=200_000,
                       help="Monte Carlo samples")
        s.add_argument("--trials", type=int, default=10,
                       help="random inputs per identity check (busemann)")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--body", default=None,
                       help="body name, inline JSON object, or JSON file")
        s.add_argument("--group", default=None,
                       help="group name, inline JSON object, or JSON file")
        s.add_argument("--tolerance", type=_tolerance, action="append",
                       default=[], metavar="NAME=VALUE",
                       help="override a named tolerance (repeatable)")
        s.add_argument("--out", default=None, help="write the JSON report here")
        s.add_argument("--csv", default=None,
                       help="directory for CSV extracts of per-pole tables")
        s.add_argument("--quiet", action="store_true",
                       help="suppress the per-check summary")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        config = ExperimentConfig(
            command=args.command, dimension=args.dim, resolution=args.resolution,
            pole_resolution=args.pole_resolution, poles=args.poles,
            samples=args.samples, seed=args.seed, trials=args.trials,
            tolerances=dict(args.tolerance), body=args.body, group=args.group,
            out=args.out, csv=args.csv)
        report = run(config)
    except (SpecError, DimensionError, NonOrthogonalError,
            DegenerateBodyError) as exc:
        print(f"isosections {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        report.write(args.out)
    else:
        print(report.to_json())
    if args.csv:
        report.write_csv(args.csv)
    if not args.quiet:
        for c in report.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
