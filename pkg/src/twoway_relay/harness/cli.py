"""Command-line entry point.

Exit codes: 0 success, 1 invariant failure, 2 configuration error,
3 too many degenerate draws or solver failures.
"""
import argparse
import dataclasses
import logging
import sys

from ..channel import ScenarioConfig, load_config
from ..exceptions import ConfigError
from ..region import MI, MP
from .experiments import rate_region, sumrate_sweep, write_region_csv, write_sumrate_csv
from .montecarlo import ResampleRateError
from .validate import run_validation

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

REGION_DEFAULTS = dict(num_sources_total=4, antennas=8, source_powers_db=10.0, relay_power_db=10.0,
                       correlation=0.0, seed=0, trials=2000)
SUMRATE_DEFAULTS = dict(num_sources_total=8, antennas=8, source_powers_db=10.0, relay_power_db=10.0,
                        correlation=0.0, seed=0, trials=2000)
SCHEMES = {"mi": (MI,), "mp": (MP,), "both": (MI, MP)}


def _int_list(key):
    def parse(text):
        try:
            return tuple(int(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"{key}: expected comma-separated integers") from None
    return parse


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="twoway-relay", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value scenario file")
        p.add_argument("--out", help="CSV destination (stdout if omitted)")
        p.add_argument("--seed", type=int, help="overrides the configured seed")
        p.add_argument("--trials", type=int, help="overrides the configured trial count")
        p.add_argument("--workers", type=int, default=1, help="threads running trials")

    rr = sub.add_parser("rate-region", help="two-pair rate-region boundaries of MI and MP")
    common(rr)
    rr.add_argument("--scheme", choices=sorted(SCHEMES), default="both")
    rr.add_argument("--points", type=int, default=9, help="sweep points per scheme")
    rr.add_argument("--mi-sweep", choices=("ray", "beta"), default="ray",
                    help="MI traced along SINR rays or by splitting gains between pairs")

    sr = sub.add_parser("sumrate", help="grouped MI sum-rate versus SNR")
    common(sr)
    sr.add_argument("--groups", type=_int_list("groups"), help="comma list of subgroup counts N")
    sr.add_argument("--snr-db", type=_float_list, help="comma list of SNR points in dB")

    va = sub.add_parser("validate", help="randomized invariant self-test")
    va.add_argument("--seed", type=int, default=0)
    va.add_argument("--instances", type=int, default=100)
    va.add_argument("--sizes", default="2x4,4x4,2x8,4x8", help="comma list of KxM")
    return parser


def _config(args, defaults):
    config = load_config(args.config) if args.config else ScenarioConfig(**defaults)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    return dataclasses.replace(config, **overrides) if overrides else config


def _emit(writer, items, out):
    if out:
        with open(out, "w", newline="") as fh:
            writer(items, fh)
    else:
        writer(items, sys.stdout)


def _parse_sizes(text):
    try:
        sizes = tuple(tuple(int(v) for v in part.lower().split("x")) for part in text.split(","))
    except ValueError:
        raise ConfigError("sizes", f"expected KxM entries, got {text!r}") from None
    for K, M in sizes:
        if K < 2 or K % 2 or M < K - 1:
            raise ConfigError("sizes", f"invalid size {K}x{M}")
    return sizes


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "validate":
            report = run_validation(seed=args.seed, instances=args.instances, sizes=_parse_sizes(args.sizes))
            print("\n".join(report.lines()))
            return EXIT_OK if report.passed else EXIT_INVARIANT
        if args.command == "rate-region":
            config = _config(args, REGION_DEFAULTS)
            points = rate_region(config, num_points=args.points, schemes=SCHEMES[args.scheme],
                                 mi_sweep=args.mi_sweep, workers=args.workers)
            _emit(write_region_csv, points, args.out)
        else:
            config = _config(args, SUMRATE_DEFAULTS)
            rows, _ = sumrate_sweep(config, snr_grid_db=args.snr_db, groups=args.groups, workers=args.workers)
            _emit(write_sumrate_csv, rows, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResampleRateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
