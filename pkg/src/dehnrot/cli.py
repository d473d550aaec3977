"""Command-line front end: ``dehnrot <subcommand> --map FILE [options]``.

Exit codes: 0 success / certified / consistent, 2 inconclusive, 3 violated,
64 unreadable input file, 65 invalid map spec or configuration.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .bricks import build_free_decomposition, build_transition_graph, find_closed_chain
from .certify import (EXIT_INCONCLUSIVE, boyland_verdict, certify_entropy, check_exactness,
                      test_bounded_displacement)
from .constants import compute_constants
from .errors import (ConfigError, EmptyMaskError, FixedPointSuspected, InconclusiveError,
                     PreconditionError, SpecError)
from .invariant_sets import compute_basin_mask, compute_height_profile, unbounded_components
from .mapmodel import load_map_spec
from .rotation import estimate_rotation_interval

EXIT_NOINPUT = 64
EXIT_DATAERR = 65


def _resolution(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad resolution {text!r}; use N or NXxNY")
    if len(vals) == 1:
        return vals[0], vals[0]
    if len(vals) == 2:
        return vals[0], vals[1]
    raise argparse.ArgumentTypeError(f"bad resolution {text!r}; use N or NXxNY")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dehnrot", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", required=True, help="map-spec file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--rng-seed", type=int, default=0, help="seed for all Monte-Carlo draws")
    common.add_argument("--threads", type=int, default=1, help="worker threads; never changes outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="defect bounds and derived constants")
    p.add_argument("--mode", choices=["closed_form", "grid"], default="closed_form")
    p.add_argument("--resolution", type=int, default=256)

    p = sub.add_parser("rotation", parents=[common], help="empirical vertical rotation interval")
    p.add_argument("--seeds", type=int, default=256)
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--q", type=int, default=1, help="iterate F^q + (0, p)")
    p.add_argument("--p", type=int, default=0)

    p = sub.add_parser("basins", parents=[common], help="finite-horizon half-cylinder masks")
    p.add_argument("--sign", choices=["lower", "upper"], default="lower")
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--resolution", type=_resolution, default=(256, 256))
    p.add_argument("--window", type=float, nargs=2, default=None, metavar=("YMIN", "YMAX"))
    p.add_argument("--two-sided", action="store_true")
    p.add_argument("--unbounded", action="store_true", help="keep only components reaching the far edge")

    p = sub.add_parser("bricks", parents=[common], help="free brick decomposition and closed chains")
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--m0", type=int, default=0)
    p.add_argument("--target-diameter", type=float, default=0.25)
    p.add_argument("--min-diameter", type=float, default=1e-3)
    p.add_argument("--mode", choices=["certified", "sampled"], default="certified")

    p = sub.add_parser("certify", parents=[common], help="certificate pipelines")
    p.add_argument("--goal", choices=["entropy", "bounded", "exactness", "boyland"], required=True)
    p.add_argument("--seeds", type=int, default=4096)
    p.add_argument("--iters", type=int, default=100_000)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--one-sided", action="store_true")
    return parser


def _cmd_constants(args, spec, out: Path) -> int:
    report = compute_constants(spec, args.mode, args.resolution)
    table = report.as_table()
    (out / "constants.txt").write_text(table)
    sys.stdout.write(table)
    return 0


def _cmd_rotation(args, spec, out: Path) -> int:
    est = estimate_rotation_interval(spec, args.seeds, args.iters, power=args.q, shift=args.p,
                                     workers=args.threads)
    est.write_csv(out / "rotation.csv")
    with open(out / "rotation_checkpoints.csv", "w") as fh:
        fh.write("n,min,max\n")
        for n, lo, hi in est.diagnostic:
            fh.write(f"{n},{lo!r},{hi!r}\n")
    print(est.summary())
    return 0


def _cmd_basins(args, spec, out: Path) -> int:
    window = tuple(args.window) if args.window else ((-2.0, 0.5) if args.sign == "lower" else (-0.5, 2.0))
    mask = compute_basin_mask(spec, args.sign, args.horizon, window, args.resolution,
                              args.two_sided, workers=args.threads)
    if args.unbounded:
        mask = unbounded_components(mask)
    mask.write_pgm(out / f"basin_{args.sign}.pgm")
    consts = compute_constants(spec)
    try:
        prof = compute_height_profile(mask, consts.M_f)
    except EmptyMaskError:
        print(f"{args.sign} mask empty at horizon {args.horizon}")
        return 0
    prof.write_csv(out / f"height_{args.sign}.csv")
    print(f"{args.sign} oscillation {prof.oscillation:.12g} bound {consts.M_f:.12g} "
          f"within {'yes' if prof.within_bound else 'no'}")
    return 0


def _cmd_bricks(args, spec, out: Path) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FixedPointSuspected)
        dec = build_free_decomposition(spec, args.n0, args.m0, args.target_diameter, args.min_diameter)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    graph = build_transition_graph(dec, args.mode)
    dec.write_csv(out / "bricks.csv")
    graph.write_csv(out / "edges.csv")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cert = find_closed_chain(graph)
        except InconclusiveError as exc:
            print(f"bricks {len(dec)} chain inconclusive: {exc}")
            return EXIT_INCONCLUSIVE
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if cert is not None:
        (out / "chain.txt").write_text(cert.as_text())
    kc = "none" if graph.k_crit_estimate is None else graph.k_crit_estimate
    print(f"bricks {len(dec)} free {'yes' if dec.all_certified_free else 'no'} "
          f"k_crit {kc} chain {'found' if cert else 'none'}")
    return 0


def _cmd_certify(args, spec, out: Path) -> int:
    if args.goal == "entropy":
        cert = certify_entropy(spec, args.seeds, args.iters, args.threads)
    elif args.goal == "bounded":
        cert = test_bounded_displacement(spec, args.p, args.q, args.seeds, args.iters,
                                         one_sided=args.one_sided, workers=args.threads)
    elif args.goal == "exactness":
        cert = check_exactness(spec, args.b, args.samples, args.rng_seed)
    else:
        cert = boyland_verdict(spec, args.seeds, args.iters, workers=args.threads)
    cert.write(out / f"certificate_{args.goal}.txt")
    print(f"{cert.kind} exit {cert.exit_code}")
    return cert.exit_code


COMMANDS = {
    "constants": _cmd_constants,
    "rotation": _cmd_rotation,
    "basins": _cmd_basins,
    "bricks": _cmd_bricks,
    "certify": _cmd_certify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_map_spec(args.map)
    except OSError as exc:
        print(f"error: cannot read {args.map}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except SpecError as exc:
        print(f"error: {args.map}: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, spec, out)
    except (SpecError, ConfigError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATAERR


if __name__ == "__main__":
    sys.exit(main())
