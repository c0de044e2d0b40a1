"""Command-line interface.

Exit codes: 0 success, 2 invalid arguments, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .base_matrix import ParameterError, design_rate_mn, design_rate_regular
from .capacity import limit_csv, region_gap
from .de import BracketError, DEConfig, bisect_threshold, sd_eps, standalone_eps, sweep_region
from .mc import run_pipeline
from .presets import PRESETS, load_graph, preset_graph, preset_rate, standalone_graph
from .relay import ChannelParams, eps_vector

EXIT_ARGS, EXIT_IO = 2, 3


class CLIError(Exception):
    def __init__(self, message, code=EXIT_ARGS):
        super().__init__(message)
        self.code = code


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` with both endpoints included (1e-12 slack)."""
    try:
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError:
        raise CLIError(f"bad grid {spec!r}, expected start:stop:step")
    if step <= 0 or not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0) or stop < start:
        raise CLIError(f"grid {spec!r} must lie in [0, 1] with step > 0")
    count = int(math.floor((stop - start) / step + 1e-12)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _de_config(args) -> DEConfig:
    try:
        return DEConfig(success_tol=args.success_tol, stall_tol=args.stall_tol, max_iter=args.max_iter)
    except ValueError as exc:
        raise CLIError(str(exc))


def _graph(args):
    """Joint graph and source rate for a preset name or a code file."""
    if args.preset in PRESETS:
        L = None if getattr(args, "uncoupled", False) else args.L
        return preset_graph(args.preset, L, literal=getattr(args, "literal", False)), preset_rate(args.preset, L)
    path = Path(args.preset)
    if path.suffix == ".json" and path.exists():
        graph, rate = load_graph(path)
        return graph, rate
    raise CLIError(f"unknown preset {args.preset!r}; available presets: {', '.join(PRESETS)}")


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc}", EXIT_IO)


def cmd_rate(args) -> None:
    L = math.inf if args.L is None else args.L
    if args.family == "regular":
        if args.g is not None:
            raise CLIError("regular codes take no g")
        rate = design_rate_regular(args.l, args.r, L)
    else:
        if args.g is None:
            raise CLIError("mn codes need g")
        rate = design_rate_mn(args.l, args.r, args.g, L)
    print(f"{rate} = {float(rate)!r}")


def cmd_threshold(args) -> None:
    cfg = _de_config(args)
    graph, _ = _graph(args)
    if args.standalone:
        if args.preset == "arja-se":
            eps_of = sd_eps(graph, 1.0)
        else:
            graph = standalone_graph(args.preset, args.L) if args.preset in PRESETS else graph
            eps_of = standalone_eps(graph)
    else:
        key, _, value = args.corner.partition("=")
        try:
            fixed = float(value)
        except ValueError:
            raise CLIError(f"bad corner {args.corner!r}, expected rd=<p> or sd=<p>")
        if key == "rd":
            eps_of = sd_eps(graph, fixed)
        elif key == "sd":
            eps_of = lambda p: eps_vector(graph, ChannelParams(eps_sd=fixed, eps_rd=p))
        else:
            raise CLIError(f"bad corner {args.corner!r}, expected rd=<p> or sd=<p>")
    try:
        res = bisect_threshold(graph, eps_of, cfg, tol=args.tol)
    except BracketError as exc:
        raise CLIError(str(exc))
    print(f"threshold {res.threshold:.9g} bracket [{res.bracket[0]:.9g}, {res.bracket[1]:.9g}] "
          f"de_runs {res.de_runs}")


def cmd_region(args) -> None:
    cfg = _de_config(args)
    graph, rate = _graph(args)
    grid = parse_grid(args.grid)
    region = sweep_region(graph, grid, cfg, args.tol, workers=args.workers)
    out = Path(args.out)
    limit_out = Path(args.limit_out) if args.limit_out else out.with_name(out.stem + "_limit" + out.suffix)
    _write(out, region.to_csv())
    if rate is not None:
        _write(limit_out, limit_csv(rate, grid))
        gap = region_gap(region, rate)
        gap_half = region_gap(region, 0.5)
        print(f"points {len(region.points)} rate {rate:.9g}")
        print(f"max slope-region gap (design rate) {gap.max:.6g}")
        print(f"max slope-region gap (rate 0.5) {gap_half.max:.6g}")
    else:
        print(f"points {len(region.points)}")


def cmd_simulate(args) -> None:
    graph, _ = _graph(args)
    try:
        params = ChannelParams(args.eps_sd, args.eps_rd, args.eps_sr)
    except ParameterError as exc:
        raise CLIError(str(exc))
    stats = run_pipeline(graph, params, q=args.q, trials=args.trials, seed=args.seed)
    text = stats.to_csv()
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if stats.trials:
        lo, hi = stats.confidence_interval(stats.dest_fail)
        rlo, rhi = stats.confidence_interval(stats.relay_fail)
        print(f"dest_fail {stats.dest_fail}/{stats.trials} = {stats.dest_fail_rate:.4g} "
              f"(95% CI {lo:.4g}..{hi:.4g})", file=sys.stderr)
        print(f"relay_fail {stats.relay_fail}/{stats.trials} = {stats.relay_fail_rate:.4g} "
              f"(95% CI {rlo:.4g}..{rhi:.4g})", file=sys.stderr)


def _add_de_options(p) -> None:
    p.add_argument("--success-tol", type=float, default=1e-10)
    p.add_argument("--stall-tol", type=float, default=1e-15)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--tol", type=float, default=1e-6, help="bisection width")


def _add_code_options(p) -> None:
    p.add_argument("preset", help=f"one of {', '.join(PRESETS)} or a code .json file")
    p.add_argument("--L", type=int, default=None, help="coupling number (uncoupled if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="screlay", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="design rate of a coupled code")
    p.add_argument("family", choices=["regular", "mn"])
    p.add_argument("l", type=int)
    p.add_argument("r", type=int)
    p.add_argument("g", type=int, nargs="?")
    p.add_argument("--L", type=int, default=None)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("threshold", help="BP threshold by bisection")
    _add_code_options(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--standalone", action="store_true", help="source code alone, one channel")
    mode.add_argument("--corner", default="rd=1", help="fixed link, e.g. rd=1 or sd=1")
    _add_de_options(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("region", help="achievable (eps_rd, eps_sd) region and limit line")
    _add_code_options(p)
    p.add_argument("--uncoupled", action="store_true")
    p.add_argument("--literal", action="store_true", help="shared-row joint graph (diagnostic)")
    p.add_argument("--grid", default="0.5:1.0:0.05")
    p.add_argument("--out", default="region.csv")
    p.add_argument("--limit-out", default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_de_options(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo peeling simulation")
    _add_code_options(p)
    p.add_argument("--q", type=int, default=512)
    p.add_argument("--eps-sd", type=float, required=True)
    p.add_argument("--eps-rd", type=float, required=True)
    p.add_argument("--eps-sr", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def _apply_config(parser, argv) -> argparse.Namespace:
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        try:
            options = json.loads(Path(pre.config).read_text())
        except OSError as exc:
            raise CLIError(f"cannot read {pre.config}: {exc}", EXIT_IO)
        except json.JSONDecodeError as exc:
            raise CLIError(f"bad config {pre.config}: {exc}")
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k.replace("-", "_"): v for k, v in options.items()
                                   if k.replace("-", "_") in known})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = _apply_config(parser, argv)
        except SystemExit as exc:  # argparse usage errors and --help
            return int(exc.code or 0)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    return 0


if __name__ == "__main__":
    sys.exit(main())
