"""Command line entry point: ``gibbscell {compare,trace,overhead,scene}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .baseline import default_configuration
from .metrics import records_to_csv, snapshot, to_json
from .netmodel import Orthogonality
from .overhead import OverheadParams
from .sampler import GIBBS, GREEDY, TRACE_COLUMNS, SamplerConfig
from .topology import DEFAULT_THETA_W, TopologyConfig, generate_scene, load_scene, save_scene

log = logging.getLogger("gibbscell")


def _scene_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=32, help="number of users M")
    p.add_argument("--channels", type=int, default=1, help="number of channels K")
    p.add_argument("--small-cells", type=int, default=30)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA_W, help="pilot threshold in watts")
    p.add_argument("--shadowing", type=float, default=4.0, help="shadowing std dev in dB")
    p.add_argument("--alpha-adjacent", type=float, default=0.0, help="orthogonality factor across channels")


def _sampler_args(p: argparse.ArgumentParser, ticks: int) -> None:
    p.add_argument("--mode", choices=(GIBBS, GREEDY, ex.BASELINE), default=GIBBS)
    p.add_argument("--ticks", type=int, default=ticks)
    p.add_argument("--finish-ticks", type=int, default=100, help="greedy ticks after a gibbs phase")
    p.add_argument("--temperature", type=float, default=0.02)
    p.add_argument("--anneal", action="store_true", help="use T = 1/ln(1 + t + 1)")


def _topology(args) -> TopologyConfig:
    return TopologyConfig(
        n_users=args.users,
        n_channels=args.channels,
        n_small=args.small_cells,
        theta=args.theta,
        shadowing_sigma=args.shadowing,
        orthogonality=Orthogonality(adjacent=args.alpha_adjacent),
    )


def _experiment(args) -> ex.ExperimentConfig:
    mode = GIBBS if args.mode == ex.BASELINE else args.mode
    sampler = SamplerConfig(mode=mode, temperature=args.temperature, anneal=args.anneal, max_ticks=args.ticks)
    return ex.ExperimentConfig(
        topology=_topology(args),
        sampler=sampler,
        finish_ticks=args.finish_ticks,
        replications=getattr(args, "replications", 1),
        seed=args.seed,
        optimize=args.mode != ex.BASELINE,
        workers=getattr(args, "workers", 1),
    )


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_compare(args) -> int:
    summary = ex.run_comparison(_experiment(args))
    if args.out:
        _emit(records_to_csv(summary.rows, ex.COMPARISON_COLUMNS), args.out + ".csv")
        _emit(to_json(summary.as_dict()), args.out + ".json")
    m = summary.means
    print(f"{'':<26}{'default':>12}{'optimized':>12}{'gain':>10}")
    print(f"{'mean user throughput':<26}{m['default_mean_user_throughput']:>12.4f}"
          f"{m['optimized_mean_user_throughput']:>12.4f}{summary.throughput_gain:>10.2f}")
    print(f"{'power efficiency':<26}{m['default_power_efficiency']:>12.4f}"
          f"{m['optimized_power_efficiency']:>12.4f}{summary.efficiency_gain:>10.1f}")
    print(f"{'global energy':<26}{m['default_global_energy']:>12.4f}{m['optimized_global_energy']:>12.4f}")
    return 0


def cmd_trace(args) -> int:
    rows = ex.run_trace(_experiment(args))
    _emit(records_to_csv([r._asdict() for r in rows], TRACE_COLUMNS), args.out)
    return 0


def cmd_overhead(args) -> int:
    params = OverheadParams(
        lambda_m=args.lambda_m, lambda_u=args.lambda_u, lambda_s=args.lambda_s, rho=args.rho, tau=args.tau
    )
    report = ex.run_overhead(params, empirical=args.empirical, replications=args.replications, seed=args.seed)
    if args.out:
        _emit(to_json(report), args.out)
    print(ex.overhead_table(report))
    return 0


def cmd_scene(args) -> int:
    if args.action == "dump":
        scene = generate_scene(_topology(args), ex.replication_rngs(args.seed, 0)[0])
        if not args.out:
            raise ValueError("scene dump needs --out")
        save_scene(scene, args.out)
        return 0
    if not args.path:
        raise ValueError("scene load needs a path")
    scene = load_scene(args.path)
    rec = snapshot(default_configuration(scene), scene)
    print(f"{scene.n_bs} stations, {scene.n_users} users, {scene.n_channels} channels")
    print(to_json({"default": rec.as_dict()}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbscell", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="default operation vs optimised, averaged over topologies")
    _scene_args(p)
    _sampler_args(p, ticks=300)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output prefix for .csv rows and .json summary")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trace", help="per-tick convergence trace of one scene (CSV)")
    _scene_args(p)
    _sampler_args(p, ticks=1000)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("overhead", help="signalling overhead: analytic and Monte Carlo")
    p.add_argument("--lambda-m", type=float, default=1.0, help="macro intensity")
    p.add_argument("--lambda-u", type=float, default=10.0, help="user intensity")
    p.add_argument("--lambda-s", type=float, default=0.0, help="small-cell intensity")
    p.add_argument("--rho", type=float, default=0.0, help="small-cell radius")
    p.add_argument("--tau", type=float, default=1.0, help="beacon frequency")
    p.add_argument("--empirical", action="store_true", help="add the Monte Carlo estimate")
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_overhead)

    p = sub.add_parser("scene", help="dump a generated scene to JSON or load one")
    p.add_argument("action", choices=("dump", "load"))
    p.add_argument("path", nargs="?", help="scene file to load")
    _scene_args(p)
    p.add_argument("--out", help="scene file to write")
    p.set_defaults(func=cmd_scene)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"gibbscell: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
