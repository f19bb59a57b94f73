"""Experiment drivers behind the command line: baseline-vs-optimised
comparisons over random topologies, convergence traces and overhead reports."""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baseline import default_configuration
from .metrics import METRIC_COLUMNS, snapshot
from .netmodel import NetworkScene, NetworkState
from .overhead import OverheadParams, hetero_overhead, macro_overhead, monte_carlo_overhead
from .sampler import GREEDY, RunResult, SamplerConfig, TraceRow, run, trace_row
from .topology import TopologyConfig, generate_scene

BASELINE = "baseline"


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    finish_ticks: int = 100  # greedy descent after the sampler phase; 0 disables
    replications: int = 1
    seed: int = 0
    optimize: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.finish_ticks < 0:
            raise ValueError("finish_ticks must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def replication_rngs(seed: int, i: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (scene, sampler) generators for replication ``i``; they
    depend only on ``(seed, i)``."""
    scene_ss, sampler_ss = np.random.SeedSequence([seed, i]).spawn(2)
    return np.random.default_rng(scene_ss), np.random.default_rng(sampler_ss)


def optimize(scene: NetworkScene, init: NetworkState, cfg: ExperimentConfig, rng: np.random.Generator) -> list[RunResult]:
    """Sampler phase followed by the optional greedy finish, sharing ``rng``."""
    phases = [run(scene, init, cfg.sampler, rng)]
    if cfg.finish_ticks and cfg.sampler.mode != GREEDY:
        finish = dataclasses.replace(cfg.sampler, mode=GREEDY, anneal=False, max_ticks=cfg.finish_ticks)
        phases.append(run(scene, phases[-1].state, finish, rng))
    return phases


def _replicate(args) -> dict:
    cfg, i = args
    scene_rng, sampler_rng = replication_rngs(cfg.seed, i)
    scene = generate_scene(cfg.topology, scene_rng)
    init = default_configuration(scene)
    before = snapshot(init, scene)
    if cfg.optimize:
        quiet = dataclasses.replace(cfg, sampler=dataclasses.replace(cfg.sampler, trace_every=0, record_transitions=False))
        final = optimize(scene, init, quiet, sampler_rng)[-1].state
    else:
        final = init
    after = snapshot(final, scene)
    row = {"replication": i}
    row.update({f"default_{k}": v for k, v in before.as_dict().items()})
    row.update({f"optimized_{k}": v for k, v in after.as_dict().items()})
    return row


COMPARISON_COLUMNS = (
    ("replication",)
    + tuple(f"default_{k}" for k in METRIC_COLUMNS)
    + tuple(f"optimized_{k}" for k in METRIC_COLUMNS)
)


@dataclass
class ComparisonSummary:
    rows: list[dict]
    means: dict
    throughput_gain: float
    efficiency_gain: float

    def as_dict(self) -> dict:
        return {
            "replications": len(self.rows),
            "means": self.means,
            "throughput_gain": self.throughput_gain,
            "efficiency_gain": self.efficiency_gain,
        }


def run_comparison(cfg: ExperimentConfig) -> ComparisonSummary:
    """Default operation vs. optimised state over ``cfg.replications`` random
    topologies.  Gains are ratios of the replication means."""
    jobs = [(cfg, i) for i in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_replicate, jobs))
    else:
        rows = [_replicate(j) for j in jobs]
    rows.sort(key=lambda r: r["replication"])
    means = {k: float(np.mean([r[k] for r in rows])) for k in COMPARISON_COLUMNS if k != "replication"}
    return ComparisonSummary(
        rows=rows,
        means=means,
        throughput_gain=means["optimized_mean_user_throughput"] / means["default_mean_user_throughput"],
        efficiency_gain=means["optimized_power_efficiency"] / means["default_power_efficiency"],
    )


def run_trace(cfg: ExperimentConfig, replication: int = 0) -> list[TraceRow]:
    """Per-tick (energy, potential delay, throughput) of one scene, starting
    from the default configuration.  Greedy finishing ticks continue the
    tick count."""
    scene_rng, sampler_rng = replication_rngs(cfg.seed, replication)
    scene = generate_scene(cfg.topology, scene_rng)
    init = default_configuration(scene)
    if not cfg.optimize:
        return [trace_row(0, init, scene)]
    traced = dataclasses.replace(cfg, sampler=dataclasses.replace(cfg.sampler, trace_every=1, record_transitions=False))
    phases = optimize(scene, init, traced, sampler_rng)
    rows = list(phases[0].trace)
    offset = rows[-1].tick
    for ph in phases[1:]:
        rows.extend(r._replace(tick=r.tick + offset) for r in ph.trace[1:])
        offset = rows[-1].tick
    return rows


def run_overhead(params: OverheadParams, empirical: bool = False, replications: int = 20, seed: int = 0) -> dict:
    """Analytic overhead (macro, plus heterogeneous when small cells are
    present) and optionally the Monte Carlo estimate."""
    out: dict = {"params": dataclasses.asdict(params), "macro": dataclasses.asdict(macro_overhead(params))}
    if params.lambda_s > 0:
        out["hetero"] = dataclasses.asdict(hetero_overhead(params))
    if empirical:
        rep = monte_carlo_overhead(params, replications, np.random.default_rng(seed))
        d = dataclasses.asdict(rep)
        d["bound_holds_fraction"] = rep.bound_holds_fraction
        out["empirical"] = d
    return out


def overhead_table(report: dict) -> str:
    """Plain-text comparison of analytic, empirical and bound values."""
    mac = report["macro"]
    emp = report.get("empirical")
    lines = [f"{'quantity':<28}{'analytic':>14}{'empirical':>14}{'bound':>14}"]

    def row(name, analytic, empirical=None, bound=None):
        fmt = lambda v: f"{v:>14.4f}" if v is not None else f"{'-':>14}"  # noqa: E731
        lines.append(f"{name:<28}{fmt(analytic)}{fmt(empirical)}{fmt(bound)}")

    row("uplink R", mac["uplink"], emp and emp["uplink"], mac["uplink_bound"])
    row("backhaul B per edge", mac["backhaul"], emp and emp["backhaul"])
    row("E(M^2)", mac["second_moment_users"], emp and emp["second_moment_users"])
    row("E(N^2)", mac["second_moment_neighbors"], emp and emp["second_moment_neighbors"])
    if emp:
        row("E(N)", 6.0, emp["mean_neighbors"])
        row("CV(N)", 0.222, emp["cv_neighbors"])
        row("E(M)", report["params"]["lambda_u"] / report["params"]["lambda_m"], emp["mean_users"])
        lines.append(f"interior nuclei: {emp['n_nuclei']}, bound held in "
                     f"{100 * emp['bound_holds_fraction']:.1f}% of replications")
    het = report.get("hetero")
    if het:
        lines.append("")
        lines.append("heterogeneous (macro + small cells)")
        for key in ("small_cell_users", "macro_cell_users", "small_neighbors_of_macro", "small_neighbors_of_small",
                    "uplink_macro", "uplink_small", "backhaul_macro_macro", "backhaul_macro_small"):
            row(key, het[key])
    return "\n".join(lines)
