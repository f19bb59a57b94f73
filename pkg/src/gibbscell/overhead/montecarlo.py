"""Monte Carlo check of the macro-cell overhead model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .analytic import OverheadParams, macro_overhead
from .delaunay import delaunay

DEFAULT_MACROS_PER_WINDOW = 2000


def sample_ppp(intensity: float, window: tuple[float, float], rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson process on ``[0, w] x [0, h]``, shape ``(n, 2)``."""
    w, h = window
    n = rng.poisson(intensity * w * h) if intensity > 0 else 0
    return rng.uniform((0.0, 0.0), (w, h), size=(n, 2))


@dataclass
class MonteCarloReport:
    n_nuclei: int
    mean_neighbors: float
    cv_neighbors: float
    second_moment_neighbors: float
    mean_users: float
    second_moment_users: float
    uplink: float
    backhaul: float
    analytic_uplink: float
    analytic_bound: float
    analytic_backhaul: float
    analytic_second_moment_users: float
    uplink_per_replication: list[float] = field(default_factory=list)

    @property
    def bound_holds_fraction(self) -> float:
        reps = self.uplink_per_replication
        return sum(r <= self.analytic_bound for r in reps) / len(reps) if reps else float("nan")


def _default_window(params: OverheadParams) -> tuple[float, float]:
    side = math.sqrt(DEFAULT_MACROS_PER_WINDOW / params.lambda_m)
    return side, side


def monte_carlo_overhead(params: OverheadParams, replications: int, rng: np.random.Generator) -> MonteCarloReport:
    """Sample macro and user Poisson processes, attach users to the nearest
    macro and measure cell populations ``M`` and Delaunay degrees ``N`` of the
    nuclei lying at least ``margin`` inside the window.

    The uplink estimate is ``tau * E(M N)``; backhaul averages
    ``tau * (M_i N_i + M_j N_j)`` over Delaunay edges with both ends interior.
    """
    if replications < 1:
        raise ValueError("replications must be at least 1")
    analytic = macro_overhead(params)
    window = params.window or _default_window(params)
    margin = params.effective_margin
    w, h = window
    if 2 * margin >= min(w, h):
        raise ValueError(f"margin {margin:.4g} leaves no interior in a {w:.4g} x {h:.4g} window; "
                         "enlarge the window or reduce the margin")
    tau = params.tau
    all_n, all_m, edge_loads, per_rep = [], [], [], []
    for _ in range(replications):
        macros = sample_ppp(params.lambda_m, window, rng)
        users = sample_ppp(params.lambda_u, window, rng)
        if len(macros) < 3:
            continue
        tri = delaunay(macros)
        deg = tri.degree()
        if len(users):
            _, owner = cKDTree(macros).query(users)
            pop = np.bincount(owner, minlength=len(macros))
        else:
            pop = np.zeros(len(macros), dtype=np.int64)
        x, y = macros[:, 0], macros[:, 1]
        inner = (x >= margin) & (x <= w - margin) & (y >= margin) & (y <= h - margin)
        inner[list(tri.hull)] = False
        if not inner.any():
            continue
        all_n.append(deg[inner])
        all_m.append(pop[inner])
        per_rep.append(tau * float(np.mean(pop[inner] * deg[inner])))
        load = pop * deg
        for i, j in tri.edges:
            if inner[i] and inner[j]:
                edge_loads.append(tau * float(load[i] + load[j]))
    if not all_n:
        raise ValueError("no interior nuclei were sampled; enlarge the window, add replications "
                         "or reduce the margin")
    n = np.concatenate(all_n).astype(float)
    m = np.concatenate(all_m).astype(float)
    mean_n = float(n.mean())
    return MonteCarloReport(
        n_nuclei=len(n),
        mean_neighbors=mean_n,
        cv_neighbors=float(n.std() / mean_n),
        second_moment_neighbors=float(np.mean(n**2)),
        mean_users=float(m.mean()),
        second_moment_users=float(np.mean(m**2)),
        uplink=tau * float(np.mean(m * n)),
        backhaul=float(np.mean(edge_loads)) if edge_loads else float("nan"),
        analytic_uplink=analytic.uplink,
        analytic_bound=analytic.uplink_bound,
        analytic_backhaul=analytic.backhaul,
        analytic_second_moment_users=analytic.second_moment_users,
        uplink_per_replication=per_rep,
    )
