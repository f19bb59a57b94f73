"""Mean signalling overhead under Poisson deployments.

Macro stations form a Poisson process of intensity ``lambda_m``; users an
independent one of intensity ``lambda_u``, attached to the nearest macro.
Each user reports one path loss per Delaunay neighbour of its station at
each beacon (frequency ``tau``).  With small cells of intensity
``lambda_s`` and coverage radius ``rho`` (sparse Boolean model), users
inside a small-cell disc attach to it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

MEAN_DELAUNAY_DEGREE = 6.0
DELAUNAY_DEGREE_CV = 0.222
DELAUNAY_DEGREE_SECOND_MOMENT = 37.7742
CELL_AREA_SECOND_MOMENT = 1.280  # E(A^2) of the typical cell, unit mean area
# the cell itself plus its six Delaunay neighbours
NEIGHBORHOOD_CELLS = 7.0
SPARSITY_WARNING = 0.1


@dataclass(frozen=True)
class OverheadParams:
    lambda_m: float
    lambda_u: float
    lambda_s: float = 0.0
    rho: float = 0.0
    tau: float = 1.0
    window: tuple[float, float] | None = None
    margin: float | None = None

    def __post_init__(self):
        if min(self.lambda_m, self.lambda_u, self.lambda_s) < 0:
            raise ValueError("intensities must be non-negative")
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        coverage = self.lambda_s * math.pi * self.rho**2
        if coverage > SPARSITY_WARNING:
            warnings.warn(
                f"small-cell coverage lambda_s*pi*rho^2 = {coverage:.3g} exceeds {SPARSITY_WARNING}; "
                "the sparse Boolean approximation may not hold",
                stacklevel=2,
            )

    @property
    def users_per_macro(self) -> float:
        if self.lambda_m == 0:
            raise ValueError("macro intensity lambda_m must be positive")
        return self.lambda_u / self.lambda_m

    @property
    def effective_margin(self) -> float:
        return self.margin if self.margin is not None else 2.0 / math.sqrt(self.lambda_m)


@dataclass(frozen=True)
class OverheadReport:
    uplink: float
    uplink_bound: float
    backhaul: float
    second_moment_users: float
    second_moment_neighbors: float = DELAUNAY_DEGREE_SECOND_MOMENT
    small_cell_users: float | None = None
    macro_cell_users: float | None = None
    small_neighbors_of_macro: float | None = None
    small_neighbors_of_small: float | None = None
    uplink_macro: float | None = None
    uplink_small: float | None = None
    backhaul_macro_macro: float | None = None
    backhaul_macro_small: float | None = None


def cell_users_second_moment(users_per_cell: float) -> float:
    return users_per_cell + CELL_AREA_SECOND_MOMENT * users_per_cell**2


def macro_overhead(params: OverheadParams) -> OverheadReport:
    """Uplink estimate ``6 tau M``, its Cauchy-Schwarz bound and the
    per-Delaunay-edge backhaul ``2 * uplink``."""
    m = params.users_per_macro
    uplink = params.tau * MEAN_DELAUNAY_DEGREE * m
    em2 = cell_users_second_moment(m)
    bound = params.tau * math.sqrt(em2 * DELAUNAY_DEGREE_SECOND_MOMENT)
    return OverheadReport(uplink=uplink, uplink_bound=bound, backhaul=2.0 * uplink, second_moment_users=em2)


def hetero_overhead(params: OverheadParams) -> OverheadReport:
    base = macro_overhead(params)
    tau = params.tau
    ratio_s = params.lambda_s / params.lambda_m
    m_small = params.lambda_u * math.pi * params.rho**2
    # users outside every small-cell disc, per macro cell
    m_macro = params.users_per_macro - ratio_s * m_small
    if m_macro < 0:
        raise ValueError(
            f"mean macro-cell population {m_macro:.4g} is negative: small cells cover more than a macro cell; "
            "reduce lambda_s or rho"
        )
    n_ms = NEIGHBORHOOD_CELLS * ratio_s
    n_ss = NEIGHBORHOOD_CELLS * ratio_s
    r_m = MEAN_DELAUNAY_DEGREE * tau * m_macro + tau * n_ms * m_small
    r_s = NEIGHBORHOOD_CELLS * tau * m_macro + tau * n_ss * m_small
    return OverheadReport(
        uplink=base.uplink,
        uplink_bound=base.uplink_bound,
        backhaul=base.backhaul,
        second_moment_users=base.second_moment_users,
        small_cell_users=m_small,
        macro_cell_users=m_macro,
        small_neighbors_of_macro=n_ms,
        small_neighbors_of_small=n_ss,
        uplink_macro=r_m,
        uplink_small=r_s,
        backhaul_macro_macro=2.0 * r_m,
        backhaul_macro_small=r_m + r_s,
    )
