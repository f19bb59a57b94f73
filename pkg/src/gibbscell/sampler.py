"""Timer-driven Gibbs sampler over per-user (station, channel, power) states.

Each user carries a geometric timer.  Every tick, users whose timer has
expired (processed in ascending id) draw a new state from the conditional
law proportional to ``exp(-local_energy / T)``, or take the best response in
greedy mode, then draw a fresh timer.  ``T`` is either fixed or follows the
logarithmic cooling ``1 / ln(1 + t + t0)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .netmodel import (
    NetworkScene,
    NetworkState,
    UserState,
    global_energy,
    local_energy_coefficients,
    potential_delay_from_rates,
    rates,
    validate_state,
)

GIBBS = "gibbs"
GREEDY = "greedy"

# cache a user's conditional law when its neighbours' joint state space is this small
_CACHE_LIMIT = 4096


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Candidates:
    """Ordered candidate states of one user: by station, then channel, then
    ascending power.  Each contiguous block shares a (station, channel) pair,
    ``pair_index`` maps a candidate to its pair."""

    bs: np.ndarray
    ch: np.ndarray
    pw: np.ndarray
    pair_bs: np.ndarray
    pair_ch: np.ndarray
    pair_index: np.ndarray

    def __len__(self) -> int:
        return len(self.pw)

    def state(self, i: int) -> UserState:
        return UserState(int(self.bs[i]), int(self.ch[i]), float(self.pw[i]))

    def index_of(self, s: UserState) -> int:
        hit = np.flatnonzero((self.bs == s.bs) & (self.ch == s.channel) & np.isclose(self.pw, s.power, rtol=1e-12, atol=0))
        if len(hit) == 0:
            raise ValueError(f"{s} is not a candidate state")
        return int(hit[0])


def candidate_states(u: int, scene: NetworkScene) -> Candidates:
    bs, ch, pw, pidx, pair_bs, pair_ch = [], [], [], [], [], []
    for b in sorted(scene.users[u].candidate_bs):
        levels = scene.power_levels(b)
        for c in scene.channels:
            pidx.append(np.full(len(levels), len(pair_bs)))
            pair_bs.append(b)
            pair_ch.append(c)
            bs.append(np.full(len(levels), b))
            ch.append(np.full(len(levels), c))
            pw.append(levels)
    cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dtype=dt)  # noqa: E731
    return Candidates(
        bs=cat(bs, np.int64),
        ch=cat(ch, np.int64),
        pw=cat(pw, float),
        pair_bs=np.array(pair_bs, dtype=np.int64),
        pair_ch=np.array(pair_ch, dtype=np.int64),
        pair_index=cat(pidx, np.int64),
    )


def candidate_energies(u: int, state: NetworkState, scene: NetworkScene, cands: Candidates) -> np.ndarray:
    """Local energy of ``u`` for every candidate, neighbours held fixed."""
    x, w = local_energy_coefficients(u, state, scene, cands.pair_bs, cands.pair_ch)
    return x[cands.pair_index] / cands.pw + w[cands.pair_index] * cands.pw


class _LocalTerms:
    """Static gain tables for evaluating one user's candidate energies
    repeatedly; only the neighbours' current states vary between calls."""

    def __init__(self, u: int, scene: NetworkScene, cands: Candidates):
        g = scene.gain
        self.orth = scene.orthogonality
        self.nb = np.array(scene.users[u].neighbors, dtype=np.int64)
        self.pair_bs, self.pair_ch = cands.pair_bs, cands.pair_ch
        self.pair_index, self.pw = cands.pair_index, cands.pw
        self.own = g[cands.pair_bs, u, cands.pair_ch]
        self.noise = scene.noise[u, cands.pair_ch]
        self.rx = g[:, u, :]
        self.leak = g[cands.pair_bs[:, None], self.nb[None, :], cands.pair_ch[:, None]]
        self.gain = g

    def energies(self, state: NetworkState) -> np.ndarray:
        nb = self.nb
        if len(nb) == 0:
            x, w = self.noise / self.own, np.zeros(len(self.own))
        else:
            bv, cv, pv = state.bs[nb], state.channel[nb], state.power[nb]
            # symmetric factor: same matrix for received and inflicted interference
            alpha = self.orth(self.pair_bs[:, None], bv[None, :], self.pair_ch[:, None], cv[None, :])
            x = (self.noise + alpha @ (pv * self.rx[bv, cv])) / self.own
            w = (alpha * self.leak) @ (1.0 / (pv * self.gain[bv, nb, cv]))
        return x[self.pair_index] / self.pw + w[self.pair_index] * self.pw


def gibbs_probabilities(energies: np.ndarray, temperature: float) -> np.ndarray:
    """Softmax of ``-energies / temperature``, shifted by the minimum."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    e = np.asarray(energies, dtype=float)
    finite = np.isfinite(e)
    if not finite.any():
        return np.full(len(e), 1.0 / len(e))
    z = np.where(finite, np.exp(-(e - e[finite].min()) / temperature), 0.0)
    return z / z.sum()


def transition_distribution(
    u: int, state: NetworkState, scene: NetworkScene, temperature: float, cands: Candidates | None = None
) -> np.ndarray:
    """Conditional law of user ``u``'s next state over :func:`candidate_states`."""
    if cands is None:
        cands = candidate_states(u, scene)
    return gibbs_probabilities(candidate_energies(u, state, scene, cands), temperature)


@dataclass(frozen=True)
class SamplerConfig:
    mode: str = GIBBS
    temperature: float = 0.02
    anneal: bool = False
    anneal_offset: float = 1.0
    tick: float = 1.0
    timer_mean: float = 1.0
    max_ticks: int = 300
    rng_seed: int | None = None
    trace_every: int = 1
    record_transitions: bool = True

    def __post_init__(self):
        if self.mode not in (GIBBS, GREEDY):
            raise ValueError(f"mode must be {GIBBS!r} or {GREEDY!r}, got {self.mode!r}")
        if not self.anneal and self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.anneal and self.anneal_offset <= 0:
            raise ValueError("annealing offset must be positive")
        if self.tick <= 0 or self.timer_mean < 0:
            raise ValueError("tick must be positive and timer mean non-negative")
        if self.max_ticks < 0:
            raise ValueError("max_ticks must be non-negative")

    def temperature_at(self, t: float) -> float:
        if self.anneal:
            return 1.0 / math.log(1.0 + t + self.anneal_offset)
        return self.temperature


class Transition(NamedTuple):
    tick: int
    user: int
    old: UserState
    new: UserState
    evaluated: int


@dataclass(eq=False)
class TransitionLog:
    """One record per timer expiry, stored as candidate indices."""

    initial: NetworkState
    candidates: tuple[Candidates, ...]
    ticks: list = field(default_factory=list)
    users: list = field(default_factory=list)
    old: list = field(default_factory=list)
    new: list = field(default_factory=list)
    evaluated: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.users)

    def append(self, tick: int, u: int, old: int, new: int, evaluated: int) -> None:
        self.ticks.append(tick)
        self.users.append(u)
        self.old.append(old)
        self.new.append(new)
        self.evaluated.append(evaluated)

    def __iter__(self) -> Iterator[Transition]:
        for k in range(len(self)):
            c = self.candidates[self.users[k]]
            yield Transition(self.ticks[k], self.users[k], c.state(self.old[k]), c.state(self.new[k]), self.evaluated[k])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionLog):
            return NotImplemented
        return (self.initial == other.initial and self.ticks == other.ticks and self.users == other.users
                and self.old == other.old and self.new == other.new and self.evaluated == other.evaluated)

    def joint_indices(self) -> Iterator[tuple[int, ...]]:
        """Joint candidate-index tuple after each transition."""
        cur = [c.index_of(s) for c, s in zip(self.candidates, self.initial)]
        for u, i in zip(self.users, self.new):
            cur[u] = i
            yield tuple(cur)


class TraceRow(NamedTuple):
    tick: int
    energy: float
    potential_delay: float
    throughput: float


TRACE_COLUMNS = TraceRow._fields


def trace_row(tick: int, state: NetworkState, scene: NetworkScene) -> TraceRow:
    r = rates(state, scene)
    return TraceRow(tick, global_energy(state, scene), potential_delay_from_rates(r), float(r.sum()))


@dataclass(eq=False)
class RunResult:
    state: NetworkState
    log: TransitionLog
    trace: list[TraceRow]


class _Draws:
    """Block-buffered uniforms and geometric timers from one generator."""

    def __init__(self, rng: np.random.Generator, timer_mean: float, block: int = 4096):
        self.rng = rng
        self.p = 1.0 / (1.0 + timer_mean)
        self.block = block
        self._u: list = []
        self._g: list = []

    def uniform(self) -> float:
        if not self._u:
            self._u = self.rng.random(self.block).tolist()[::-1]
        return self._u.pop()

    def timer(self) -> int:
        if not self._g:
            # numpy's geometric has support {1, 2, ...}
            self._g = (self.rng.geometric(self.p, self.block) - 1).tolist()[::-1]
        return self._g.pop()


def run(scene: NetworkScene, init: NetworkState, cfg: SamplerConfig, rng: np.random.Generator | None = None) -> RunResult:
    validate_state(init, scene)
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    draws = _Draws(rng, cfg.timer_mean)
    n = scene.n_users
    state = init.copy()
    cands = tuple(candidate_states(u, scene) for u in range(n))
    terms = [_LocalTerms(u, scene, cands[u]) for u in range(n)]
    cur = [cands[u].index_of(state[u]) for u in range(n)]
    nbrs = [scene.users[u].neighbors for u in range(n)]
    cacheable = [math.prod(len(cands[v]) for v in nbrs[u]) <= _CACHE_LIMIT for u in range(n)]
    energy_cache: dict = {}
    choice_cache: dict = {}
    greedy = cfg.mode == GREEDY
    log = TransitionLog(initial=init.copy(), candidates=cands)
    trace = [trace_row(0, state, scene)] if cfg.trace_every else []
    timers = [draws.timer() * cfg.tick for _ in range(n)]

    for k in range(cfg.max_ticks):
        temperature = cfg.temperature_at(k * cfg.tick)
        for u in range(n):
            if timers[u] > 0:
                timers[u] -= cfg.tick
                continue
            c = cands[u]
            key = (u, tuple(cur[v] for v in nbrs[u])) if cacheable[u] else None
            if greedy:
                new = choice_cache.get(key) if key is not None else None
                if new is None:
                    new = int(np.argmin(terms[u].energies(state)))
                    if key is not None:
                        choice_cache[key] = new
            else:
                cdf = choice_cache.get(key) if key is not None and not cfg.anneal else None
                if cdf is None:
                    e = energy_cache.get(key) if key is not None else None
                    if e is None:
                        e = terms[u].energies(state)
                        if key is not None:
                            energy_cache[key] = e
                    cdf = np.cumsum(gibbs_probabilities(e, temperature))
                    if key is not None and not cfg.anneal:
                        choice_cache[key] = cdf
                new = min(int(cdf.searchsorted(draws.uniform() * cdf[-1], side="right")), len(cdf) - 1)
            if cfg.record_transitions:
                log.append(k, u, cur[u], new, len(c))
            cur[u] = new
            state.bs[u], state.channel[u], state.power[u] = c.bs[new], c.ch[new], c.pw[new]
            timers[u] = draws.timer() * cfg.tick
        if cfg.trace_every and (k + 1) % cfg.trace_every == 0:
            trace.append(trace_row(k + 1, state, scene))
    return RunResult(state, log, trace)


@dataclass(eq=False)
class Enumeration:
    """Exhaustive view of the joint state space.

    Row ``k`` of ``indices`` gives each user's candidate index; rows follow
    C order (last user varies fastest).
    """

    candidates: tuple[Candidates, ...]
    indices: np.ndarray
    energies: np.ndarray
    probabilities: np.ndarray
    temperature: float

    @property
    def min_energy(self) -> float:
        return float(self.energies.min())

    @property
    def argmin_rows(self) -> np.ndarray:
        e = self.energies
        return np.flatnonzero(e <= e.min() * (1 + 1e-12))

    def state(self, row: int) -> NetworkState:
        return NetworkState.from_users(c.state(i) for c, i in zip(self.candidates, self.indices[row]))

    def minimizers(self) -> list[NetworkState]:
        return [self.state(r) for r in self.argmin_rows]

    def row_of(self, joint: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(joint, [len(c) for c in self.candidates]))


def _batch_energy(scene: NetworkScene, bs: np.ndarray, ch: np.ndarray, pw: np.ndarray) -> np.ndarray:
    n = bs.shape[1]
    users = np.arange(n)
    signal = pw * scene.gain[bs, users[None, :], ch]
    cross = scene.gain[bs[:, None, :], users[None, :, None], ch[:, None, :]]
    alpha = np.asarray(scene.orthogonality(bs[:, :, None], bs[:, None, :], ch[:, :, None], ch[:, None, :]))
    contrib = alpha * cross * pw[:, None, :]
    contrib[:, users, users] = 0.0
    noise = scene.noise[users[None, :], ch]
    return np.sum((noise + contrib.sum(axis=2)) / signal, axis=1)


def enumerate_optimum(scene: NetworkScene, temperature: float = 1.0, max_states: int = 10**6) -> Enumeration:
    """Global energy of every joint state, its argmin set and the exact
    Gibbs law at ``temperature``."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    cands = tuple(candidate_states(u, scene) for u in range(scene.n_users))
    sizes = [len(c) for c in cands]
    total = math.prod(sizes)
    if total > max_states:
        raise StateSpaceTooLarge(f"joint state space has {total} configurations (sizes {sizes}), limit {max_states}")
    if scene.n_users == 0:
        return Enumeration(cands, np.zeros((1, 0), dtype=np.int64), np.zeros(1), np.ones(1), temperature)
    indices = np.indices(sizes).reshape(len(sizes), -1).T
    energies = np.empty(total)
    for start in range(0, total, 20000):
        rows = indices[start:start + 20000]
        bs = np.stack([cands[u].bs[rows[:, u]] for u in range(len(cands))], axis=1)
        ch = np.stack([cands[u].ch[rows[:, u]] for u in range(len(cands))], axis=1)
        pw = np.stack([cands[u].pw[rows[:, u]] for u in range(len(cands))], axis=1)
        energies[start:start + len(rows)] = _batch_energy(scene, bs, ch, pw)
    return Enumeration(cands, indices, energies, gibbs_probabilities(energies, temperature), temperature)


def iter_joint_states(scene: NetworkScene) -> Iterator[NetworkState]:
    """Every joint state, in the same order as :func:`enumerate_optimum`."""
    cands = [candidate_states(u, scene) for u in range(scene.n_users)]
    for combo in itertools.product(*(range(len(c)) for c in cands)):
        yield NetworkState.from_users(c.state(i) for c, i in zip(cands, combo))
