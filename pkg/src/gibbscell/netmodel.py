"""Downlink radio model and the energy functions minimised by the sampler.

A :class:`NetworkScene` is the frozen deployment (stations, users, link
gains, noise).  A :class:`NetworkState` holds the optimisation variable:
one ``(bs, channel, power)`` triple per user.  Every function here is a pure
function of ``(state, scene)``.

Interference is evaluated in one of two scopes.  The *full* scope sums over
every other user and is used for reported quantities (SINR, rates, global
energy).  The *local* scope sums only over the user's neighbour set and is
what the distributed sampler actually sees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

MACRO = "macro"
SMALL = "small"


@dataclass(frozen=True)
class BaseStation:
    id: int
    position: tuple[float, float]
    kind: str
    max_power: float
    pilot_power: float

    def __post_init__(self):
        if self.kind not in (MACRO, SMALL):
            raise ValueError(f"unknown base station kind {self.kind!r}")
        if self.max_power <= 0:
            raise ValueError("max_power must be positive")


@dataclass(frozen=True)
class UserTerminal:
    id: int
    position: tuple[float, float]
    candidate_bs: tuple[int, ...] = ()
    neighbors: tuple[int, ...] = ()


@dataclass(frozen=True)
class Orthogonality:
    """Orthogonality factor between two transmissions.

    ``intra`` applies to two users of the same station on the same channel,
    ``inter`` to different stations on the same channel and ``adjacent`` to
    any pair on distinct channels.  The factor only depends on whether the
    stations and channels coincide, so it is symmetric by construction.
    """

    intra: float = 1.0
    inter: float = 1.0
    adjacent: float = 0.0

    def __post_init__(self):
        for name in ("intra", "inter", "adjacent"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"orthogonality factor {name}={v} outside [0, 1]")

    def __call__(self, b, b2, c, c2):
        same_c = np.equal(c, c2)
        if self.intra == self.inter:
            out = np.where(same_c, self.inter, self.adjacent)
        else:
            out = np.where(same_c, np.where(np.equal(b, b2), self.intra, self.inter), self.adjacent)
        if out.ndim == 0:
            return float(out)
        return np.broadcast_to(out, np.broadcast_shapes(*(np.shape(x) for x in (b, b2, c, c2))))

    def max_factor(self, same_bs: bool, n_channels: int) -> float:
        """Largest factor reachable over all channel pairs."""
        co = self.intra if same_bs else self.inter
        return max(co, self.adjacent) if n_channels > 1 else co


@dataclass(frozen=True, eq=False)
class NetworkScene:
    """Immutable deployment.

    ``gain[b, u, c]`` is the linear attenuation from station ``b`` to user
    ``u`` on channel ``c``; ``noise[u, c]`` the thermal noise in watts.
    Station and user ids equal their position in the respective tuples.
    """

    base_stations: tuple[BaseStation, ...]
    users: tuple[UserTerminal, ...]
    gain: np.ndarray
    noise: np.ndarray
    orthogonality: Orthogonality = field(default_factory=Orthogonality)
    power_step: float = 0.1
    rate_scale: float = 1.0
    window: tuple[float, float] = (1000.0, 650.0)

    def __post_init__(self):
        gain = np.asarray(self.gain, dtype=float)
        noise = np.asarray(self.noise, dtype=float)
        nb, nu = len(self.base_stations), len(self.users)
        if gain.ndim != 3 or gain.shape[:2] != (nb, nu):
            raise ValueError(f"gain must have shape ({nb}, {nu}, C), got {gain.shape}")
        if noise.shape != (nu, gain.shape[2]):
            raise ValueError(f"noise must have shape ({nu}, {gain.shape[2]}), got {noise.shape}")
        if np.any(gain <= 0):
            raise ValueError("attenuation must be strictly positive")
        if np.any(noise <= 0):
            raise ValueError("noise must be strictly positive")
        if self.power_step <= 0:
            raise ValueError("power_step must be positive")
        gain.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "gain", gain)
        object.__setattr__(self, "noise", noise)
        for i, bs in enumerate(self.base_stations):
            if bs.id != i:
                raise ValueError("base station ids must equal their index")
        for i, ue in enumerate(self.users):
            if ue.id != i:
                raise ValueError("user ids must equal their index")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_bs(self) -> int:
        return len(self.base_stations)

    @property
    def n_channels(self) -> int:
        return self.gain.shape[2]

    @property
    def channels(self) -> range:
        return range(self.n_channels)

    @cached_property
    def max_power(self) -> np.ndarray:
        return np.array([bs.max_power for bs in self.base_stations], dtype=float)

    @cached_property
    def pilot_power(self) -> np.ndarray:
        return np.array([bs.pilot_power for bs in self.base_stations], dtype=float)

    @cached_property
    def _levels(self) -> tuple[np.ndarray, ...]:
        return tuple(power_levels(bs.max_power, self.power_step) for bs in self.base_stations)

    def power_levels(self, b: int) -> np.ndarray:
        return self._levels[b]

    @cached_property
    def neighbor_mask(self) -> np.ndarray:
        m = np.zeros((self.n_users, self.n_users), dtype=bool)
        for ue in self.users:
            m[ue.id, list(ue.neighbors)] = True
        m.setflags(write=False)
        return m

    def received_pilot(self) -> np.ndarray:
        """Pilot power received by each user from each station, shape ``(U, B)``.

        Shadowing is frequency-flat in generated scenes; for arbitrary tables
        the best channel is used.
        """
        return (self.pilot_power[:, None] * self.gain.max(axis=2)).T


def power_levels(max_power: float, step: float) -> np.ndarray:
    """Discrete power grid ``step, 2*step, ..., max_power`` (zero excluded)."""
    n = int(math.floor(max_power / step + 1e-9))
    levels = step * np.arange(1, n + 1, dtype=float)
    if n == 0 or not math.isclose(levels[-1], max_power, rel_tol=1e-9):
        levels = np.append(levels, max_power)
    else:
        levels[-1] = max_power
    return levels


@dataclass(frozen=True)
class UserState:
    bs: int
    channel: int
    power: float


@dataclass
class NetworkState:
    """Per-user ``(bs, channel, power)`` stored column-wise."""

    bs: np.ndarray
    channel: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        self.bs = np.asarray(self.bs, dtype=np.int64).copy()
        self.channel = np.asarray(self.channel, dtype=np.int64).copy()
        self.power = np.asarray(self.power, dtype=float).copy()
        if not (self.bs.shape == self.channel.shape == self.power.shape) or self.bs.ndim != 1:
            raise ValueError("bs, channel and power must be 1-d arrays of equal length")

    @classmethod
    def from_users(cls, states: Iterable[UserState]) -> "NetworkState":
        states = list(states)
        return cls([s.bs for s in states], [s.channel for s in states], [s.power for s in states])

    def __len__(self) -> int:
        return len(self.bs)

    def __getitem__(self, u: int) -> UserState:
        return UserState(int(self.bs[u]), int(self.channel[u]), float(self.power[u]))

    def __setitem__(self, u: int, s: UserState) -> None:
        self.bs[u], self.channel[u], self.power[u] = s.bs, s.channel, s.power

    def __iter__(self):
        return (self[u] for u in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkState):
            return NotImplemented
        return (
            np.array_equal(self.bs, other.bs)
            and np.array_equal(self.channel, other.channel)
            and np.array_equal(self.power, other.power)
        )

    def copy(self) -> "NetworkState":
        return NetworkState(self.bs, self.channel, self.power)


def validate_state(state: NetworkState, scene: NetworkScene) -> None:
    """Raise ``ValueError`` unless every user state is admissible in ``scene``."""
    if len(state) != scene.n_users:
        raise ValueError(f"state has {len(state)} users, scene has {scene.n_users}")
    for u, s in enumerate(state):
        ue = scene.users[u]
        if s.bs not in ue.candidate_bs:
            raise ValueError(f"user {u}: station {s.bs} not in candidate set {ue.candidate_bs}")
        if not 0 <= s.channel < scene.n_channels:
            raise ValueError(f"user {u}: unknown channel {s.channel}")
        if not np.any(np.isclose(scene.power_levels(s.bs), s.power, rtol=1e-12, atol=0.0)):
            raise ValueError(f"user {u}: power {s.power} not on the grid of station {s.bs}")


def _check_user(u: int, scene: NetworkScene) -> None:
    if not 0 <= u < scene.n_users:
        raise IndexError(f"unknown user id {u}")


def _signal_and_interference(state: NetworkState, scene: NetworkScene, local: bool):
    users = np.arange(len(state))
    b, c, p = state.bs, state.channel, state.power
    signal = p * scene.gain[b, users, c]
    # cross[u, v] = gain from v's serving station to u on v's channel
    cross = scene.gain[b[None, :], users[:, None], c[None, :]]
    alpha = scene.orthogonality(b[:, None], b[None, :], c[:, None], c[None, :])
    contrib = np.asarray(alpha) * cross * p[None, :]
    np.fill_diagonal(contrib, 0.0)
    if local:
        contrib = np.where(scene.neighbor_mask, contrib, 0.0)
    interference = contrib.sum(axis=1)
    return signal, interference


def sinr_vector(state: NetworkState, scene: NetworkScene, local: bool = False) -> np.ndarray:
    if scene.n_users == 0:
        return np.zeros(0)
    signal, interference = _signal_and_interference(state, scene, local)
    noise = scene.noise[np.arange(len(state)), state.channel]
    return signal / (noise + interference)


def sinr(u: int, state: NetworkState, scene: NetworkScene, local: bool = False) -> float:
    """SINR of user ``u``; ``local=True`` restricts interferers to its neighbours."""
    _check_user(u, scene)
    b, c, p = state.bs, state.channel, state.power
    others = np.array(scene.users[u].neighbors if local else
                      [v for v in range(scene.n_users) if v != u], dtype=np.int64)
    interference = 0.0
    if len(others):
        alpha = scene.orthogonality(b[u], b[others], c[u], c[others])
        interference = float(np.sum(alpha * p[others] * scene.gain[b[others], u, c[others]]))
    return float(p[u] * scene.gain[b[u], u, c[u]] / (scene.noise[u, c[u]] + interference))


def rate_from_sinr(x, rate_scale: float = 1.0):
    return rate_scale * np.log2(1.0 + np.asarray(x, dtype=float))


def rate(u: int, state: NetworkState, scene: NetworkScene) -> float:
    """Achievable rate in b/s/Hz (base-2 Shannon rate times ``rate_scale``)."""
    return float(rate_from_sinr(sinr(u, state, scene), scene.rate_scale))


def rates(state: NetworkState, scene: NetworkScene) -> np.ndarray:
    return rate_from_sinr(sinr_vector(state, scene), scene.rate_scale)


def potential_delay_from_rates(r: Sequence[float]) -> float:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        return math.inf
    return float(np.sum(1.0 / r))


def potential_delay(state: NetworkState, scene: NetworkScene) -> float:
    """Sum of inverse rates; ``inf`` if any user has zero rate."""
    return potential_delay_from_rates(rates(state, scene))


def global_energy(state: NetworkState, scene: NetworkScene) -> float:
    """Sum over users of ``1/SINR`` with full-scope interference."""
    if scene.n_users == 0:
        return 0.0
    signal, interference = _signal_and_interference(state, scene, local=False)
    noise = scene.noise[np.arange(len(state)), state.channel]
    return float(np.sum((noise + interference) / signal))


def potential(clique: Iterable[int], state: NetworkState, scene: NetworkScene) -> float:
    """Clique potential: noise term for singletons, mutual interference for pairs."""
    members = sorted(set(clique))
    if len(members) == 0 or len(members) >= 3:
        return 0.0
    b, c, p, g = state.bs, state.channel, state.power, scene.gain
    if len(members) == 1:
        (u,) = members
        return float(scene.noise[u, c[u]] / (p[u] * g[b[u], u, c[u]]))
    u, v = members
    alpha = scene.orthogonality
    uv = alpha(b[u], b[v], c[u], c[v]) * p[v] * g[b[v], u, c[v]] / (p[u] * g[b[u], u, c[u]])
    vu = alpha(b[v], b[u], c[v], c[u]) * p[u] * g[b[u], v, c[u]] / (p[v] * g[b[v], v, c[v]])
    return float(uv + vu)


class LocalEnergy(NamedTuple):
    selfish: float
    altruistic: float
    total: float


def local_energy(u: int, state: NetworkState, scene: NetworkScene) -> LocalEnergy:
    """Local energy of ``u`` over its neighbour set, split into the selfish
    term (``1/SINR`` with neighbour interference) and the altruistic term
    (interference ``u`` inflicts on its neighbours, relative to their signal).
    """
    _check_user(u, scene)
    b, c, p, g = state.bs, state.channel, state.power, scene.gain
    nb = np.array(scene.users[u].neighbors, dtype=np.int64)
    signal = p[u] * g[b[u], u, c[u]]
    if len(nb):
        a_in = scene.orthogonality(b[u], b[nb], c[u], c[nb])
        interference = float(np.sum(a_in * p[nb] * g[b[nb], u, c[nb]]))
        a_out = scene.orthogonality(b[nb], b[u], c[nb], c[u])
        altruistic = float(np.sum(a_out * p[u] * g[b[u], nb, c[u]] / (p[nb] * g[b[nb], nb, c[nb]])))
    else:
        interference = altruistic = 0.0
    selfish = float((scene.noise[u, c[u]] + interference) / signal)
    return LocalEnergy(selfish, altruistic, selfish + altruistic)


def local_energy_coefficients(
    u: int,
    state: NetworkState,
    scene: NetworkScene,
    pair_bs: np.ndarray,
    pair_ch: np.ndarray,
    neighbors: Sequence[int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``(X, W)`` such that, for user ``u`` moved to station
    ``pair_bs[k]`` on channel ``pair_ch[k]`` with power ``P``, its local energy
    is ``X[k] / P + W[k] * P`` given the neighbours' current states.

    ``neighbors`` defaults to the scene's neighbour set of ``u``.
    """
    nb = np.asarray(scene.users[u].neighbors if neighbors is None else neighbors, dtype=np.int64)
    g = scene.gain
    pair_bs = np.asarray(pair_bs, dtype=np.int64)
    pair_ch = np.asarray(pair_ch, dtype=np.int64)
    own = g[pair_bs, u, pair_ch]
    noise = scene.noise[u, pair_ch]
    if len(nb) == 0:
        return noise / own, np.zeros(len(pair_bs))
    bv, cv, pv = state.bs[nb], state.channel[nb], state.power[nb]
    # interference received by u from each neighbour, independent of u's state
    received = pv * g[bv, u, cv]
    a_in = scene.orthogonality(pair_bs[:, None], bv[None, :], pair_ch[:, None], cv[None, :])
    interference = np.asarray(a_in) @ received
    # per unit of u's power: gain towards each neighbour over that neighbour's signal
    own_signal = pv * g[bv, nb, cv]
    a_out = scene.orthogonality(bv[None, :], pair_bs[:, None], cv[None, :], pair_ch[:, None])
    leak = g[pair_bs[:, None], nb[None, :], pair_ch[:, None]] / own_signal[None, :]
    w = np.sum(np.asarray(a_out) * leak, axis=1)
    return (noise + interference) / own, w
