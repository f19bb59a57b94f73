"""Scene generation: station/user placement, path loss, neighbour graphs."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .netmodel import MACRO, SMALL, BaseStation, NetworkScene, Orthogonality, UserTerminal

THERMAL_NOISE_W = 4.0039e-15  # 290 K, 1 MHz
MACRO_POWER_W = 40.0
SMALL_POWER_W = 1.0
POWER_STEP_W = 0.1
MIN_DISTANCE_M = 1.0
DEFAULT_THETA_W = 1e-13  # -100 dBm


def path_loss_db(d, shadow_db=0.0):
    """Distance-dependent loss in dB (negative), distances clamped at 1 m."""
    d = np.maximum(np.asarray(d, dtype=float), MIN_DISTANCE_M)
    return -30.18 - 26.0 * np.log10(d) - np.asarray(shadow_db, dtype=float)


def path_loss(d, shadow_db=0.0):
    """Linear attenuation ``10**(l_dB/10)``; scalar in, scalar out."""
    out = 10.0 ** (path_loss_db(d, shadow_db) / 10.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class TopologyConfig:
    window: tuple[float, float] = (1000.0, 650.0)
    macro_positions: tuple[tuple[float, float], ...] = ((250.0, 325.0), (750.0, 325.0))
    n_small: int = 30
    n_users: int = 32
    n_channels: int = 1
    shadowing_sigma: float = 4.0
    theta: float = DEFAULT_THETA_W
    macro_power: float = MACRO_POWER_W
    small_power: float = SMALL_POWER_W
    power_step: float = POWER_STEP_W
    noise: float = THERMAL_NOISE_W
    orthogonality: Orthogonality = field(default_factory=Orthogonality)
    rng_seed: int | None = None

    def __post_init__(self):
        w, h = self.window
        if w <= 0 or h <= 0:
            raise ValueError("window dimensions must be positive")
        if self.n_small < 0 or self.n_users < 0:
            raise ValueError("counts must be non-negative")
        if self.n_channels < 1:
            raise ValueError("need at least one channel")
        if self.shadowing_sigma < 0:
            raise ValueError("shadowing sigma must be non-negative")
        if self.theta < 0:
            raise ValueError("theta must be non-negative")
        for x, y in self.macro_positions:
            if not (0 <= x <= w and 0 <= y <= h):
                raise ValueError(f"macro position {(x, y)} outside the window")
        if not self.macro_positions and self.n_small == 0:
            raise ValueError("scene needs at least one base station")


def generate_scene(cfg: TopologyConfig, rng: np.random.Generator | None = None) -> NetworkScene:
    """Random deployment: fixed macros, uniform small cells and users,
    log-normal shadowing drawn once per (station, user) link."""
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    w, h = cfg.window
    stations = []
    for x, y in cfg.macro_positions:
        stations.append(BaseStation(len(stations), (float(x), float(y)), MACRO, cfg.macro_power, cfg.macro_power))
    small_xy = rng.uniform((0.0, 0.0), (w, h), size=(cfg.n_small, 2))
    for x, y in small_xy:
        stations.append(BaseStation(len(stations), (float(x), float(y)), SMALL, cfg.small_power, cfg.small_power))
    user_xy = rng.uniform((0.0, 0.0), (w, h), size=(cfg.n_users, 2))

    bs_xy = np.array([s.position for s in stations], dtype=float).reshape(-1, 2)
    dist = np.linalg.norm(bs_xy[:, None, :] - user_xy[None, :, :], axis=2)
    shadow = rng.normal(0.0, cfg.shadowing_sigma, size=dist.shape) if cfg.shadowing_sigma > 0 else 0.0
    link = path_loss(dist, shadow) if dist.size else np.zeros(dist.shape)
    gain = np.repeat(np.asarray(link, dtype=float).reshape(dist.shape)[:, :, None], cfg.n_channels, axis=2)
    noise = np.full((cfg.n_users, cfg.n_channels), cfg.noise)
    users = tuple(UserTerminal(i, (float(x), float(y))) for i, (x, y) in enumerate(user_xy))
    scene = NetworkScene(
        base_stations=tuple(stations),
        users=users,
        gain=gain,
        noise=noise,
        orthogonality=cfg.orthogonality,
        power_step=cfg.power_step,
        window=(float(w), float(h)),
    )
    return with_neighbors(scene, cfg.theta)


def build_neighbors(scene: NetworkScene, theta: float):
    """Candidate station sets and the symmetric user neighbour relation.

    A station is a candidate for ``u`` when its pilot reaches ``u`` above
    ``theta`` on some channel; a user hearing nothing keeps its strongest
    station.  ``u`` and ``v`` are neighbours when a candidate of one is heard
    above ``theta`` by the other.

    Returns ``(candidates, neighbors)`` as tuples of sorted id tuples.
    """
    n_u = scene.n_users
    if n_u == 0:
        return (), ()
    rx = scene.received_pilot()  # (U, B)
    hears = rx > theta
    strongest = np.argmax(rx, axis=1)  # first index on ties
    cand = hears.copy()
    cand[np.arange(n_u), strongest] = True
    # u hears a candidate of v: (hears @ cand.T)[u, v] > 0
    m = (hears.astype(np.int64) @ cand.T.astype(np.int64)) > 0
    nbr = m | m.T
    np.fill_diagonal(nbr, False)
    candidates = tuple(tuple(int(b) for b in np.flatnonzero(row)) for row in cand)
    neighbors = tuple(tuple(int(v) for v in np.flatnonzero(row)) for row in nbr)
    return candidates, neighbors


def with_neighbors(scene: NetworkScene, theta: float) -> NetworkScene:
    """Copy of ``scene`` with candidate and neighbour sets rebuilt for ``theta``."""
    candidates, neighbors = build_neighbors(scene, theta)
    users = tuple(
        dataclasses.replace(ue, candidate_bs=candidates[i], neighbors=neighbors[i])
        for i, ue in enumerate(scene.users)
    )
    return dataclasses.replace(scene, users=users)


def implicit_neighbors(scene: NetworkScene, theta: float) -> set[tuple[int, int]]:
    """Unordered station pairs ``(b, b2)``, ``b < b2``, that must talk on the
    backhaul: some neighbouring users ``u``, ``u2`` have ``b`` and ``b2`` as
    candidates and one of them hears the other's candidate, weighted by the
    orthogonality factor, above ``theta``.

    Uses the candidate/neighbour sets stored on the scene.
    """
    n_u, n_b = scene.n_users, scene.n_bs
    if n_u < 2:
        return set()
    cand = np.zeros((n_u, n_b), dtype=bool)
    nbr = np.zeros((n_u, n_u), dtype=bool)
    for ue in scene.users:
        cand[ue.id, list(ue.candidate_bs)] = True
        nbr[ue.id, list(ue.neighbors)] = True
    np.fill_diagonal(nbr, False)
    rx = scene.received_pilot()  # P0 * l, (U, B)
    alpha = scene.orthogonality.max_factor(same_bs=False, n_channels=scene.n_channels)
    hears = alpha * rx > theta
    # reach[u, b2]: u has a neighbour with candidate b2
    reach = (nbr.astype(np.int64) @ cand.astype(np.int64)) > 0
    # m[b, b2]: some u with candidate b hears b2, which is a candidate of a neighbour of u
    m = (cand.T.astype(np.int64) @ (hears & reach).astype(np.int64)) > 0
    m = m | m.T
    np.fill_diagonal(m, False)
    return {(int(b), int(b2)) for b, b2 in zip(*np.nonzero(m)) if b < b2}


# -- JSON round trip ---------------------------------------------------------

SCENE_SCHEMA_VERSION = 1


def scene_to_dict(scene: NetworkScene) -> dict:
    return {
        "schema": SCENE_SCHEMA_VERSION,
        "window": list(scene.window),
        "n_channels": scene.n_channels,
        "power_step": scene.power_step,
        "rate_scale": scene.rate_scale,
        "orthogonality": dataclasses.asdict(scene.orthogonality),
        "base_stations": [
            {"id": b.id, "position": list(b.position), "kind": b.kind,
             "max_power": b.max_power, "pilot_power": b.pilot_power}
            for b in scene.base_stations
        ],
        "users": [
            {"id": u.id, "position": list(u.position),
             "candidate_bs": list(u.candidate_bs), "neighbors": list(u.neighbors)}
            for u in scene.users
        ],
        "gain": scene.gain.tolist(),
        "noise": scene.noise.tolist(),
    }


def scene_from_dict(data: dict) -> NetworkScene:
    if data.get("schema") != SCENE_SCHEMA_VERSION:
        raise ValueError(f"unsupported scene schema {data.get('schema')!r}")
    stations = tuple(
        BaseStation(b["id"], tuple(b["position"]), b["kind"], b["max_power"], b["pilot_power"])
        for b in data["base_stations"]
    )
    users = tuple(
        UserTerminal(u["id"], tuple(u["position"]), tuple(u["candidate_bs"]), tuple(u["neighbors"]))
        for u in data["users"]
    )
    n_c = data["n_channels"]
    gain = np.array(data["gain"], dtype=float).reshape(len(stations), len(users), n_c)
    noise = np.array(data["noise"], dtype=float).reshape(len(users), n_c)
    return NetworkScene(
        base_stations=stations,
        users=users,
        gain=gain,
        noise=noise,
        orthogonality=Orthogonality(**data["orthogonality"]),
        power_step=data["power_step"],
        rate_scale=data["rate_scale"],
        window=tuple(data["window"]),
    )


def save_scene(scene: NetworkScene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=1))


def load_scene(path) -> NetworkScene:
    return scene_from_dict(json.loads(Path(path).read_text()))
