"""Performance snapshots and signalling message accounting."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .netmodel import NetworkScene, NetworkState, global_energy, potential_delay_from_rates, rates
from .sampler import TransitionLog
from .topology import implicit_neighbors


@dataclass(frozen=True)
class MetricsRecord:
    sum_throughput: float
    mean_user_throughput: float
    power_efficiency: float
    potential_delay: float
    global_energy: float
    min_user_rate: float
    total_power: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


METRIC_COLUMNS = tuple(f.name for f in dataclasses.fields(MetricsRecord))


def snapshot(state: NetworkState, scene: NetworkScene) -> MetricsRecord:
    """Throughput (b/s/Hz), power efficiency (b/s/Hz/W) and energies of a state,
    all from full-scope SINR.  Power efficiency divides the sum rate by the
    total serving transmit power."""
    if scene.n_users == 0:
        return MetricsRecord(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    r = rates(state, scene)
    total = float(r.sum())
    watts = float(state.power.sum())
    return MetricsRecord(
        sum_throughput=total,
        mean_user_throughput=total / len(r),
        power_efficiency=total / watts,
        potential_delay=potential_delay_from_rates(r),
        global_energy=global_energy(state, scene),
        min_user_rate=float(r.min()),
        total_power=watts,
    )


@dataclass
class MessageTally:
    """Items reported per user on the uplink and relayed per unordered
    station pair ``(b, b2)``, ``b < b2``, on the backhaul."""

    uplink: np.ndarray
    backhaul: Counter

    @property
    def total_uplink(self) -> int:
        return int(self.uplink.sum())

    @property
    def total_backhaul(self) -> int:
        return sum(self.backhaul.values())

    def backhaul_between(self, b: int, b2: int) -> int:
        return self.backhaul.get((min(b, b2), max(b, b2)), 0)


def tally_messages(scene: NetworkScene, theta: float, transitions: TransitionLog) -> MessageTally:
    """Count the measurement reports needed to evaluate each transition.

    For a transition of ``u`` with ``C`` channels and candidate set ``B_u``:
    the uplink carries ``C`` noise values, ``C*|B_u|`` interference totals and
    ``C*|B_u|`` link gains.  Each neighbour ``v`` reports its received signal
    and ``C*|B_u|`` cross gains to its serving station, which forwards them to
    each of its implicit neighbours.
    """
    n_c = scene.n_channels
    uplink = np.zeros(scene.n_users, dtype=np.int64)
    backhaul: Counter = Counter()
    if len(transitions) == 0:
        return MessageTally(uplink, backhaul)
    peers: dict[int, list[int]] = {b: [] for b in range(scene.n_bs)}
    for b, b2 in implicit_neighbors(scene, theta):
        peers[b].append(b2)
        peers[b2].append(b)
    serving = transitions.initial.bs.copy()
    for u, new in zip(transitions.users, transitions.new):
        n_cand = len(scene.users[u].candidate_bs)
        uplink[u] += n_c + 2 * n_c * n_cand
        per_neighbor = 1 + n_c * n_cand
        for v in scene.users[u].neighbors:
            bv = int(serving[v])
            for b2 in peers[bv]:
                backhaul[(min(bv, b2), max(bv, b2))] += per_neighbor
        serving[u] = transitions.candidates[u].bs[new]
    return MessageTally(uplink, backhaul)


def records_to_csv(rows: list[dict], columns=None) -> str:
    if not rows:
        return ""
    columns = list(columns or rows[0].keys())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in columns})
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")
