"""Today's default operation: strongest-pilot association, round-robin
channels, full transmit power."""
from __future__ import annotations

import numpy as np

from .netmodel import NetworkScene, NetworkState


def default_configuration(scene: NetworkScene) -> NetworkState:
    n = scene.n_users
    rx = scene.received_pilot()
    bs = np.zeros(n, dtype=np.int64)
    for u, ue in enumerate(scene.users):
        cand = np.array(sorted(ue.candidate_bs), dtype=np.int64)
        # argmax returns the first maximum, i.e. the lowest station id on ties
        bs[u] = cand[np.argmax(rx[u, cand])]
    channel = np.zeros(n, dtype=np.int64)
    for b in np.unique(bs):
        attached = np.flatnonzero(bs == b)  # ascending user id
        channel[attached] = np.arange(len(attached)) % scene.n_channels
    return NetworkState(bs, channel, scene.max_power[bs] if n else np.zeros(0))
