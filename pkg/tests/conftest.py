import numpy as np
import pytest

from gibbscell.netmodel import BaseStation, NetworkScene, NetworkState, Orthogonality, UserTerminal, MACRO


def make_scene(gain, noise, max_power=None, step=0.1, alpha=None, complete=True, candidates=None):
    """Scene from explicit tables; every station a candidate and every other
    user a neighbour unless told otherwise."""
    gain = np.asarray(gain, dtype=float)
    n_b, n_u, n_c = gain.shape
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (n_u, n_c)).copy()
    if max_power is None:
        max_power = [1.0] * n_b
    stations = tuple(BaseStation(b, (100.0 * b, 0.0), MACRO, float(max_power[b]), float(max_power[b])) for b in range(n_b))
    users = []
    for u in range(n_u):
        cand = tuple(range(n_b)) if candidates is None else tuple(candidates[u])
        nbrs = tuple(v for v in range(n_u) if v != u) if complete else ()
        users.append(UserTerminal(u, (float(u), 1.0), cand, nbrs))
    return NetworkScene(stations, tuple(users), gain, noise, orthogonality=alpha or Orthogonality(), power_step=step)


def random_scene(rng, n_users=3, n_bs=2, n_channels=2, levels=2, alpha=None, noise=0.1):
    """Small complete-graph scene with energies of order one."""
    gain = rng.uniform(0.05, 1.0, size=(n_bs, n_users, n_channels))
    return make_scene(gain, noise * rng.uniform(0.5, 1.5, size=(n_users, n_channels)),
                      max_power=[0.1 * levels] * n_bs, alpha=alpha)


def random_state(rng, scene):
    bs = [rng.choice(ue.candidate_bs) for ue in scene.users]
    ch = rng.integers(0, scene.n_channels, size=scene.n_users)
    pw = [rng.choice(scene.power_levels(b)) for b in bs]
    return NetworkState(bs, ch, pw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
