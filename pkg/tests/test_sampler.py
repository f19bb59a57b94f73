import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_scene, random_scene, random_state
from gibbscell.netmodel import NetworkState, Orthogonality, global_energy, local_energy
from gibbscell.sampler import (
    GIBBS,
    GREEDY,
    SamplerConfig,
    StateSpaceTooLarge,
    _LocalTerms,
    candidate_energies,
    candidate_states,
    enumerate_optimum,
    gibbs_probabilities,
    iter_joint_states,
    run,
    transition_distribution,
)


def test_candidate_count():
    scene = make_scene(np.full((2, 1, 2), 0.5), 0.1, max_power=[1.0, 1.0])
    c = candidate_states(0, scene)
    assert len(c) == 40
    # ordered by station, channel, power
    assert list(c.bs[:20]) == [0] * 20 and list(c.ch[:10]) == [0] * 10
    assert np.all(np.diff(c.pw[:10]) > 0)
    assert c.index_of(c.state(17)) == 17


def test_candidate_single_level():
    scene = make_scene(np.full((1, 1, 3), 0.5), 0.1, max_power=[0.1])
    c = candidate_states(0, scene)
    assert len(c) == 3
    assert set(c.pw) == {0.1}


def test_distribution_examples():
    np.testing.assert_allclose(gibbs_probabilities(np.array([2.0, 2.0]), 0.3), [0.5, 0.5])
    t = 0.7
    np.testing.assert_allclose(gibbs_probabilities(np.array([0.0, t * math.log(3)]), t), [0.75, 0.25], rtol=1e-12)
    p = gibbs_probabilities(np.array([1.0, 1.001, 2.0]), 1e-6)
    assert p.max() > 0.999 and p.argmax() == 0
    np.testing.assert_allclose(gibbs_probabilities(np.array([np.inf, np.inf]), 1.0), [0.5, 0.5])
    np.testing.assert_allclose(gibbs_probabilities(np.array([1.0, np.inf]), 1.0), [1.0, 0.0])
    with pytest.raises(ValueError):
        gibbs_probabilities(np.array([1.0]), 0.0)


def test_two_state_distribution_sums_to_one(rng):
    scene = random_scene(rng, n_users=2, n_bs=1, n_channels=2, levels=1)
    p = transition_distribution(0, random_state(rng, scene), scene, 0.5)
    assert len(p) == 2
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    e=st.lists(st.floats(0, 1e6), min_size=1, max_size=30),
    t=st.floats(1e-6, 1e3),
    k=st.floats(1e-3, 1e3),
)
def test_property_distribution_valid_and_scale_invariant(e, t, k):
    e = np.array(e)
    p = gibbs_probabilities(e, t)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1.0) <= 1e-12
    # scaling energies leaves the greedy choice unchanged
    assert np.argmin(k * e) == np.argmin(e)
    np.testing.assert_allclose(gibbs_probabilities(k * e, k * t), p, atol=1e-12)


def test_two_point_gibbs_law():
    # noise / (P l) equals 1 on channel 0 and 2 on channel 1
    scene = make_scene([[[1.0, 0.5]]], 0.1, max_power=[0.1])
    en = enumerate_optimum(scene, temperature=1.0)
    np.testing.assert_allclose(en.energies, [1.0, 2.0])
    z = math.exp(-1) + math.exp(-2)
    np.testing.assert_allclose(en.probabilities, [math.exp(-1) / z, math.exp(-2) / z], rtol=1e-12)
    assert en.min_energy == 1.0
    assert en.minimizers()[0] == NetworkState([0], [0], [0.1])


def test_enumeration_matches_global_energy(rng):
    scene = random_scene(rng, n_users=3, alpha=Orthogonality(0.5, 0.8, 0.2))
    en = enumerate_optimum(scene, 0.5)
    brute = [global_energy(s, scene) for s in iter_joint_states(scene)]
    np.testing.assert_allclose(en.energies, brute, rtol=1e-12)
    assert en.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    row = en.argmin_rows[0]
    assert en.row_of(tuple(en.indices[row])) == row


def test_enumeration_refuses_large_space(rng):
    scene = random_scene(rng, n_users=4, n_bs=2, n_channels=2, levels=10)
    with pytest.raises(StateSpaceTooLarge, match="40"):
        enumerate_optimum(scene, max_states=10**4)


def test_local_terms_match_reference(rng):
    for _ in range(20):
        scene = random_scene(rng, n_users=5, n_bs=3, n_channels=3, levels=3,
                             alpha=Orthogonality(*rng.uniform(size=3)))
        state = random_state(rng, scene)
        u = int(rng.integers(5))
        c = candidate_states(u, scene)
        ref = candidate_energies(u, state, scene, c)
        np.testing.assert_allclose(_LocalTerms(u, scene, c).energies(state), ref, rtol=1e-12)
        # and each entry is the local energy after moving u
        k = int(rng.integers(len(c)))
        moved = state.copy()
        moved[u] = c.state(k)
        assert ref[k] == pytest.approx(local_energy(u, moved, scene).total, rel=1e-12)


def test_zero_ticks_returns_init(rng):
    scene = random_scene(rng)
    init = random_state(rng, scene)
    res = run(scene, init, SamplerConfig(max_ticks=0), rng)
    assert res.state == init
    assert len(res.log) == 0
    assert len(res.trace) == 1


def test_single_user_greedy_picks_best_link():
    gain = np.array([[[0.2, 0.4]], [[0.9, 0.3]]])
    scene = make_scene(gain, 0.1, max_power=[0.5, 0.3])
    init = NetworkState([0], [0], [0.1])
    res = run(scene, init, SamplerConfig(mode=GREEDY, max_ticks=5), np.random.default_rng(0))
    # N / (P l) is smallest for 0.3 W * 0.9 on station 1, channel 0
    assert res.state == NetworkState([1], [0], [0.3])


def test_greedy_descent(rng):
    for _ in range(5):
        scene = random_scene(rng, n_users=5, n_bs=3, n_channels=2, levels=4,
                             alpha=Orthogonality(0.9, 1.0, 0.1))
        init = random_state(rng, scene)
        res = run(scene, init, SamplerConfig(mode=GREEDY, max_ticks=20), rng)
        state = res.log.initial.copy()
        prev = global_energy(state, scene)
        for tr in res.log:
            state[tr.user] = tr.new
            cur = global_energy(state, scene)
            assert cur <= prev * (1 + 1e-12)
            prev = cur
        assert state == res.state
        energies = [row.energy for row in res.trace]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))


def test_reproducible(rng):
    scene = random_scene(rng, n_users=4, levels=3)
    init = random_state(rng, scene)
    cfg = SamplerConfig(temperature=0.3, max_ticks=50)
    a = run(scene, init, cfg, np.random.default_rng(99))
    b = run(scene, init, cfg, np.random.default_rng(99))
    c = run(scene, init, cfg, np.random.default_rng(100))
    assert a.log == b.log and a.state == b.state
    assert a.log != c.log


def test_log_records_evaluations(rng):
    scene = random_scene(rng, n_users=3, levels=2)
    res = run(scene, random_state(rng, scene), SamplerConfig(max_ticks=10), rng)
    assert len(res.log) > 0
    assert all(tr.evaluated == 8 for tr in res.log)
    for tr in res.log:
        assert 0 <= tr.tick < 10


def test_timer_mean(rng):
    # with mean-one geometric timers each user fires about every other tick
    scene = random_scene(rng, n_users=4, levels=1)
    res = run(scene, random_state(rng, scene), SamplerConfig(max_ticks=4000, trace_every=0), rng)
    assert len(res.log) / (4 * 4000) == pytest.approx(0.5, abs=0.02)


def test_annealing_schedule():
    cfg = SamplerConfig(anneal=True)
    assert cfg.temperature_at(0) == pytest.approx(1 / math.log(2))
    assert cfg.temperature_at(5000) == pytest.approx(1 / math.log(5002))
    assert SamplerConfig(temperature=0.1).temperature_at(77) == 0.1
    with pytest.raises(ValueError):
        SamplerConfig(mode="metropolis")
    with pytest.raises(ValueError):
        SamplerConfig(temperature=0.0)


def test_detailed_balance(rng):
    scene = random_scene(rng, n_users=2, n_bs=2, n_channels=2, levels=2)
    t = 0.4
    en = enumerate_optimum(scene, t)
    sizes = [len(c) for c in en.candidates]
    for row in range(len(en.energies)):
        s = en.state(row)
        for u in range(2):
            p_fwd = transition_distribution(u, s, scene, t, en.candidates[u])
            for k in range(sizes[u]):
                joint = list(en.indices[row])
                joint[u] = k
                row2 = en.row_of(tuple(joint))
                p_back = transition_distribution(u, en.state(row2), scene, t, en.candidates[u])
                lhs = en.probabilities[row] * p_fwd[k]
                rhs = en.probabilities[row2] * p_back[en.indices[row][u]]
                assert lhs == pytest.approx(rhs, rel=1e-10)


def test_short_chain_visits_likely_states(rng):
    scene = random_scene(rng, n_users=2, n_bs=2, n_channels=2, levels=2)
    t = 0.5
    en = enumerate_optimum(scene, t)
    res = run(scene, en.state(0), SamplerConfig(mode=GIBBS, temperature=t, max_ticks=20000, trace_every=0), rng)
    counts = np.zeros(len(en.energies))
    for joint in res.log.joint_indices():
        counts[en.row_of(joint)] += 1
    tv = 0.5 * np.abs(counts / counts.sum() - en.probabilities).sum()
    assert tv < 0.05
