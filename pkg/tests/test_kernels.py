import math

import numpy as np
import pytest

import seedcast as sc
from seedcast.contagion import CascadeSeeds
from seedcast.kernels import ContainScore, EnhanceScore, KernelScore

from conftest import random_instance, random_subset


def chain_realization(n=3):
    g = sc.Graph(n, [(i, i + 1) for i in range(n - 1)])
    return g, sc.Realization(g, np.arange(n - 1), np.ones(n - 1))


def brute_force_arrival(r, sources):
    """Exhaustive min over all simple live paths: the independent time oracle."""
    g = r.graph
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in range(g.node_count)}
    for (u, v), t in zip(r.live_edges, r.travel_times):
        adj[int(u)].append((int(v), float(t)))
    best = {v: (0.0 if v in sources else math.inf) for v in range(g.node_count)}

    def walk(v, dist, visited):
        for u, t in adj[v]:
            if u in visited:
                continue
            d = dist + t
            if d < best[u]:
                best[u] = d
            walk(u, d, visited | {u})

    for s in sources:
        walk(int(s), 0.0, {int(s)})
    return np.array([best[v] for v in range(g.node_count)])


# ---------------------------------------------------------------- arrival


def test_earliest_arrival_empty_sources():
    g, r = chain_realization()
    assert np.all(np.isinf(sc.earliest_arrival(r, [])))


def test_earliest_arrival_path():
    g, r = chain_realization()
    assert sc.earliest_arrival(r, [0]).tolist() == [0.0, 1.0, 2.0]


def test_earliest_arrival_invalid_node():
    g, r = chain_realization()
    with pytest.raises(ValueError):
        sc.earliest_arrival(r, [7])


def test_earliest_arrival_matches_path_enumeration(rng):
    for _ in range(25):
        g, m, r = random_instance(rng, max_nodes=8)
        src = random_subset(rng, g.node_count, size=int(rng.integers(1, 3)))
        got = sc.earliest_arrival(r, src)
        want = brute_force_arrival(r, src)
        assert np.allclose(got, want)


# ---------------------------------------------------------------- kernels


def test_kernel_de_trivial_cases():
    g, r = chain_realization()
    assert sc.kernel_de(r, [0, 1, 2], []) == 0
    assert sc.kernel_de(r, [0, 2], [0, 2]) == 2
    assert sc.kernel_de(r, [2], [0]) == 1
    assert sc.kernel_de(r, [0], [2]) == 0


def test_kernel_dc_trivial_and_path_fixtures():
    g, r = chain_realization()
    assert sc.kernel_dc(r, [], [1]) == 3
    assert sc.kernel_dc(r, [0], [2]) == 1  # negative takes {0,1}; node 2 is saved
    assert sc.kernel_dc(r, [0], [1]) == 2  # negative keeps only {0}


def test_kernel_dc_overlap_stays_negative():
    g, r = chain_realization()
    # node 0 seeded by both sides belongs to the negative cascade
    assert sc.kernel_dc(r, [0], [0]) == sc.kernel_dc(r, [0], [])


def test_kernel_dc_matches_simulator(rng):
    for _ in range(60):
        g, m, r = random_instance(rng)
        n = g.node_count
        X = random_subset(rng, n)
        Y = random_subset(rng, n)
        xs = sorted(set(X))
        ys = sorted(set(Y) - set(X))
        out = sc.simulate(r, CascadeSeeds.of(g, xs, ys))
        want = n - len(out.activated(1))
        assert sc.kernel_dc(r, X, Y) == want


def test_kernel_ranges(rng):
    for _ in range(30):
        g, m, r = random_instance(rng)
        n = g.node_count
        X = random_subset(rng, n)
        Y = random_subset(rng, n)
        de = sc.kernel_de(r, X, Y)
        dc = sc.kernel_dc(r, X, Y)
        assert 0 <= de <= len(X)
        reach_x = int(np.isfinite(r.earliest_times(X)).sum()) if X else 0
        assert n - reach_x <= dc <= n


def test_kernel_monotone_and_submodular_in_y(rng):
    for _ in range(60):
        g, m, r = random_instance(rng, max_nodes=9)
        n = g.node_count
        X = random_subset(rng, n, size=int(rng.integers(1, n)))
        y_small = set(random_subset(rng, n, size=int(rng.integers(0, n - 1))))
        y_big = y_small | set(random_subset(rng, n))
        rest = [v for v in range(n) if v not in y_big]
        if not rest:
            continue
        v = int(rng.choice(rest))
        for kern in (sc.kernel_de, sc.kernel_dc):
            f_small, f_big = kern(r, X, sorted(y_small)), kern(r, X, sorted(y_big))
            assert f_small <= f_big  # monotone under growth
            gain_small = kern(r, X, sorted(y_small | {v})) - f_small
            gain_big = kern(r, X, sorted(y_big | {v})) - f_big
            assert gain_small >= gain_big  # diminishing returns


# ----------------------------------------------------------- feature maps


def test_feature_map_single_realization():
    g, r = chain_realization()
    bank = sc.RealizationBank([r])
    fm = sc.feature_map(bank, "de", [2], [0])
    assert fm.shape == (1,)
    assert fm[0] == sc.kernel_de(r, [2], [0])


def test_feature_map_zero_for_empty_decision():
    g, r = chain_realization()
    bank = sc.RealizationBank([r, r])
    assert np.array_equal(sc.feature_map(bank, "de", [0, 1], []), np.zeros(2))


def test_feature_map_average_equals_estimate(rng):
    g, m, _ = random_instance(rng)
    bank = sc.sample_bank(m, 12, seed=5)
    X, Y = [0, 1], [2]
    fm = sc.feature_map(bank, "dc", X, Y)
    est = sc.estimate_on_bank(bank, "dc", X, Y)
    assert np.ones(12) @ fm / 12 == pytest.approx(est.mean)


def test_dense_scores_match_plain_kernels(rng):
    for task in ("de", "dc"):
        for _ in range(15):
            g, m, _ = random_instance(rng)
            bank = sc.sample_bank(m, 6, seed=int(rng.integers(2**31)))
            X = random_subset(rng, g.node_count)
            Y = random_subset(rng, g.node_count)
            dense = sc.objective_score(bank, task, X)
            assert isinstance(dense, (EnhanceScore, ContainScore))
            generic = KernelScore(bank, task, X)
            assert np.array_equal(dense.kernel_values(Y), generic.kernel_values(Y))
            assert dense(Y) == pytest.approx(generic(Y))


def test_dense_gains_match_value_differences(rng):
    for task in ("de", "dc"):
        g, m, _ = random_instance(rng, max_nodes=9)
        bank = sc.sample_bank(m, 5, seed=17)
        X = random_subset(rng, g.node_count, size=2)
        score = sc.objective_score(bank, task, X)
        state = score.new_state()
        chosen = []
        for _ in range(3):
            gains = score.gains(state)
            base = score(chosen)
            for v in range(g.node_count):
                assert gains[v] == pytest.approx(score(chosen + [v]) - base)
                assert score.gain_of(state, v) == pytest.approx(gains[v])
            v = int(np.argmax(gains))
            score.add(state, v)
            chosen.append(v)


# ------------------------------------------------------------- estimation


def test_estimate_objective_trivial_values():
    g = sc.Graph(3, [(0, 1), (1, 2)])
    m = sc.build_true_model(g, seed=1)
    assert sc.estimate_objective(m, "de", [1, 2], [], n=16, seed=3).mean == 0.0
    assert sc.estimate_objective(m, "dc", [], [1], n=16, seed=3).mean == 3.0


def test_estimate_objective_deterministic_model_exact():
    g = sc.Graph(4, [(0, 1), (1, 2), (2, 3)])
    m = sc.DiffusionModel(g, np.ones(3), np.ones(3), np.ones(3))
    est = sc.estimate_objective(m, "de", [2, 3], [0], n=8, seed=9)
    r = sc.sample_realization(m, seed=1)
    assert est.mean == sc.kernel_de(r, [2, 3], [0]) == 2
    assert est.stderr == 0.0


def test_estimate_objective_rejects_zero_samples():
    g = sc.Graph(2, [(0, 1)])
    m = sc.build_true_model(g, seed=1)
    with pytest.raises(ValueError):
        sc.estimate_objective(m, "de", [0], [1], n=0, seed=1)


def test_estimate_stderr_shrinks_like_sqrt_n():
    g = sc.generate_er(30, 90, seed=31)
    m = sc.build_true_model(g, seed=32)
    X, Y = [0, 1, 2, 3, 4], [5, 6]
    small = sc.estimate_objective(m, "de", X, Y, n=100, seed=33)
    big = sc.estimate_objective(m, "de", X, Y, n=1600, seed=33)
    assert small.stderr > 0
    ratio = small.stderr / big.stderr
    assert 2.0 < ratio < 8.0  # expect about 4x


def test_estimate_deterministic():
    g = sc.generate_er(20, 60, seed=41)
    m = sc.build_true_model(g, seed=42)
    a = sc.estimate_objective(m, "dc", [0, 1], [2], n=50, seed=43)
    b = sc.estimate_objective(m, "dc", [0, 1], [2], n=50, seed=43)
    assert a == b


def test_kernel_score_fallback_matches_dense(rng):
    # the per-candidate fallback used beyond the dense cache limit
    g, m, _ = random_instance(rng)
    bank = sc.sample_bank(m, 5, seed=23)
    X = random_subset(rng, g.node_count, size=3)
    w = rng.random(5) + 0.05
    for task in ("de", "dc"):
        dense = sc.objective_score(bank, task, X, w)
        fallback = KernelScore(bank, task, X, w).reweighted(w * 2)
        for _ in range(5):
            Y = random_subset(rng, g.node_count)
            assert fallback(Y) == pytest.approx(2 * dense(Y))
        got = sc.greedy_max(fallback, range(g.node_count), 3, lazy=True)
        want = sc.greedy_max(dense, range(g.node_count), 3, lazy=True)
        assert got == want
