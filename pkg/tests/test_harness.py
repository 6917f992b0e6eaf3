import math

import numpy as np
import pytest

import seedcast as sc
from seedcast.harness import NaiveBayesModel, _nanmean
from seedcast.rng import derive

from conftest import random_instance


# -------------------------------------------------------------- baselines


def test_hd_predict_matches_top_degree(rng):
    star = sc.Graph(5, [(0, i) for i in range(1, 5)])
    assert sc.hd_predict(star, 1) == [0]
    assert sc.hd_predict(star, 0) == []
    for _ in range(5):
        g, _, _ = random_instance(rng)
        k = int(rng.integers(0, g.node_count))
        assert sc.hd_predict(g, k) == sc.top_degree_nodes(g, k)


def test_random_predict_basics():
    g = sc.Graph(10, [(0, 1)])
    assert sc.random_predict(g, 0, seed=1) == []
    assert sc.random_predict(g, 3, seed=2) == sc.random_predict(g, 3, seed=2)
    with pytest.raises(ValueError):
        sc.random_predict(g, 11, seed=3)


def test_random_predict_uniform_inclusion():
    g = sc.Graph(8, [(0, 1)])
    counts = np.zeros(8)
    draws = 4000
    for i in range(draws):
        for v in sc.random_predict(g, 2, seed=derive(9, i)):
            counts[v] += 1
    p = 2 / 8
    sigma = math.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) <= 4 * sigma)


def test_nb_train_single_pair_counts():
    pair = sc.QueryDecisionPair(task="dc", X=np.array([0]), Y=np.array([1]), budget=1)
    nb = sc.nb_train([pair])
    assert nb.node_prior[1] == pytest.approx(2 / 3)
    assert nb.cond(0, 1) == pytest.approx(2 / 3)
    # node 0 never appears in any decision: smoothing floor
    assert nb.node_prior[0] == pytest.approx(1 / 3)
    assert 0 < nb.node_prior.min() <= nb.node_prior.max() < 1


def test_nb_train_rejects_empty():
    with pytest.raises(ValueError):
        sc.nb_train([])


def test_nb_predict_uniform_tables_pick_smallest_ids():
    nb = NaiveBayesModel(node_prior=np.full(6, 0.5), cooccur={}, y_counts=np.zeros(6), m=1)
    assert sc.nb_predict(nb, [0, 1], 3) == [0, 1, 2]
    assert sc.nb_predict(nb, [0], 0) == []


def test_nb_predict_prefers_frequent_cooccurrence():
    pairs = [
        sc.QueryDecisionPair(task="dc", X=np.array([0, 1]), Y=np.array([4]), budget=1),
        sc.QueryDecisionPair(task="dc", X=np.array([0, 1]), Y=np.array([4]), budget=1),
        sc.QueryDecisionPair(task="dc", X=np.array([2]), Y=np.array([3]), budget=1),
    ]
    nb = sc.nb_train(pairs)
    assert sc.nb_predict(nb, [0, 1], 1)[0] == 4


def test_nb_predict_handles_unseen_nodes():
    pair = sc.QueryDecisionPair(task="dc", X=np.array([0]), Y=np.array([1]), budget=1)
    nb = sc.nb_train([pair])
    got = sc.nb_predict(nb, [0], 2, node_count=50)
    assert len(got) == 2


# ------------------------------------------------------------------ ratio


def test_ratio_identical_decisions_exactly_one(rng):
    for task in ("de", "dc"):
        g, m, _ = random_instance(rng)
        y = [0, 1]
        r = sc.performance_ratio(m, task, [2], y, y, n=40, seed=5)
        assert r == 1.0


def test_ratio_dc_empty_prediction_zero():
    g = sc.Graph(4, [(0, 1), (1, 2), (2, 3)])
    m = sc.DiffusionModel(g, np.ones(3), np.ones(3), np.ones(3))
    r = sc.performance_ratio(m, "dc", [0], [], [1], n=30, seed=6)
    assert r == 0.0


def test_ratio_degenerate_denominator():
    # isolated negative seed: nothing spreads, every decision looks perfect
    g = sc.Graph(4, [(1, 2)])
    m = sc.DiffusionModel(g, np.ones(1), np.ones(1), np.ones(1))
    assert sc.performance_ratio(m, "dc", [0], [3], [2], n=10, seed=7) == 1.0
    # empty reference with a helpful prediction: flagged sentinel
    g2 = sc.Graph(4, [(0, 1), (1, 2), (2, 3)])
    m2 = sc.DiffusionModel(g2, np.ones(3), np.ones(3), np.ones(3))
    flagged = sc.performance_ratio(m2, "dc", [0], [1], [], n=10, seed=8)
    assert math.isnan(flagged)


def test_ratio_uses_common_random_numbers():
    g = sc.generate_er(30, 90, seed=9)
    m = sc.build_true_model(g, seed=10)
    bank = sc.sample_bank(m, 25, seed=11)
    r = sc.ratio_on_bank(bank, "de", [0, 1, 2], [3], [3])
    assert r == 1.0


def test_nanmean_exclusion():
    mean, bad = _nanmean([1.0, float("nan"), 3.0])
    assert mean == 2.0 and bad == 1


# ------------------------------------------------------------- experiment


def tiny_config(**overrides):
    base = dict(
        source_task="dc", target_task="de", graph="er", er_nodes=36, er_edges=80,
        distribution="q:0.1", k_values=(3,), m_values=(6,), test_size=4,
        repetitions=2, eval_samples=25, pair_eval_samples=25, pool_factor=2,
        master_seed=13, trainer_epochs=1,
    )
    base.update(overrides)
    return sc.ExperimentConfig(**base)


def test_run_experiment_deterministic():
    a = sc.run_experiment(tiny_config())
    b = sc.run_experiment(tiny_config())
    assert a.to_jsonl() == b.to_jsonl()
    assert a.rows == b.rows


def test_run_experiment_report_shape():
    rep = sc.run_experiment(tiny_config(k_values=(2, 4), m_values=(5,)))
    assert {(r["m"], r["K"]) for r in rep.rows} == {(5, 2), (5, 4)}
    methods = {r["method"] for r in rep.baseline_rows}
    assert methods == {"hd", "random", "nb"}
    assert len(rep.records) == 2 * 2 * 4  # reps * K values * queries
    for rec in rep.records:
        assert rec["ratio_final"] >= 0 or math.isnan(rec["ratio_final"])
    row = rep.row(5, 2)
    assert set(row) == {"m", "K", "mean_final", "std_final", "mean_initial",
                        "std_initial", "excluded"}
    assert "final" in rep.to_text()


def test_run_experiment_same_task_special_case():
    rep = sc.run_experiment(tiny_config(source_task="dc", target_task="dc", test_size=3))
    assert rep.rows[0]["mean_final"] >= 0


def test_run_experiment_inf_distribution():
    rep = sc.run_experiment(tiny_config(distribution="inf", repetitions=1))
    assert rep.rows[0]["mean_final"] >= 0


def test_config_rejects_unknown_distribution():
    with pytest.raises(ValueError):
        sc.run_experiment(tiny_config(distribution="bogus"))


def test_run_experiment_from_graph_file(tmp_path):
    from seedcast import storage
    g = sc.generate_er(30, 70, seed=50)
    storage.write_graph(g, tmp_path / "g.txt")
    rep = sc.run_experiment(tiny_config(graph=str(tmp_path / "g.txt"), repetitions=1))
    assert rep.rows[0]["mean_final"] >= 0
