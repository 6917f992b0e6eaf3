import numpy as np
import pytest

import seedcast as sc


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_instance(rng, max_nodes=10, ensure_edges=True):
    """A random (graph, model, realization) triple for property checks."""
    n = int(rng.integers(3, max_nodes + 1))
    target_edges = int(rng.integers(1 if ensure_edges else 0, n * (n - 1) // 2 + 2))
    g = sc.generate_er(n, min(target_edges, n * (n - 1)), seed=int(rng.integers(2**31)))
    if ensure_edges and g.edge_count == 0:
        g = sc.Graph(n, [(0, 1)])
    m = sc.build_true_model(g, seed=int(rng.integers(2**31)))
    r = sc.sample_realization(m, seed=int(rng.integers(2**31)))
    return g, m, r


def random_subset(rng, n, size=None):
    if size is None:
        size = int(rng.integers(0, n + 1))
    return sorted(int(v) for v in rng.choice(n, size=size, replace=False))
