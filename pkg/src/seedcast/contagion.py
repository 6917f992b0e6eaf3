"""Continuous-time cascade machinery: diffusion models, sampled realizations,
and the multi-cascade simulator.

A diffusion model assigns each edge an activation probability (independent
per-in-edge Bernoulli draws) and a Weibull transmission-time distribution.
Sampling the Bernoulli draws and the travel times yields a *realization*: a
live-edge weighted subgraph on which diffusion is deterministic.  Competing
cascades then spread by earliest arrival, with arrival-time ties going to the
cascade with the smallest index.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .graph import Graph
from .rng import derive, generator

_PARAM_FLOOR = 1e-6  # keeps Weibull shape/scale away from degenerate zero

# Dense per-bank caches (all-pairs distances) are only built below this size.
DENSE_NODE_LIMIT = 4096


class DiffusionModel:
    """Per-edge (p, alpha, beta): activation probability plus Weibull
    transmission-time parameters, aligned with the graph's canonical edges."""

    def __init__(self, graph: Graph, edge_prob: np.ndarray, weibull_shape: np.ndarray,
                 weibull_scale: np.ndarray, kind: str = "custom", seed: int | None = None):
        m = graph.edge_count
        edge_prob = np.asarray(edge_prob, dtype=np.float64)
        weibull_shape = np.asarray(weibull_shape, dtype=np.float64)
        weibull_scale = np.asarray(weibull_scale, dtype=np.float64)
        for name, arr in (("edge_prob", edge_prob), ("weibull_shape", weibull_shape),
                          ("weibull_scale", weibull_scale)):
            if arr.shape != (m,):
                raise ValueError(f"{name} must have one entry per edge ({m})")
        if np.any((edge_prob < 0) | (edge_prob > 1)):
            raise ValueError("edge_prob must lie in [0, 1]")
        if np.any(weibull_shape <= 0) or np.any(weibull_scale <= 0):
            raise ValueError("Weibull parameters must be positive")
        self.graph = graph
        self.edge_prob = edge_prob
        self.weibull_shape = weibull_shape
        self.weibull_scale = weibull_scale
        self.kind = kind
        self.seed = seed
        for arr in (self.edge_prob, self.weibull_shape, self.weibull_scale):
            arr.setflags(write=False)

    def descriptor(self) -> str:
        h = hashlib.sha256()
        h.update(self.graph.content_hash().encode())
        for arr in (self.edge_prob, self.weibull_shape, self.weibull_scale):
            h.update(arr.astype("<f8").tobytes())
        return h.hexdigest()

    def __repr__(self) -> str:
        return f"DiffusionModel(kind={self.kind!r}, edges={self.graph.edge_count})"


class Realization:
    """A sampled live-edge subgraph with positive travel times on live edges."""

    def __init__(self, graph: Graph, live_edge_idx: np.ndarray, travel_times: np.ndarray):
        live_edge_idx = np.asarray(live_edge_idx, dtype=np.int64)
        travel_times = np.asarray(travel_times, dtype=np.float64)
        if live_edge_idx.shape != travel_times.shape:
            raise ValueError("one travel time per live edge required")
        if np.any(travel_times <= 0):
            raise ValueError("travel times must be positive")
        if live_edge_idx.size and (live_edge_idx.min() < 0 or live_edge_idx.max() >= graph.edge_count):
            raise ValueError("live edge index out of range")
        self.graph = graph
        self.live_edge_idx = live_edge_idx
        self.travel_times = travel_times
        self._csr: sp.csr_matrix | None = None

    @property
    def live_edges(self) -> np.ndarray:
        return self.graph.edges[self.live_edge_idx]

    def csr(self) -> sp.csr_matrix:
        if self._csr is None:
            e = self.live_edges
            self._csr = sp.csr_matrix(
                (self.travel_times, (e[:, 0], e[:, 1])),
                shape=(self.graph.node_count, self.graph.node_count))
        return self._csr

    def earliest_times(self, sources: Sequence[int]) -> np.ndarray:
        """Earliest arrival from a source set over live edges; inf if unreachable."""
        n = self.graph.node_count
        src = self.graph.check_nodes(sources)
        if src.size == 0:
            return np.full(n, np.inf)
        out = np.full(n, np.inf)
        out[src] = 0.0
        if self.live_edge_idx.size == 0:
            return out
        return dijkstra(self.csr(), indices=src, min_only=True)

    def __repr__(self) -> str:
        return f"Realization(nodes={self.graph.node_count}, live={self.live_edge_idx.size})"


class RealizationBank:
    """An ordered list of iid realizations sharing one graph.

    Holds lazily-built dense caches (all-pairs shortest times, reachability
    masks) used by the vectorized kernel evaluators; position order is part of
    the bank identity.
    """

    def __init__(self, realizations: Sequence[Realization], provenance: str = "", seed: int | None = None):
        realizations = list(realizations)
        if not realizations:
            raise ValueError("bank must contain at least one realization")
        g = realizations[0].graph
        if any(r.graph is not g and r.graph != g for r in realizations):
            raise ValueError("all realizations must share the same graph")
        self.realizations = realizations
        self.graph = g
        self.provenance = provenance
        self.seed = seed
        self._dist: np.ndarray | None = None
        self._reach: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.realizations)

    def __getitem__(self, i: int) -> Realization:
        return self.realizations[i]

    def distances(self) -> np.ndarray:
        """(K, n, n) all-pairs earliest-arrival times per realization."""
        if self._dist is None:
            n = self.graph.node_count
            if n > DENSE_NODE_LIMIT:
                raise MemoryError(
                    f"dense distance cache disabled for n={n} > {DENSE_NODE_LIMIT}")
            mats = np.empty((len(self), n, n))
            for k, r in enumerate(self.realizations):
                if r.live_edge_idx.size == 0:
                    mats[k] = np.inf
                    np.fill_diagonal(mats[k], 0.0)
                else:
                    mats[k] = dijkstra(r.csr())
            self._dist = mats
        return self._dist

    def reach(self) -> np.ndarray:
        """(K, n, n) boolean reachability (row s -> reachable set of s)."""
        if self._reach is None:
            self._reach = np.isfinite(self.distances())
        return self._reach

    def drop_caches(self) -> None:
        self._dist = None
        self._reach = None

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.graph.content_hash().encode())
        h.update(str(len(self)).encode())
        for r in self.realizations:
            h.update(r.live_edge_idx.astype("<i8").tobytes())
            h.update(r.travel_times.astype("<f8").tobytes())
        return h.hexdigest()

    def __repr__(self) -> str:
        return f"RealizationBank(K={len(self)}, nodes={self.graph.node_count})"


@dataclass
class CascadeSeeds:
    """Seed sets S_1..S_L in priority order (index 1 wins time ties).

    Sets must be pairwise disjoint.
    """

    seed_sets: list[np.ndarray]

    @classmethod
    def of(cls, graph: Graph, *sets: Sequence[int]) -> "CascadeSeeds":
        arrs = [graph.check_nodes(s) for s in sets]
        seen: set[int] = set()
        for arr in arrs:
            cur = set(int(v) for v in arr)
            if cur & seen:
                raise ValueError("seed sets must be pairwise disjoint")
            seen |= cur
        return cls(arrs)


@dataclass
class ActivationOutcome:
    """Per-node cascade label (1-based; 0 = never activated) and time."""

    cascade: np.ndarray
    time: np.ndarray
    predecessor: np.ndarray = field(repr=False, default=None)

    def activated(self, cascade_index: int) -> np.ndarray:
        return np.flatnonzero(self.cascade == cascade_index)

    def label(self, v: int):
        if self.cascade[v] == 0:
            return None
        return int(self.cascade[v]), float(self.time[v])


def build_true_model(g: Graph, seed: int) -> DiffusionModel:
    """Weighted-cascade ground truth: p(v,u) = 1/indegree(u), and integer
    Weibull shape/scale drawn uniformly from {1..10} per edge."""
    if g.edge_count < 1:
        raise ValueError("graph must have at least one edge")
    indeg = g.in_degrees()
    p = 1.0 / indeg[g.edges[:, 1]]
    rng = generator(seed)
    shape = rng.integers(1, 11, size=g.edge_count).astype(np.float64)
    scale = rng.integers(1, 11, size=g.edge_count).astype(np.float64)
    return DiffusionModel(g, p, shape, scale, kind="true", seed=seed)


def perturb_model(m: DiffusionModel, q: float, seed: int) -> DiffusionModel:
    """Redraw each parameter uniformly from [theta*(1-q), theta*(1+q)].

    Probabilities are clipped to [0, 1]; Weibull parameters are floored at a
    small positive minimum.  Smaller q stays closer to the input model.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    rng = generator(seed)

    def redraw(theta: np.ndarray) -> np.ndarray:
        lo, hi = theta * (1 - q), theta * (1 + q)
        return lo + (hi - lo) * rng.random(theta.shape)

    p = np.clip(redraw(m.edge_prob), 0.0, 1.0)
    shape = np.maximum(redraw(m.weibull_shape), _PARAM_FLOOR)
    scale = np.maximum(redraw(m.weibull_scale), _PARAM_FLOOR)
    return DiffusionModel(m.graph, p, shape, scale, kind=f"perturbed(q={q})", seed=seed)


def random_model(g: Graph, seed: int) -> DiffusionModel:
    """All parameters uniform on [0, 1]: an empirical model unrelated to the
    ground truth (Weibull parameters floored at a positive minimum)."""
    if g.edge_count < 1:
        raise ValueError("graph must have at least one edge")
    rng = generator(seed)
    p = rng.random(g.edge_count)
    shape = np.maximum(rng.random(g.edge_count), _PARAM_FLOOR)
    scale = np.maximum(rng.random(g.edge_count), _PARAM_FLOOR)
    return DiffusionModel(g, p, shape, scale, kind="random", seed=seed)


# Travel times are clamped into this band: tiny shapes make the Weibull tail
# overrun float64 (such an edge effectively never transmits), and exact zeros
# would break the strictly-positive invariant.
_TIME_FLOOR = np.finfo(np.float64).tiny
_TIME_CEIL = 1e300


def sample_realization(m: DiffusionModel, seed: int) -> Realization:
    """Draw live edges (independent Bernoulli per edge) and a Weibull travel
    time per live edge via inverse CDF: t = scale * (-ln U)^(1/shape)."""
    rng = generator(seed)
    live = rng.random(m.graph.edge_count) < m.edge_prob
    idx = np.flatnonzero(live)
    u = 1.0 - rng.random(idx.size)  # in (0, 1]
    with np.errstate(over="ignore"):
        t = m.weibull_scale[idx] * np.power(-np.log(u), 1.0 / m.weibull_shape[idx])
    t = np.clip(t, _TIME_FLOOR, _TIME_CEIL)
    return Realization(m.graph, idx, t)


def sample_bank(m: DiffusionModel, K: int, seed: int) -> RealizationBank:
    """K iid realizations on position-indexed sub-streams.

    Position i always uses the same stream for a given seed, so the K-bank is
    a prefix of any larger bank drawn with the same seed.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    reals = [sample_realization(m, derive(seed, "realization", i)) for i in range(K)]
    return RealizationBank(reals, provenance=f"{m.kind}:{m.descriptor()[:12]}", seed=seed)


def simulate(r: Realization, seeds: CascadeSeeds) -> ActivationOutcome:
    """Deterministic multi-cascade diffusion on one realization.

    Generalized Dijkstra with composite priority (time, cascade index,
    predecessor id): each node is claimed once, at its earliest arrival over
    live paths; equal arrivals go to the smallest cascade index, residual ties
    to the smallest predecessor id.
    """
    g = r.graph
    n = g.node_count
    cascade = np.zeros(n, dtype=np.int64)
    time = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)

    live = r.live_edges
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (u, v), t in zip(live, r.travel_times):
        adj[u].append((int(v), float(t)))

    heap: list[tuple[float, int, int, int]] = []
    for ci, s in enumerate(seeds.seed_sets, start=1):
        for v in s:
            heap.append((0.0, ci, -1, int(v)))
    heapq.heapify(heap)

    while heap:
        t, ci, p, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        cascade[v], time[v], pred[v] = ci, t, p
        for w, dt in adj[v]:
            if not done[w]:
                heapq.heappush(heap, (t + dt, ci, v, w))
    return ActivationOutcome(cascade=cascade, time=time, predecessor=pred)
