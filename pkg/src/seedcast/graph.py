"""Directed graphs: edge-list ingestion, random generation, degree heuristics.

Nodes are dense 0-based integers so that adjacency can be held in arrays and
shared read-only by any number of simulation workers.  Edge lists are kept in
canonical (u, v) sorted order, which makes edge indices stable across runs and
lets model parameters be stored as flat per-edge arrays.
"""

from __future__ import annotations

from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

from .rng import generator


class Graph:
    """Immutable directed graph with canonical edge ordering.

    No self-loops, no duplicate edges.  ``edges`` is an (m, 2) int array
    sorted lexicographically by (u, v).
    """

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] | np.ndarray):
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64)
        if edges.size == 0:
            edges = edges.reshape(0, 2)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise ValueError("edges must be pairs (u, v)")
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        if edges.size:
            if edges.min() < 0:
                raise ValueError("negative node id in edge list")
            if edges.max() >= node_count:
                raise ValueError("edge endpoint exceeds node_count")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loop in edge list")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            dup = np.all(edges[1:] == edges[:-1], axis=1)
            if np.any(dup):
                raise ValueError("duplicate edge in edge list")
        self.node_count = int(node_count)
        self.edges = edges
        self.edges.setflags(write=False)
        self._out_indptr, self._out_targets, self._out_eidx = self._build_adjacency(edges[:, 0], edges[:, 1])
        self._in_indptr, self._in_sources, self._in_eidx = self._build_adjacency(edges[:, 1], edges[:, 0])

    def _build_adjacency(self, key: np.ndarray, val: np.ndarray):
        order = np.argsort(key, kind="stable")
        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.add.at(indptr, key + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, val[order], order

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    def out_neighbors(self, u: int) -> np.ndarray:
        self._check_node(u)
        return self._out_targets[self._out_indptr[u]:self._out_indptr[u + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        self._check_node(v)
        return self._in_sources[self._in_indptr[v]:self._in_indptr[v + 1]]

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in_indptr)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_indptr)

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise ValueError(f"node id {v} out of range [0, {self.node_count})")

    def check_nodes(self, nodes: Iterable[int]) -> np.ndarray:
        """Validate a node collection, returning it as a sorted unique array."""
        arr = np.asarray(sorted(set(int(v) for v in nodes)), dtype=np.int64)
        if arr.size and (arr[0] < 0 or arr[-1] >= self.node_count):
            raise ValueError("node id out of range")
        return arr

    def csr(self, weights: np.ndarray | None = None) -> sp.csr_matrix:
        """Adjacency as CSR; ``weights`` aligns with canonical edge order."""
        data = np.ones(self.edge_count) if weights is None else np.asarray(weights, dtype=np.float64)
        return sp.csr_matrix((data, (self.edges[:, 0], self.edges[:, 1])),
                             shape=(self.node_count, self.node_count))

    def content_hash(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(str(self.node_count).encode())
        h.update(self.edges.astype("<i8").tobytes())
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph) and self.node_count == other.node_count
                and np.array_equal(self.edges, other.edges))

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"


def load_edge_list(text: str | TextIO, node_count: int | None = None) -> Graph:
    """Parse "u v" lines into a Graph.

    Comment lines starting with '#' and blank lines are skipped.  Duplicate
    edges and self-loops are dropped (their counts are reported by
    :func:`load_edge_list_stats`).  node_count defaults to 1 + max id seen.
    """
    g, _ = load_edge_list_stats(text, node_count=node_count)
    return g


def load_edge_list_stats(text: str | TextIO, node_count: int | None = None) -> tuple[Graph, dict]:
    """Like :func:`load_edge_list` but also returns drop counts."""
    if hasattr(text, "read"):
        text = text.read()
    pairs = []
    self_loops = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {raw!r}") from None
        if u < 0 or v < 0:
            raise ValueError(f"line {lineno}: negative node id in {raw!r}")
        if u == v:
            self_loops += 1
            continue
        pairs.append((u, v))
    unique = sorted(set(pairs))
    duplicates = len(pairs) - len(unique)
    max_id = max((max(u, v) for u, v in unique), default=-1)
    if node_count is None:
        node_count = max_id + 1
    elif node_count <= max_id:
        raise ValueError(f"node_count {node_count} too small for max id {max_id}")
    g = Graph(node_count, unique)
    return g, {"self_loops_dropped": self_loops, "duplicates_dropped": duplicates}


def load_edge_list_compact(text: str | TextIO) -> tuple[Graph, dict[int, int]]:
    """Ingest an edge list with sparse external ids, remapping to dense 0..n-1.

    Returns the graph and the external-id -> dense-id mapping.  Used for real
    datasets whose node ids are not contiguous.
    """
    if hasattr(text, "read"):
        text = text.read()
    g, _ = load_edge_list_stats(text)
    used = np.unique(g.edges) if g.edge_count else np.array([], dtype=np.int64)
    mapping = {int(old): new for new, old in enumerate(used)}
    remapped = np.array([[mapping[int(u)], mapping[int(v)]] for u, v in g.edges],
                        dtype=np.int64).reshape(-1, 2)
    return Graph(len(used), remapped), mapping


def serialize_edge_list(g: Graph) -> str:
    """Canonical text form; inverse of :func:`load_edge_list` for graphs
    whose max node id appears in an edge."""
    return "".join(f"{u} {v}\n" for u, v in g.edges)


def node_count_marker(text: str) -> int | None:
    """Extract the '# nodes N' marker our own writers emit (a plain comment
    to the loader, but it lets graphs with isolated tail nodes round-trip)."""
    for line in text.splitlines():
        if line.startswith("# nodes "):
            return int(line.split()[2])
    return None


def generate_er(n: int, expected_edges: int, seed: int) -> Graph:
    """Directed G(n, p) with p chosen so the expected edge count matches.

    Each ordered pair (u, v), u != v, is included independently; deterministic
    for a fixed seed.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    max_edges = n * (n - 1)
    if not 0 <= expected_edges <= max_edges:
        raise ValueError(f"expected_edges must be in [0, {max_edges}]")
    p = expected_edges / max_edges
    rng = generator(seed)
    rows = []
    # Row-chunked so memory stays O(chunk * n) on larger graphs.
    chunk = max(1, min(n, 8_000_000 // max(n, 1)))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        mask = rng.random((stop - start, n)) < p
        for i in range(stop - start):
            mask[i, start + i] = False
        uv = np.argwhere(mask)
        uv[:, 0] += start
        rows.append(uv)
    edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges)


def top_degree_nodes(g: Graph, k: int) -> list[int]:
    """k nodes of highest total degree (in + out), ties to the smaller id."""
    if k < 0 or k > g.node_count:
        raise ValueError(f"k must be in [0, {g.node_count}]")
    total = g.in_degrees() + g.out_degrees()
    order = np.lexsort((np.arange(g.node_count), -total))
    return [int(v) for v in order[:k]]
