"""Task kernels on single realizations and their aggregates over banks.

The two management tasks share one shape: given a query X and a decision Y,
a kernel maps a realization to a count of users.

* enhancement (DE): how many members of X are reachable from Y over live
  edges (seeds count as reached at time 0; travel times are irrelevant).
* containment (DC): how many nodes avoid the negative cascade seeded at X
  when a positive cascade spreads from Y.  With per-node smallest-index tie
  breaking this reduces exactly to comparing earliest-arrival times: a node is
  negatively activated iff its arrival time from X is finite and no later than
  its arrival time from Y \\ X.  The reduction is verified against the event
  simulator in the test suite.

The defining expectation of a task objective over a diffusion model is
estimated by Monte Carlo averages of these kernels over realization banks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .contagion import DENSE_NODE_LIMIT, DiffusionModel, Realization, RealizationBank, sample_bank
from .graph import Graph


class TaskKind(enum.Enum):
    DE = "de"
    DC = "dc"

    @classmethod
    def parse(cls, s: "str | TaskKind") -> "TaskKind":
        if isinstance(s, TaskKind):
            return s
        try:
            return cls(s.strip().lower())
        except ValueError:
            raise ValueError(f"unknown task {s!r}; expected 'de' or 'dc'") from None

    def __str__(self) -> str:
        return self.value


def earliest_arrival(r: Realization, sources: Sequence[int]) -> np.ndarray:
    """Minimum summed travel time over live paths from any source.

    Sources score 0; unreachable nodes are inf.  An empty source set yields
    all-inf.
    """
    return r.earliest_times(sources)


def kernel_de(r: Realization, X: Sequence[int], Y: Sequence[int]) -> int:
    """Number of users in X reachable from Y over live edges."""
    x = r.graph.check_nodes(X)
    y = r.graph.check_nodes(Y)
    if x.size == 0 or y.size == 0:
        return 0
    reached = np.isfinite(r.earliest_times(y))
    return int(reached[x].sum())


def kernel_dc(r: Realization, X: Sequence[int], Y: Sequence[int]) -> int:
    """Number of nodes not activated by the negative cascade seeded at X when
    the positive cascade spreads from Y (nodes seeded by both stay negative,
    so the overlap is removed from Y)."""
    g = r.graph
    x = g.check_nodes(X)
    y = np.setdiff1d(g.check_nodes(Y), x)
    dx = r.earliest_times(x)
    dy = r.earliest_times(y)
    infected = np.isfinite(dx) & (dx <= dy)
    return int(g.node_count - infected.sum())


def _kernel(task: TaskKind, r: Realization, X, Y) -> int:
    return kernel_de(r, X, Y) if task is TaskKind.DE else kernel_dc(r, X, Y)


def feature_map(bank: RealizationBank, task: TaskKind, X: Sequence[int], Y: Sequence[int]) -> np.ndarray:
    """Per-realization kernel vector: values[i] = kernel of ``task`` on r_i."""
    task = TaskKind.parse(task)
    if bank._dist is not None:  # reuse dense caches when already built
        return objective_score(bank, task, X).kernel_values(Y)
    return np.array([_kernel(task, r, X, Y) for r in bank.realizations], dtype=np.float64)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float


def estimate_on_bank(bank: RealizationBank, task: TaskKind, X, Y) -> Estimate:
    """Objective estimate over a fixed bank (common random numbers mode)."""
    vals = feature_map(bank, task, X, Y)
    stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return Estimate(float(vals.mean()), stderr)


def estimate_objective(m: DiffusionModel, task: TaskKind, X, Y, n: int, seed: int) -> Estimate:
    """Monte Carlo estimate of the task objective under model ``m``.

    Samples n realizations on position-indexed streams, so the same seed
    always yields the same estimate and estimates for growing n share their
    prefix samples.
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    bank = sample_bank(m, n, seed)
    return estimate_on_bank(bank, task, X, Y)


# --------------------------------------------------------------------------
# Score functions over banks: the greedy targets.
#
# A score maps a decision set Y to a weighted sum (or plain average) of
# per-realization kernels for a fixed query X.  The dense variants keep
# per-realization coverage state so a greedy sweep can evaluate the marginal
# gain of every candidate node in one vectorized pass; they expose the
# incremental protocol (new_state / gains / gain_of / add) consumed by
# optimize.greedy_max.
# --------------------------------------------------------------------------


class _DenseScoreBase:
    """Shared plumbing for vectorized per-bank scores."""

    def __init__(self, bank: RealizationBank, X, weights):
        self.bank = bank
        self.graph: Graph = bank.graph
        self.ground_size = self.graph.node_count
        self.x = self.graph.check_nodes(X)
        K = len(bank)
        if weights is None:
            self.weights = np.full(K, 1.0 / K)
        else:
            self.weights = np.asarray(weights, dtype=np.float64)
            if self.weights.shape != (K,):
                raise ValueError(f"weights must have length {K}")
            if np.any(self.weights < 0):
                raise ValueError("weights must be non-negative")

    def aggregate(self, kernel_values: np.ndarray) -> float:
        return float(self.weights @ kernel_values)

    def __call__(self, Y) -> float:
        return self.aggregate(self.kernel_values(Y))

    def reweighted(self, weights) -> "_DenseScoreBase":
        """Same query and bank caches under different weights (cheap copy)."""
        import copy
        other = copy.copy(self)
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != self.weights.shape:
            raise ValueError("weight length mismatch")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        other.weights = w
        return other

    def kernel_values(self, Y) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError


class _State:
    __slots__ = ("cols",)

    def __init__(self, cols: list[np.ndarray]):
        self.cols = cols


class EnhanceScore(_DenseScoreBase):
    """Y -> weighted count of X-members reachable from Y, per realization."""

    def __init__(self, bank: RealizationBank, X, weights=None):
        super().__init__(bank, X, weights)
        self._reach = bank.reach()

    def kernel_values(self, Y) -> np.ndarray:
        y = self.graph.check_nodes(Y)
        K = len(self.bank)
        if y.size == 0 or self.x.size == 0:
            return np.zeros(K)
        vals = np.empty(K)
        for k in range(K):
            reached = self._reach[k][y].any(axis=0)
            vals[k] = reached[self.x].sum()
        return vals

    def new_state(self) -> _State:
        return _State([self.x.copy() for _ in range(len(self.bank))])

    def gains(self, state: _State) -> np.ndarray:
        g = np.zeros(self.ground_size)
        for k, c in enumerate(state.cols):
            if c.size:
                g += self.weights[k] * self._reach[k][:, c].sum(axis=1)
        return g

    def gain_of(self, state: _State, v: int) -> float:
        total = 0.0
        for k, c in enumerate(state.cols):
            if c.size:
                total += self.weights[k] * self._reach[k][v, c].sum()
        return total

    def add(self, state: _State, v: int) -> None:
        for k, c in enumerate(state.cols):
            if c.size:
                state.cols[k] = c[~self._reach[k][v, c]]


class ContainScore(_DenseScoreBase):
    """Y -> weighted count of nodes kept from the negative cascade at X."""

    def __init__(self, bank: RealizationBank, X, weights=None):
        super().__init__(bank, X, weights)
        self._dist = bank.distances()
        K = len(bank)
        n = self.graph.node_count
        self._dx = np.empty((K, n))
        for k in range(K):
            if self.x.size == 0:
                self._dx[k] = np.inf
            else:
                self._dx[k] = self._dist[k][self.x].min(axis=0)
        self._base_infected = [np.flatnonzero(np.isfinite(self._dx[k])) for k in range(K)]

    def kernel_values(self, Y) -> np.ndarray:
        y = np.setdiff1d(self.graph.check_nodes(Y), self.x)
        K = len(self.bank)
        n = self.graph.node_count
        vals = np.empty(K)
        for k in range(K):
            base = self._base_infected[k]
            if base.size == 0:
                vals[k] = n
                continue
            if y.size == 0:
                vals[k] = n - base.size
                continue
            dy = self._dist[k][y][:, base].min(axis=0)
            still = (self._dx[k][base] <= dy).sum()
            vals[k] = n - still
        return vals

    def new_state(self) -> _State:
        return _State([b.copy() for b in self._base_infected])

    def gains(self, state: _State) -> np.ndarray:
        g = np.zeros(self.ground_size)
        for k, c in enumerate(state.cols):
            if c.size:
                g += self.weights[k] * (self._dist[k][:, c] < self._dx[k][c]).sum(axis=1)
        return g

    def gain_of(self, state: _State, v: int) -> float:
        total = 0.0
        for k, c in enumerate(state.cols):
            if c.size:
                total += self.weights[k] * (self._dist[k][v, c] < self._dx[k][c]).sum()
        return total

    def add(self, state: _State, v: int) -> None:
        for k, c in enumerate(state.cols):
            if c.size:
                state.cols[k] = c[~(self._dist[k][v, c] < self._dx[k][c])]


class KernelScore:
    """Fallback score that evaluates kernels realization by realization.

    Used when the graph is too large for dense caches; correct but paired
    with lazy greedy for tolerable speed.
    """

    def __init__(self, bank: RealizationBank, task: TaskKind, X, weights=None):
        self.bank = bank
        self.task = TaskKind.parse(task)
        self.graph = bank.graph
        self.ground_size = self.graph.node_count
        self.x = self.graph.check_nodes(X)
        K = len(bank)
        self.weights = np.full(K, 1.0 / K) if weights is None else np.asarray(weights, dtype=np.float64)
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")

    def kernel_values(self, Y) -> np.ndarray:
        return np.array([_kernel(self.task, r, self.x, Y) for r in self.bank.realizations],
                        dtype=np.float64)

    def __call__(self, Y) -> float:
        return float(self.weights @ self.kernel_values(Y))

    def reweighted(self, weights) -> "KernelScore":
        import copy
        other = copy.copy(self)
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != self.weights.shape:
            raise ValueError("weight length mismatch")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        other.weights = w
        return other


def objective_score(bank: RealizationBank, task: TaskKind, X, weights=None):
    """Build the greedy-ready score for (bank, task, query).

    ``weights=None`` averages the bank (the Monte Carlo objective estimate);
    an explicit non-negative vector gives the weighted-sum hypothesis score.
    Dense vectorized evaluators are used whenever the graph fits the dense
    cache limit.
    """
    task = TaskKind.parse(task)
    if bank.graph.node_count <= DENSE_NODE_LIMIT:
        cls = EnhanceScore if task is TaskKind.DE else ContainScore
        return cls(bank, X, weights)
    return KernelScore(bank, task, X, weights)
