"""Greedy submodular maximization and query-decision pair generation.

A score function is any callable mapping a node collection to a float.  The
dense bank scores from :mod:`seedcast.kernels` additionally expose an
incremental protocol (``new_state`` / ``gains`` / ``gain_of`` / ``add``) that
greedy uses to evaluate all marginal gains in vectorized passes.

Tie rule everywhere: the candidate with the largest marginal gain wins, exact
ties go to the smallest node id.  Greedy always returns exactly
min(budget, |ground|) elements, padding with zero-gain nodes, so decision
sizes are deterministic.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .contagion import DiffusionModel, sample_bank
from .graph import Graph
from .kernels import TaskKind, objective_score
from .rng import derive, generator

ScoreFunction = Callable[[Sequence[int]], float]

GREEDY_RATIO = 1.0 - 1.0 / math.e

_BRUTE_FORCE_LIMIT = 10 ** 6


@dataclass
class QueryDecisionPair:
    """One (task, query, decision) training/testing sample."""

    task: TaskKind
    X: np.ndarray
    Y: np.ndarray
    budget: int
    ratio_tag: float = field(default=GREEDY_RATIO)

    def __post_init__(self):
        self.task = TaskKind.parse(self.task)
        self.X = np.asarray(self.X, dtype=np.int64)
        self.Y = np.asarray(self.Y, dtype=np.int64)
        if len(self.Y) > self.budget:
            raise ValueError("decision larger than its budget")


def greedy_max(score: ScoreFunction, ground: Sequence[int], budget: int, *,
               lazy: bool = False) -> list[int]:
    """Greedy maximization of a set function under a cardinality budget.

    ``lazy=True`` uses priority-queue (CELF-style) re-evaluation; for
    monotone submodular scores it returns exactly the plain greedy output.
    Dense bank scores take their vectorized path regardless of ``lazy``.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    ground = sorted(set(int(v) for v in ground))
    take = min(budget, len(ground))
    if take == 0:
        return []
    if hasattr(score, "new_state"):
        if ground[0] < 0 or ground[-1] >= score.ground_size:
            raise ValueError("ground contains ids outside the score's node range")
        return _greedy_dense(score, ground, take, lazy)
    if lazy:
        return _greedy_generic_lazy(score, ground, take)
    return _greedy_generic_plain(score, ground, take)


def _greedy_dense(score, ground: list[int], take: int, lazy: bool) -> list[int]:
    state = score.new_state()
    selected: list[int] = []
    if lazy:
        g = score.gains(state)
        heap = [(-g[v], v, 0) for v in ground]
        heapq.heapify(heap)
        while len(selected) < take:
            neg, v, rnd = heapq.heappop(heap)
            if rnd == len(selected):
                selected.append(v)
                score.add(state, v)
            else:
                heapq.heappush(heap, (-score.gain_of(state, v), v, len(selected)))
        return selected
    in_ground = np.zeros(score.ground_size, dtype=bool)
    in_ground[ground] = True
    while len(selected) < take:
        g = score.gains(state)
        g[~in_ground] = -np.inf
        v = int(np.argmax(g))
        selected.append(v)
        in_ground[v] = False
        score.add(state, v)
    return selected


def _greedy_generic_plain(score, ground: list[int], take: int) -> list[int]:
    selected: list[int] = []
    base = float(score(selected))
    remaining = list(ground)
    while len(selected) < take:
        best_gain, best_v = -np.inf, None
        for v in remaining:
            gain = float(score(selected + [v])) - base
            if gain > best_gain:
                best_gain, best_v = gain, v
        selected.append(best_v)
        remaining.remove(best_v)
        base += best_gain
    return selected


def _greedy_generic_lazy(score, ground: list[int], take: int) -> list[int]:
    selected: list[int] = []
    base = float(score(selected))
    heap = []
    for v in ground:
        heap.append((-(float(score([v])) - base), v, 0))
    heapq.heapify(heap)
    while len(selected) < take:
        neg, v, rnd = heapq.heappop(heap)
        if rnd == len(selected):
            selected.append(v)
            base += -neg
        else:
            gain = float(score(selected + [v])) - base
            heapq.heappush(heap, (-gain, v, len(selected)))
    return selected


def brute_force_max(score: ScoreFunction, ground: Sequence[int], budget: int) -> list[int]:
    """Exact maximizer over all subsets of size <= budget (test oracle).

    Ties go to the lexicographically smallest sorted id tuple.  Guards
    against combinatorial explosion.
    """
    ground = sorted(set(int(v) for v in ground))
    budget = min(budget, len(ground))
    total = sum(math.comb(len(ground), j) for j in range(budget + 1))
    if total > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force would enumerate {total} subsets (> {_BRUTE_FORCE_LIMIT})")
    best_val, best_set = -np.inf, ()
    for j in range(budget + 1):
        for combo in itertools.combinations(ground, j):
            val = float(score(list(combo)))
            if val > best_val or (val == best_val and combo < best_set):
                best_val, best_set = val, combo
    return list(best_set)


def _pareto_unit_mean(rng: np.random.Generator, alpha: float = 2.5) -> float:
    # Pareto with shape alpha and scale (alpha-1)/alpha has unit mean.
    xm = (alpha - 1.0) / alpha
    return float(xm * (1.0 + rng.pareto(alpha)))


def _power_law_size(rng: np.random.Generator, scale: float, low: int, high: int) -> int:
    s = _pareto_unit_mean(rng)
    return int(min(max(int(round(scale * s)), low), max(low, high)))


def generate_query(task: TaskKind, g: Graph, seed: int) -> np.ndarray:
    """Random query set whose size follows a heavy-tailed draw.

    Enhancement queries use scale 40 (target audiences), containment queries
    scale 10 (negative seed sets); sizes are clamped to [1, |V|/2] and the
    members are uniform without replacement.
    """
    if g.node_count < 1:
        raise ValueError("graph must be nonempty")
    task = TaskKind.parse(task)
    rng = generator(seed)
    scale = 40.0 if task is TaskKind.DE else 10.0
    size = _power_law_size(rng, scale, 1, g.node_count // 2)
    return np.sort(rng.choice(g.node_count, size=size, replace=False))


def generate_decision_budget(seed: int) -> int:
    """Heavy-tailed decision budget: scale 10, clamped to [1, 50]."""
    return _power_law_size(generator(seed), 10.0, 1, 50)


def generate_pairs(m: DiffusionModel, task: TaskKind, count: int,
                   eval_bank_size: int = 200, seed: int = 0) -> list[QueryDecisionPair]:
    """Generate query-decision samples for one task.

    Decisions are computed by lazy greedy against the bank-average kernel of
    one dedicated evaluation bank sampled from ``m`` (common random numbers
    across all pairs and candidates), the Monte Carlo surrogate of the true
    objective.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if eval_bank_size < 1:
        raise ValueError("eval_bank_size must be >= 1")
    task = TaskKind.parse(task)
    bank = sample_bank(m, eval_bank_size, derive(seed, "pair-eval-bank"))
    ground = range(m.graph.node_count)
    pairs = []
    for i in range(count):
        X = generate_query(task, m.graph, derive(seed, "query", i))
        budget = generate_decision_budget(derive(seed, "budget", i))
        score = objective_score(bank, task, X)
        Y = greedy_max(score, ground, budget, lazy=True)
        pairs.append(QueryDecisionPair(task=task, X=X, Y=np.sort(Y), budget=budget))
    return pairs
