"""Cross-task structured learning over realization banks.

The hypothesis is a non-negative weighted combination of per-realization
kernels; because each kernel is monotone submodular in the decision, so is
every hypothesis, and lazy greedy carries the usual (1 - 1/e) guarantee for
both inference and the separation problem used in training.

Training consumes query-decision pairs of the *source* task and tunes the
weights so the source-task score ranks the sample decisions highly; the same
weights then drive greedy inference on the *target* task.  Two solver modes
share one projected-subgradient core: a plain online pass over samples, and a
cutting-plane variant that accumulates per-sample working sets of violated
constraints and re-solves the restricted problem.

The module also carries the pure-arithmetic generalization diagnostics (the
margin set, the empirical risk it induces, the scale factor for the Gaussian
weight resampling, and the risk upper bound).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .contagion import RealizationBank
from .kernels import TaskKind, feature_map, objective_score
from .optimize import GREEDY_RATIO, QueryDecisionPair, greedy_max
from .rng import generator


@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters of the weight trainer.

    ``margin_coeff`` is the constant scaling the reference decision's score in
    each constraint (the compound inference-ratio/margin coefficient treated
    as a single tunable).  ``tolerance`` is relative: a constraint counts as
    violated when its slack exceeds tolerance * max(1, reference score).
    """

    c: float = 0.01
    margin_coeff: float = 1.0
    method: str = "subgradient"
    epochs: int = 5
    step_scale: float = 0.1
    tolerance: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0 < self.margin_coeff <= 1:
            raise ValueError("margin_coeff must be in (0, 1]")
        if self.method not in ("subgradient", "n_slack"):
            raise ValueError("method must be 'subgradient' or 'n_slack'")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.step_scale <= 0 or self.tolerance < 0:
            raise ValueError("step_scale must be positive, tolerance non-negative")


@dataclass
class HypothesisWeights:
    """A weight vector over a realization bank plus its task binding."""

    w: np.ndarray
    bank: RealizationBank
    source_task: TaskKind
    target_task: TaskKind
    config: TrainerConfig | None = None
    history: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.shape != (len(self.bank),):
            raise ValueError("weight length must equal bank size")
        if np.any(self.w < 0):
            raise ValueError("weights must be non-negative")
        self.source_task = TaskKind.parse(self.source_task)
        self.target_task = TaskKind.parse(self.target_task)

    @classmethod
    def initial(cls, bank: RealizationBank, source_task, target_task) -> "HypothesisWeights":
        """The untrained starting point: all-ones weights."""
        return cls(np.ones(len(bank)), bank, source_task, target_task)

    def scaled(self, c: float) -> "HypothesisWeights":
        if c <= 0:
            raise ValueError("scale must be positive")
        return HypothesisWeights(self.w * c, self.bank, self.source_task,
                                 self.target_task, self.config)


def hypothesis_score(h: HypothesisWeights, task, X, Y) -> float:
    """Weighted kernel sum for the given task (source or target of ``h``)."""
    task = TaskKind.parse(task)
    if task not in (h.source_task, h.target_task):
        raise ValueError(f"hypothesis is bound to tasks {h.source_task}/{h.target_task}, not {task}")
    return float(h.w @ feature_map(h.bank, task, X, Y))


def separation_oracle(w: np.ndarray, bank: RealizationBank, source_task, X,
                      budget: int) -> list[int]:
    """Greedy maximizer of the source-task score: the most-violated-constraint
    search used during training."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    score = objective_score(bank, TaskKind.parse(source_task), X, w)
    return greedy_max(score, range(bank.graph.node_count), budget, lazy=True)


def infer(h: HypothesisWeights, X, k: int) -> list[int]:
    """Greedy decision for a target-task query under the hypothesis score.

    Scaling the weights by any positive constant leaves the output unchanged
    (the greedy trajectory depends only on gain ratios and the id tie rule).
    """
    if k < 0:
        raise ValueError("budget must be >= 0")
    score = objective_score(h.bank, h.target_task, X, h.w)
    return greedy_max(score, range(h.bank.graph.node_count), k, lazy=True)


# --------------------------------------------------------------------------
# Training
# --------------------------------------------------------------------------


class _Sample:
    """Per-pair precomputation shared by every pass: the bound score object
    (dense caches built once) and the reference feature vector."""

    def __init__(self, bank: RealizationBank, source_task: TaskKind, pair: QueryDecisionPair):
        self.pair = pair
        self.score = objective_score(bank, source_task, pair.X, np.ones(len(bank)))
        self.phi_ref = self.score.kernel_values(pair.Y)
        self.budget = len(pair.Y)


def _violation(w: np.ndarray, sample: _Sample, phi_hat: np.ndarray, cstar: float) -> tuple[float, float]:
    """Slack of the most-violated constraint and its relative size."""
    ref = cstar * float(w @ sample.phi_ref)
    xi = max(0.0, float(w @ phi_hat) - ref)
    return xi, xi / max(1.0, ref)


def train(pairs: Sequence[QueryDecisionPair], bank: RealizationBank, source_task,
          target_task, cfg: TrainerConfig | None = None) -> HypothesisWeights:
    """Fit hypothesis weights from source-task query-decision pairs.

    Minimizes J(w) = ||w||^2 + (C/m) * sum_i xi_i(w) over w >= 0, where
    xi_i(w) is the hinge slack of sample i against the greedy separation
    oracle, with the reference decision's score scaled by ``margin_coeff``.
    Weights start at all-ones; steps are projected subgradient with rate
    step_scale / sqrt(t).  Training tracks J at every epoch boundary and
    returns the best iterate, so J never ends above its starting value.

    With method="n_slack" the oracle instead grows per-sample working sets of
    violated constraints and the same subgradient core re-solves the
    restricted problem between oracle passes.
    """
    cfg = cfg or TrainerConfig()
    source_task = TaskKind.parse(source_task)
    target_task = TaskKind.parse(target_task)
    pairs = list(pairs)
    if not pairs:
        raise ValueError("training requires at least one pair")
    for p in pairs:
        if p.task is not source_task:
            raise ValueError(f"pair task {p.task} does not match source task {source_task}")

    samples = [_Sample(bank, source_task, p) for p in pairs]
    m = len(samples)
    K = len(bank)
    w = np.ones(K)
    cstar, C = cfg.margin_coeff, cfg.c

    def oracle_pass(w: np.ndarray) -> tuple[float, float, list[np.ndarray]]:
        """J(w), max relative violation, and the per-sample oracle features."""
        xi_sum, max_rel = 0.0, 0.0
        hats = []
        for s in samples:
            y_hat = greedy_max(s.score.reweighted(w), range(s.score.ground_size),
                               s.budget, lazy=True)
            phi_hat = s.score.kernel_values(y_hat)
            hats.append(phi_hat)
            xi, rel = _violation(w, s, phi_hat, cstar)
            xi_sum += xi
            max_rel = max(max_rel, rel)
        return float(w @ w) + C * xi_sum / m, max_rel, hats

    step_count = 0

    def subgradient_step(w: np.ndarray, s: _Sample, phi_hat: np.ndarray) -> np.ndarray:
        nonlocal step_count
        step_count += 1
        eta = cfg.step_scale / math.sqrt(step_count)
        grad = 2.0 * w / m + (C / m) * (phi_hat - cstar * s.phi_ref)
        return np.maximum(w - eta * grad, 0.0)

    j_curve = []
    j0, rel0, hats0 = oracle_pass(w)
    j_curve.append(j0)
    best_j, best_w = j0, w.copy()

    if cfg.method == "subgradient":
        for _ in range(cfg.epochs):
            if rel0 <= cfg.tolerance:
                break
            for s in samples:
                y_hat = greedy_max(s.score.reweighted(w), range(s.score.ground_size),
                                   s.budget, lazy=True)
                phi_hat = s.score.kernel_values(y_hat)
                _, rel = _violation(w, s, phi_hat, cstar)
                if rel > cfg.tolerance:
                    w = subgradient_step(w, s, phi_hat)
            j, rel0, _ = oracle_pass(w)
            j_curve.append(j)
            if j < best_j:
                best_j, best_w = j, w.copy()
    else:  # n_slack cutting plane
        working: list[list[np.ndarray]] = [[] for _ in samples]
        for _ in range(cfg.epochs):
            added = False
            for i, (s, phi_hat) in enumerate(zip(samples, hats0)):
                _, rel = _violation(w, s, phi_hat, cstar)
                if rel > cfg.tolerance and not any(
                        np.array_equal(phi_hat, old) for old in working[i]):
                    working[i].append(phi_hat)
                    added = True
            if not added:
                break
            w = _solve_restricted(w, samples, working, cstar, subgradient_step, cfg)
            j, rel0, hats0 = oracle_pass(w)
            j_curve.append(j)
            if j < best_j:
                best_j, best_w = j, w.copy()
            if rel0 <= cfg.tolerance:
                break

    return HypothesisWeights(best_w, bank, source_task, target_task, cfg,
                             history={"objective_curve": j_curve, "objective_best": best_j})


_RESTRICTED_PASS_CAP = 100


def _solve_restricted(w, samples, working, cstar, step, cfg) -> np.ndarray:
    """Projected subgradient over the accumulated constraint sets only."""
    for _ in range(_RESTRICTED_PASS_CAP):
        worst_rel = 0.0
        for s, phis in zip(samples, working):
            if not phis:
                continue
            scores = [float(w @ phi) for phi in phis]
            phi_hat = phis[int(np.argmax(scores))]
            _, rel = _violation(w, s, phi_hat, cstar)
            worst_rel = max(worst_rel, rel)
            if rel > cfg.tolerance:
                w = step(w, s, phi_hat)
        if worst_rel <= cfg.tolerance:
            break
    return w


# --------------------------------------------------------------------------
# Generalization diagnostics (pure arithmetic plus small enumerations)
# --------------------------------------------------------------------------


def gamma_value(w_prior: np.ndarray, m: int, beta: float, alpha: float = GREEDY_RATIO) -> float:
    """Scale factor for resampling final weights around the prior.

    gamma = (alpha^2 + 1) / (min_p |w_p| * beta * alpha) * sqrt(2 ln(2mK / ||w||^2)).
    Requires 0 < beta < alpha, a strictly nonzero prior vector, and
    2mK > ||w||^2 so the logarithm is positive.
    """
    w = np.asarray(w_prior, dtype=np.float64)
    min_abs = float(np.min(np.abs(w)))
    if min_abs <= 0:
        raise ValueError("prior weights must all be nonzero")
    if not 0 < beta < alpha:
        raise ValueError("beta must lie in (0, alpha)")
    norm_sq = float(w @ w)
    arg = 2.0 * m * len(w) / norm_sq
    if arg <= 1.0:
        raise ValueError("2mK must exceed ||w||^2")
    return (alpha ** 2 + 1.0) / (min_abs * beta * alpha) * math.sqrt(2.0 * math.log(arg))


def sample_final_weights(w_prior: np.ndarray, gamma: float, seed: int) -> np.ndarray:
    """Draw final weights from an isotropic unit-variance Gaussian centered at
    gamma * prior, clipped at zero to preserve non-negativity."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    w = np.asarray(w_prior, dtype=np.float64)
    draw = gamma * w + generator(seed).standard_normal(w.shape)
    return np.maximum(draw, 0.0)


def margin_membership(h: HypothesisWeights, X, Y, Y_ref, beta: float,
                      alpha: float = GREEDY_RATIO) -> bool:
    """Whether Y falls in the margin set around the stored inference output:
    alpha * H(X, Y_ref) - H(X, Y) <= beta * H(X, Y_ref)."""
    score = objective_score(h.bank, h.target_task, X, h.w)
    s_ref = score(Y_ref)
    return alpha * s_ref - score(Y) <= beta * s_ref


_ENUM_LIMIT = 10 ** 6


def empirical_risk(h: HypothesisWeights, pairs: Sequence[QueryDecisionPair], beta: float,
                   alpha: float = GREEDY_RATIO,
                   loss: Callable[[np.ndarray, tuple], float] | None = None) -> float:
    """Margin-based empirical risk by exhaustive enumeration of the decision
    space (small instances only).

    For each sample, enumerates every decision within the sample's budget,
    keeps those inside the margin set around greedy inference, and takes the
    worst loss; the result is averaged over samples.  ``loss`` maps
    (query, decision tuple) to [0, 1]; default is the zero-one loss against
    the sample decision.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empirical risk needs at least one pair")

    n = h.bank.graph.node_count
    total = 0.0
    for pair in pairs:
        if loss is None:
            ref_set = set(int(v) for v in pair.Y)
            pair_loss = lambda X, Y: 0.0 if set(Y) == ref_set else 1.0  # zero-one
        else:
            pair_loss = loss
        budget = len(pair.Y)
        count = sum(math.comb(n, j) for j in range(budget + 1))
        if count > _ENUM_LIMIT:
            raise ValueError(f"margin enumeration would visit {count} sets (> {_ENUM_LIMIT})")
        score = objective_score(h.bank, h.target_task, pair.X, h.w)
        y_ref = greedy_max(score, range(n), budget, lazy=True)
        s_ref = score(y_ref)
        worst = 0.0
        for j in range(budget + 1):
            for combo in itertools.combinations(range(n), j):
                if alpha * s_ref - score(list(combo)) <= beta * s_ref:
                    worst = max(worst, float(pair_loss(pair.X, combo)))
                    if worst >= 1.0:
                        break
            if worst >= 1.0:
                break
        total += worst
    return total / len(pairs)


def pac_bound(em_risk: float, w_prior: np.ndarray, m: int, gamma: float, delta: float) -> float:
    """Upper confidence bound on the generalization risk:
    em_risk + ||w||^2 / m + sqrt((gamma^2 ||w||^2 / 2 + ln(m/delta)) / (2(m-1)))."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    w = np.asarray(w_prior, dtype=np.float64)
    norm_sq = float(w @ w)
    return (em_risk + norm_sq / m
            + math.sqrt((gamma ** 2 * norm_sq / 2.0 + math.log(m / delta)) / (2.0 * (m - 1))))
