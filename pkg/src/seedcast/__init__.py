"""seedcast: seed-set decision making for social contagion management.

Build a diffusion model over a directed graph, sample realization banks,
optimize enhancement/containment decisions by lazy greedy, and train
hypothesis weights from query-decision pairs of one task to solve the other.
"""

from .graph import Graph, generate_er, load_edge_list, load_edge_list_compact, \
    serialize_edge_list, top_degree_nodes
from .contagion import ActivationOutcome, CascadeSeeds, DiffusionModel, Realization, \
    RealizationBank, build_true_model, perturb_model, random_model, sample_bank, \
    sample_realization, simulate
from .kernels import Estimate, TaskKind, earliest_arrival, estimate_objective, \
    estimate_on_bank, feature_map, kernel_dc, kernel_de, objective_score
from .optimize import GREEDY_RATIO, QueryDecisionPair, brute_force_max, \
    generate_decision_budget, generate_pairs, generate_query, greedy_max
from .learner import HypothesisWeights, TrainerConfig, empirical_risk, gamma_value, \
    hypothesis_score, infer, margin_membership, pac_bound, sample_final_weights, \
    separation_oracle, train
from .harness import EvaluationReport, ExperimentConfig, NaiveBayesModel, hd_predict, \
    nb_predict, nb_train, performance_ratio, random_predict, ratio_on_bank, run_experiment

__version__ = "0.1.0"

__all__ = [
    "Graph", "generate_er", "load_edge_list", "load_edge_list_compact",
    "serialize_edge_list", "top_degree_nodes",
    "ActivationOutcome", "CascadeSeeds", "DiffusionModel", "Realization",
    "RealizationBank", "build_true_model", "perturb_model", "random_model",
    "sample_bank", "sample_realization", "simulate",
    "Estimate", "TaskKind", "earliest_arrival", "estimate_objective",
    "estimate_on_bank", "feature_map", "kernel_dc", "kernel_de", "objective_score",
    "GREEDY_RATIO", "QueryDecisionPair", "brute_force_max",
    "generate_decision_budget", "generate_pairs", "generate_query", "greedy_max",
    "HypothesisWeights", "TrainerConfig", "empirical_risk", "gamma_value",
    "hypothesis_score", "infer", "margin_membership", "pac_bound",
    "sample_final_weights", "separation_oracle", "train",
    "EvaluationReport", "ExperimentConfig", "NaiveBayesModel", "hd_predict",
    "nb_predict", "nb_train", "performance_ratio", "random_predict",
    "ratio_on_bank", "run_experiment",
]
