"""Evolutionary search where several parties each optimize their own objectives.

The package has three layers: exact primitives (dominance, payoffs, box
indices), optimizers over two problem families (pseudo-Boolean benchmarks and
bi-party shortest paths), and brute-force oracles plus a batch harness that
make every run checkable and replayable.
"""

from .core import Dominance, PayoffValue, Sense, dominance_compare, multiparty_payoff, payoff_component
from .pseudoboolean import (
    BitString,
    PseudoBooleanProblem,
    analytic_fronts,
    run_empmo_payoff,
    run_empmo_random,
    run_empmo_simple,
    run_semo,
)
from .shortestpath import (
    ApproxParams,
    BoxBase,
    WeightedDigraph,
    box_index,
    consensus_archive_bound,
    epsilon_dominates,
    eval_path,
    mutate_path,
    run_demo_sp,
    run_empmo_cons_sp,
    run_empmo_simple_sp,
    ultimatum_consensus,
)
from .oracles import (
    brute_force_pseudoboolean,
    epsilon_bisection,
    epsilon_of_solution,
    exact_path_catalog,
    payoff_runtime_predictor,
)
from .instances import InstanceSpec, fixture_graph, generate_planted_uav, parse_instance, write_instance
from .harness import ExperimentConfig, run_experiment, run_many, run_single, summarize

__version__ = "0.1.0"

__all__ = [
    "ApproxParams",
    "BitString",
    "BoxBase",
    "Dominance",
    "ExperimentConfig",
    "InstanceSpec",
    "PayoffValue",
    "PseudoBooleanProblem",
    "Sense",
    "WeightedDigraph",
    "analytic_fronts",
    "box_index",
    "brute_force_pseudoboolean",
    "consensus_archive_bound",
    "dominance_compare",
    "epsilon_bisection",
    "epsilon_dominates",
    "epsilon_of_solution",
    "eval_path",
    "exact_path_catalog",
    "fixture_graph",
    "generate_planted_uav",
    "multiparty_payoff",
    "mutate_path",
    "parse_instance",
    "payoff_component",
    "payoff_runtime_predictor",
    "run_demo_sp",
    "run_empmo_cons_sp",
    "run_empmo_payoff",
    "run_empmo_random",
    "run_empmo_simple",
    "run_empmo_simple_sp",
    "run_experiment",
    "run_many",
    "run_semo",
    "run_single",
    "summarize",
    "ultimatum_consensus",
    "write_instance",
]
