"""Online assortment selection with fixed-threshold policies.

The package is organised around four layers: choice models (``choice``,
``models``), instances and their randomness (``instance``), the offline
benchmark (``oracle``) and the online side (``policies``, ``harness``).
"""

from seqassort.choice import (
    OUTSIDE,
    Gam,
    GamAttraction,
    Lcf,
    LcfParams,
    Mnl,
    MnlAttraction,
    RealizedItem,
    Realization,
    Rum,
    RumDistIndex,
    choice_prob,
    purchase_prob,
    total_revenue,
)
from seqassort.conditions import (
    Condition,
    ConditionReport,
    check_condition1,
    check_condition2,
    check_condition3,
    check_substitutable,
)
from seqassort.harness import (
    EvaluationReport,
    Given,
    UniformRandom,
    WorstCase,
    exact_evaluate,
    mc_evaluate,
    min_adversary_value,
    run_once,
    worst_case_order,
)
from seqassort.instance import (
    Atom,
    Cardinality,
    Instance,
    ItemDistribution,
    Knapsack,
    Unconstrained,
    enumerate_joint,
    sample,
    validate,
)
from seqassort.lowerbounds import evaluate_thm53, make_lower_bound_thm53, make_reduction_appB
from seqassort.oracle import OptStats, OracleResult, opt_brute, opt_mnl_revenue_ordered, opt_stats
from seqassort.policies import (
    Alg1,
    Alg2,
    Alg3,
    Alg4,
    ApproxOracle,
    ConvexPI,
    Exact,
    External,
    MonteCarlo,
    Thresholds,
    build_policy,
    compute_beta,
    compute_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "Alg1",
    "Alg2",
    "Alg3",
    "Alg4",
    "ApproxOracle",
    "Atom",
    "Cardinality",
    "Condition",
    "ConditionReport",
    "ConvexPI",
    "EvaluationReport",
    "Exact",
    "External",
    "Gam",
    "GamAttraction",
    "Given",
    "Instance",
    "ItemDistribution",
    "Knapsack",
    "Lcf",
    "LcfParams",
    "Mnl",
    "MnlAttraction",
    "MonteCarlo",
    "OUTSIDE",
    "OptStats",
    "OracleResult",
    "Realization",
    "RealizedItem",
    "Rum",
    "RumDistIndex",
    "Thresholds",
    "Unconstrained",
    "UniformRandom",
    "WorstCase",
    "build_policy",
    "check_condition1",
    "check_condition2",
    "check_condition3",
    "check_substitutable",
    "choice_prob",
    "compute_beta",
    "compute_threshold",
    "enumerate_joint",
    "evaluate_thm53",
    "exact_evaluate",
    "make_lower_bound_thm53",
    "make_reduction_appB",
    "mc_evaluate",
    "min_adversary_value",
    "opt_brute",
    "opt_mnl_revenue_ordered",
    "opt_stats",
    "purchase_prob",
    "run_once",
    "sample",
    "total_revenue",
    "validate",
    "worst_case_order",
]
