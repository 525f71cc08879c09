"""Subsampled greedy and streaming maximisation of submodular functions under
p-extendible and p-matchoid constraints, with exhaustive test oracles.
"""

from ._kernels import BACKEND
from .constraints import (
    BoundedKnapsack,
    GraphicMatroid,
    Matchoid,
    PartitionMatroid,
    UniformMatroid,
    genre_limits,
    measure_extendibility,
    validate_matroid,
)
from .core import (
    GUARANTEES_VOID,
    IndependenceOracle,
    InvariantViolation,
    OracleError,
    RunReport,
    SampleBits,
    ValueOracle,
    arrival_marginal,
    arrival_marginal_sum,
    check_monotone,
    check_nonnegative,
    check_submodular,
    derive_seed,
    draw_sample_bits,
    marginal,
    set_marginal,
)
from .experiment import ExperimentConfig, compare, run
from .audit import audit_suite
from .instances import Instance, generate_instance, load_instance, save_instance
from .objectives import LogDetDPP, ModularFunction, NonPSDError, RecommendationCut, WeightedCoverage, gaussian_kernel
from .offline import (
    OfflineConfig,
    brute_force_opt,
    default_q,
    equivalent_sample_greedy,
    exact_expectation,
    monte_carlo_expectation,
    sample_greedy,
    vanilla_greedy,
)
from .streaming import (
    StreamingConfig,
    equivalent_sample_streaming,
    exchange_candidate,
    sample_streaming,
    streaming_invariant_audit,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundedKnapsack",
    "ExperimentConfig",
    "GUARANTEES_VOID",
    "GraphicMatroid",
    "IndependenceOracle",
    "Instance",
    "InvariantViolation",
    "LogDetDPP",
    "Matchoid",
    "ModularFunction",
    "NonPSDError",
    "OfflineConfig",
    "OracleError",
    "PartitionMatroid",
    "RecommendationCut",
    "RunReport",
    "SampleBits",
    "StreamingConfig",
    "UniformMatroid",
    "ValueOracle",
    "WeightedCoverage",
    "arrival_marginal",
    "arrival_marginal_sum",
    "audit_suite",
    "brute_force_opt",
    "check_monotone",
    "check_nonnegative",
    "check_submodular",
    "compare",
    "default_q",
    "derive_seed",
    "draw_sample_bits",
    "equivalent_sample_greedy",
    "equivalent_sample_streaming",
    "exact_expectation",
    "exchange_candidate",
    "gaussian_kernel",
    "generate_instance",
    "genre_limits",
    "load_instance",
    "marginal",
    "measure_extendibility",
    "monte_carlo_expectation",
    "run",
    "sample_greedy",
    "sample_streaming",
    "save_instance",
    "set_marginal",
    "streaming_invariant_audit",
    "validate_matroid",
    "vanilla_greedy",
]
