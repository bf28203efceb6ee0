"""Multi-start sample-persistence variable reduction for Ising/QUBO problems."""

from .model import (IsingProblem, QuboProblem, Sample, evaluate_energy, ising_to_qubo,
                    parse_instance, qubo_to_ising, write_instance)
from .multistart import MultiStartParams, MultiStartResult, run_multistart, run_restarts
from .reduction import (ReducedProblem, apply_fix, connected_components, eliminate_leaves,
                        extend_solution, merge_component_solutions)
from .rng import derive_seed
from .samplers import SamplerSpec, brute_force_sample, sample, sample_pticm, sample_sa
from .spvar import SpvarParams, adaptive_elite, correlation_prefix, spvar_fix

__version__ = "0.1.0"

__all__ = [
    "IsingProblem", "QuboProblem", "Sample", "evaluate_energy", "ising_to_qubo", "parse_instance",
    "qubo_to_ising", "write_instance", "MultiStartParams", "MultiStartResult", "run_multistart",
    "run_restarts", "ReducedProblem", "apply_fix", "connected_components", "eliminate_leaves",
    "extend_solution", "merge_component_solutions", "derive_seed", "SamplerSpec",
    "brute_force_sample", "sample", "sample_pticm", "sample_sa", "SpvarParams", "adaptive_elite",
    "correlation_prefix", "spvar_fix",
]
