from .anneal import AnnealConfig, default_beta_range, solve_sa
from .bootstrap import BootstrapConfig, BootstrapResult, bootstrap_solve, sample_subsets
from .exact import MAX_EXACT_VARS, solve_exact
from .greedy import additional_greedy, extract_archive, greedy_order, prefix_candidates
from .sampleset import Sample, SampleSet

__all__ = [
    "AnnealConfig",
    "BootstrapConfig",
    "BootstrapResult",
    "MAX_EXACT_VARS",
    "Sample",
    "SampleSet",
    "additional_greedy",
    "bootstrap_solve",
    "default_beta_range",
    "extract_archive",
    "greedy_order",
    "prefix_candidates",
    "sample_subsets",
    "solve_exact",
    "solve_sa",
]
