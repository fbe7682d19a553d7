"""Recursive max-linear models on DAGs.

Tropical (max-times) algebra, model construction and identifiability,
simulation, ratio-based estimation, structure learning and innovation
recovery.  Node labels are 1-based everywhere in the public API.
"""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .errors import (
    InsufficientDataError,
    InvalidArgumentError,
    InvariantViolation,
    MalformedDataError,
    MalformedGraphError,
    MaxLinError,
    TooManyPathsError,
)
from .estimate import (
    EstimateReport,
    LearnedMatrix,
    atom_probability,
    bhat,
    breve_edges,
    learn_structure,
    recover_innovation_cdfs,
    required_sample_size,
)
from .gmle import PartitionLabel, Region, Verdict, classify, conditional_cdf, gmle_compare, rho, rho_local
from .graph import Dag, all_paths, ancestors, parents, reachability_matrix, topological_order
from .model import (
    RatioProfile,
    SupportKind,
    WeightedDag,
    class_equivalence_oracle,
    class_membership,
    minimum_ml_dag,
    ml_matrix_from_weights,
    ratio_profile,
    validate_ml_matrix,
)
from .simulate import (
    Frechet,
    InnovationSpec,
    LogNormal,
    Pareto,
    SampleSet,
    Uniform,
    push_forward,
    sample_innovations,
    simulate_model,
)
from .tropical import closure, elementwise_max, odot, odot_power
