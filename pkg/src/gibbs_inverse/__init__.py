"""Lattice-gas cluster expansions and recovery of a pair potential from its
one- and two-point cluster functions."""
from .algebra import SequenceFunctional, boltzmann_factors, gamma, gamma_inverse, partition_sum, star
from .expansion import ForwardResult, SeriesDivergenceWarning, TruncationParams, forward_cluster
from .lattice import (
    ClusterSpec,
    CorrelationSpec,
    MayerFunction,
    PairPotential,
    SpecValidationError,
    cluster_to_correlation,
    correlation_to_cluster,
    mayer_from_potential,
    mayer_norm,
    potential_from_mayer,
    validate_cluster_spec,
)
from .oracle import FiniteVolume, GibbsEnsemble, cluster_finite, correlation_finite, partition_function
from .solver import DomainParams, SolveReport, SolverPoint, apply_Q, make_domain, pair_metric, solve, verify_contraction
from .ursell import UrsellCache

__version__ = "0.1.0"

__all__ = [
    "SequenceFunctional",
    "boltzmann_factors",
    "gamma",
    "gamma_inverse",
    "partition_sum",
    "star",
    "ForwardResult",
    "SeriesDivergenceWarning",
    "TruncationParams",
    "forward_cluster",
    "ClusterSpec",
    "CorrelationSpec",
    "MayerFunction",
    "PairPotential",
    "SpecValidationError",
    "cluster_to_correlation",
    "correlation_to_cluster",
    "mayer_from_potential",
    "mayer_norm",
    "potential_from_mayer",
    "validate_cluster_spec",
    "FiniteVolume",
    "GibbsEnsemble",
    "cluster_finite",
    "correlation_finite",
    "partition_function",
    "DomainParams",
    "SolveReport",
    "SolverPoint",
    "apply_Q",
    "make_domain",
    "pair_metric",
    "solve",
    "verify_contraction",
    "UrsellCache",
]
