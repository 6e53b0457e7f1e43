"""Laplace spectra of left-invariant metrics on compact Lie groups, and
isolation checks for bi-invariant metrics."""
from .algebra import (
    AdaptedBasisBlocks, Ideal, LieAlgebra, Metric, ad, adapted_change_of_basis, bi_invariant_metric,
    killing_form, metric_from_onb, onb_gram, quotient_torus_metric, volume_ratio,
)
from .errors import DomainError, HypothesisError, InputError, LiespecError, ResourceError
from .groups import GroupModel, TorusLattice, load_group, preset
from .isolation import (
    frobenius_identity_check, isolation_scan, isometry_distance, isospectral_search, minimality_gap,
    three_eigenvalue_test, trace_block, trace_ratio,
)
from .reps import Irrep, IrrepLabel, enumerate_irreps, product_irrep, su2_irrep, torus_character
from .spectra import (
    EigenvalueSet, Spectrum, eigenvalue_equivalent_up_to_level, eigenvalue_set, hermitian_eigenvalues,
    laplace_block, spectral_discrepancy, spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptedBasisBlocks",
    "Ideal",
    "LieAlgebra",
    "Metric",
    "ad",
    "adapted_change_of_basis",
    "bi_invariant_metric",
    "killing_form",
    "metric_from_onb",
    "onb_gram",
    "quotient_torus_metric",
    "volume_ratio",
    "DomainError",
    "HypothesisError",
    "InputError",
    "LiespecError",
    "ResourceError",
    "GroupModel",
    "TorusLattice",
    "load_group",
    "preset",
    "frobenius_identity_check",
    "isolation_scan",
    "isometry_distance",
    "isospectral_search",
    "minimality_gap",
    "three_eigenvalue_test",
    "trace_block",
    "trace_ratio",
    "Irrep",
    "IrrepLabel",
    "enumerate_irreps",
    "product_irrep",
    "su2_irrep",
    "torus_character",
    "EigenvalueSet",
    "Spectrum",
    "eigenvalue_equivalent_up_to_level",
    "eigenvalue_set",
    "hermitian_eigenvalues",
    "laplace_block",
    "spectral_discrepancy",
    "spectrum",
]
