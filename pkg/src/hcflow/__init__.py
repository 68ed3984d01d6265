"""Invariant Hermitian curvature flow on torus-fibered homogeneous models."""

from .cspace import (
    ComplexStructureInput,
    CSpaceModel,
    FactorKind,
    FactorSpec,
    FiberSpec,
    InvariantMetric,
    build_cspace,
    fiber_coeffs_from_complex_structure,
    initial_metric,
)
from .chern import CERealization, calabi_eckmann_realization, verify_chern_tensors
from .flow import (
    GammaSystem,
    KTensor,
    Trajectory,
    base_solution,
    closed_form_solution,
    closed_form_trajectory,
    extinction_time,
    gamma_integral,
    gamma_system,
    integrate_rk4,
    k_tensor,
)
from .limits import (
    CollapseReport,
    LimitForm,
    NormalizedState,
    StaticMetric,
    collapse_structure_ce,
    limit_form,
    normalized_state,
    static_metric,
    static_residual,
)
from .roots import (
    CatalogEntry,
    ResidualReport,
    RootRealization,
    catalog_families,
    catalog_lookup,
    grassmannian_realization,
    verify_root_identities,
)

__version__ = "0.1.0"

__all__ = [
    "CERealization",
    "CSpaceModel",
    "CatalogEntry",
    "CollapseReport",
    "ComplexStructureInput",
    "FactorKind",
    "FactorSpec",
    "FiberSpec",
    "GammaSystem",
    "InvariantMetric",
    "KTensor",
    "LimitForm",
    "NormalizedState",
    "ResidualReport",
    "RootRealization",
    "StaticMetric",
    "Trajectory",
    "base_solution",
    "build_cspace",
    "calabi_eckmann_realization",
    "catalog_families",
    "catalog_lookup",
    "closed_form_solution",
    "closed_form_trajectory",
    "collapse_structure_ce",
    "extinction_time",
    "fiber_coeffs_from_complex_structure",
    "gamma_integral",
    "gamma_system",
    "grassmannian_realization",
    "initial_metric",
    "integrate_rk4",
    "k_tensor",
    "limit_form",
    "normalized_state",
    "static_metric",
    "static_residual",
    "verify_chern_tensors",
    "verify_root_identities",
]
