"""Algebraic data defining the homogeneous model and its invariant metrics.

A model consists of an ordered list of irreducible Hermitian symmetric base
factors (each carrying its complex dimension ``n_j`` and an initial base
coefficient ``A_j``) together with a complex-torus fiber of complex dimension
``k``.  The fiber enters all downstream formulas only through one complex
coefficient vector ``c^j`` of length ``k`` per factor: the expansion of the
fiber component of each factor's central direction in a fixed antiholomorphic
basis.  The vectors may be given directly or derived from an explicit fiber
complex structure via :func:`fiber_coeffs_from_complex_structure`.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._linalg import check_hermitian_pd, freeze
from .errors import (
    DegenerateBasis,
    DimensionTooSmall,
    NonPositiveMetric,
    NotAComplexStructure,
    QuadricNotSupported,
    RealizabilityWarning,
    ShapeMismatch,
    UnknownType,
)

#: max-entry tolerance for the IF^2 = -Id check (inputs are exact or
#: near-exact rational data)
COMPLEX_STRUCTURE_TOL = 1e-10


class FactorKind(enum.Enum):
    """Irreducible Hermitian symmetric factor types (compact type).

    ``QUADRIC`` is listed so it can be recognized and rejected: for quadric
    pairs the isotropy representation is reducible over the reals and the
    one-coefficient metric ansatz on the factor is not the general invariant
    metric.
    """

    GRASSMANNIAN = "grassmannian"   # SU(p+q)/S(U(p)xU(q)), dim p*q
    SP_OVER_U = "sp_over_u"         # Sp(n)/U(n),           dim n(n+1)/2
    SO_OVER_U = "so_over_u"         # SO(2n)/U(n),          dim n(n-1)/2
    E_III = "e_iii"                 # E6/(Spin(10)U(1)),    dim 16
    E_VII = "e_vii"                 # E7/(E6 U(1)),         dim 27
    QUADRIC = "quadric"             # SO(n+2)/(SO(n)xSO(2)), dim n -- rejected


def factor_dimension(kind: FactorKind, p: int | None = None,
                     q: int | None = None, n: int | None = None) -> int:
    """Complex dimension of a factor of the given kind and parameters."""
    if kind is FactorKind.GRASSMANNIAN:
        if p is None or q is None or p < 1 or q < 1:
            raise ShapeMismatch("grassmannian factor needs integer parameters p, q >= 1")
        return p * q
    if kind is FactorKind.SP_OVER_U:
        if n is None or n < 1:
            raise ShapeMismatch("sp_over_u factor needs integer parameter n >= 1")
        return n * (n + 1) // 2
    if kind is FactorKind.SO_OVER_U:
        if n is None or n < 1:
            raise ShapeMismatch("so_over_u factor needs integer parameter n >= 1")
        return n * (n - 1) // 2
    if kind is FactorKind.E_III:
        return 16
    if kind is FactorKind.E_VII:
        return 27
    if kind is FactorKind.QUADRIC:
        if n is None or n < 1:
            raise ShapeMismatch("quadric needs integer parameter n >= 1")
        return n
    raise UnknownType(f"unknown factor kind {kind!r}")


@dataclass(frozen=True)
class FactorSpec:
    """One irreducible Hermitian symmetric base factor.

    ``dim_n`` may be passed explicitly, in which case it is validated against
    the kind's dimension formula; by default it is computed.  ``A`` is the
    initial base coefficient of the factor's invariant metric.
    """

    kind: FactorKind
    A: float
    p: int | None = None
    q: int | None = None
    n: int | None = None
    dim_n: int = field(default=-1)

    def __post_init__(self):
        if self.kind is FactorKind.QUADRIC:
            raise QuadricNotSupported(
                "complex-quadric factors are excluded from the model")
        expected = factor_dimension(self.kind, self.p, self.q, self.n)
        if self.dim_n == -1:
            object.__setattr__(self, "dim_n", expected)
        elif self.dim_n != expected:
            raise ShapeMismatch(
                f"dim_n={self.dim_n} does not match {self.kind.value} parameters "
                f"(expected {expected})")
        if self.dim_n < 2:
            raise DimensionTooSmall(
                f"{self.label()} has complex dimension {self.dim_n} < 2")
        if not (np.isfinite(self.A) and self.A > 0):
            raise NonPositiveMetric(f"initial base coefficient A={self.A} must be positive")

    def label(self) -> str:
        if self.kind is FactorKind.GRASSMANNIAN:
            return f"Grassmannian({self.p},{self.q})"
        if self.kind in (FactorKind.SP_OVER_U, FactorKind.SO_OVER_U, FactorKind.QUADRIC):
            return f"{self.kind.value}({self.n})"
        return self.kind.value

    @staticmethod
    def grassmannian(p: int, q: int, A: float = 1.0) -> "FactorSpec":
        return FactorSpec(FactorKind.GRASSMANNIAN, A, p=p, q=q)

    @staticmethod
    def sp_over_u(n: int, A: float = 1.0) -> "FactorSpec":
        return FactorSpec(FactorKind.SP_OVER_U, A, n=n)

    @staticmethod
    def so_over_u(n: int, A: float = 1.0) -> "FactorSpec":
        return FactorSpec(FactorKind.SO_OVER_U, A, n=n)

    @staticmethod
    def e_iii(A: float = 1.0) -> "FactorSpec":
        return FactorSpec(FactorKind.E_III, A)

    @staticmethod
    def e_vii(A: float = 1.0) -> "FactorSpec":
        return FactorSpec(FactorKind.E_VII, A)


@dataclass(frozen=True)
class FiberSpec:
    """Complex fiber dimension ``k`` and one coefficient vector per factor."""

    k: int
    c: tuple[np.ndarray, ...]   # s vectors of length k, complex

    def __post_init__(self):
        if self.k < 1:
            raise ShapeMismatch(f"fiber dimension k={self.k} must be >= 1")
        vecs = []
        for j, cj in enumerate(self.c):
            arr = np.asarray(cj, dtype=complex).reshape(-1)
            if arr.shape != (self.k,):
                raise ShapeMismatch(
                    f"fiber coefficient vector c[{j}] has length {arr.size}, expected k={self.k}")
            if not np.all(np.isfinite(arr.view(float))):
                raise ShapeMismatch(f"fiber coefficient vector c[{j}] has non-finite entries")
            vecs.append(freeze(arr))
        object.__setattr__(self, "c", tuple(vecs))


@dataclass(frozen=True)
class ComplexStructureInput:
    """Fiber complex structure and the fiber components of the central directions.

    ``Zf_coords[j]`` holds the coordinates of factor ``j``'s central direction
    projected to the fiber, in a chosen real basis of the fiber; ``IF`` is the
    fiber complex structure in the same basis and must satisfy
    ``IF @ IF = -Id`` to within :data:`COMPLEX_STRUCTURE_TOL`.
    """

    Zf_coords: tuple[np.ndarray, ...]   # s real vectors of length 2k
    IF: np.ndarray                      # (2k, 2k) real

    def __post_init__(self):
        IF = np.asarray(self.IF, dtype=float)
        if IF.ndim != 2 or IF.shape[0] != IF.shape[1] or IF.shape[0] % 2 != 0:
            raise ShapeMismatch(f"IF must be a square 2k x 2k matrix, got shape {IF.shape}")
        dim = IF.shape[0]
        err = float(np.max(np.abs(IF @ IF + np.eye(dim))))
        if err > COMPLEX_STRUCTURE_TOL:
            raise NotAComplexStructure(
                f"IF^2 differs from -Id by {err:.3g} (tolerance {COMPLEX_STRUCTURE_TOL:g})")
        coords = []
        for j, z in enumerate(self.Zf_coords):
            v = np.asarray(z, dtype=float).reshape(-1)
            if v.shape != (dim,):
                raise ShapeMismatch(
                    f"Zf_coords[{j}] has length {v.size}, expected 2k={dim}")
            coords.append(freeze(v))
        object.__setattr__(self, "Zf_coords", tuple(coords))
        object.__setattr__(self, "IF", freeze(IF))

    @property
    def k(self) -> int:
        return self.IF.shape[0] // 2


@dataclass(frozen=True)
class CSpaceModel:
    """Validated model: base factors, fiber data, and total dimension.

    ``ce_blocks``, when present, tags the model as a product of
    Calabi-Eckmann-type blocks by listing the factor-index pairs (0-based)
    belonging to each block; it is consumed by the collapse-structure report.
    """

    factors: tuple[FactorSpec, ...]
    fiber: FiberSpec
    total_dim_m: int = field(default=-1)
    ce_blocks: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if not self.factors:
            raise ShapeMismatch("at least one base factor is required")
        expected = self.fiber.k + sum(f.dim_n for f in self.factors)
        if self.total_dim_m == -1:
            object.__setattr__(self, "total_dim_m", expected)
        elif self.total_dim_m != expected:
            raise ShapeMismatch(
                f"total_dim_m={self.total_dim_m} inconsistent with factors and fiber "
                f"(expected {expected})")
        if len(self.fiber.c) != len(self.factors):
            raise ShapeMismatch(
                f"{len(self.fiber.c)} fiber coefficient vectors for "
                f"{len(self.factors)} factors")

    @property
    def s(self) -> int:
        return len(self.factors)

    @property
    def k(self) -> int:
        return self.fiber.k

    @property
    def A(self) -> tuple[float, ...]:
        return tuple(f.A for f in self.factors)

    @property
    def dims_n(self) -> tuple[int, ...]:
        return tuple(f.dim_n for f in self.factors)

    @property
    def fiber_realizable(self) -> bool:
        """Whether the coefficient vectors can come from an honest fiber complex
        structure: their real span must have real dimension ``2k``."""
        stacked = np.array([np.concatenate([cj.real, cj.imag]) for cj in self.fiber.c])
        return bool(np.linalg.matrix_rank(stacked, tol=1e-12) == 2 * self.k)


@dataclass(frozen=True)
class InvariantMetric:
    """One point of the flow: positive base coefficients and a Hermitian
    positive-definite fiber matrix."""

    h_base: tuple[float, ...]
    H_fiber: np.ndarray

    def __post_init__(self):
        h = tuple(float(x) for x in self.h_base)
        if not h:
            raise NonPositiveMetric("h_base must be non-empty")
        for i, hi in enumerate(h):
            if not (np.isfinite(hi) and hi > 0):
                raise NonPositiveMetric(f"base coefficient h[{i}]={hi} must be positive")
        H = np.asarray(self.H_fiber, dtype=complex)
        check_hermitian_pd(H, "fiber metric")
        object.__setattr__(self, "h_base", h)
        object.__setattr__(self, "H_fiber", freeze(H))

    @property
    def s(self) -> int:
        return len(self.h_base)

    @property
    def k(self) -> int:
        return self.H_fiber.shape[0]

    def scaled(self, factor: float) -> "InvariantMetric":
        return InvariantMetric(tuple(factor * x for x in self.h_base),
                               factor * self.H_fiber)


def build_cspace(factors, fiber: FiberSpec,
                 ce_blocks=None, warn_unrealizable: bool = True) -> CSpaceModel:
    """Assemble and validate a model from factor and fiber data.

    Raises the specific validation error for quadric factors, too-small
    factor dimensions, or mismatched fiber coefficient shapes.  Coefficient
    data that cannot come from an honest fiber complex structure is allowed
    but reported through :class:`RealizabilityWarning`.
    """
    factors = tuple(factors)
    if ce_blocks is not None:
        ce_blocks = tuple((int(a), int(b)) for a, b in ce_blocks)
    model = CSpaceModel(factors=factors, fiber=fiber, ce_blocks=ce_blocks)
    if warn_unrealizable and not model.fiber_realizable:
        warnings.warn(
            "fiber coefficient vectors do not span the fiber over the reals; "
            "no fiber complex structure realizes this data",
            RealizabilityWarning, stacklevel=2)
    return model


def _holomorphic_frame(IF: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Columns of the fixed complex fiber frame and its conjugate.

    The frame is ``V_a = (X_a - i IF X_a)/2`` for the first ``k`` vectors
    ``X_a`` of the chosen real basis; this is the documented convention that
    pins down the coefficient vectors uniquely.
    """
    dim = IF.shape[0]
    k = dim // 2
    X = np.eye(dim)[:, :k]
    V = 0.5 * (X - 1j * (IF @ X))
    return V, V.conj()


def fiber_coeffs_from_complex_structure(cs: ComplexStructureInput,
                                        factors) -> FiberSpec:
    """Derive the fiber coefficient vectors from an explicit complex structure.

    For each factor the antiholomorphic projection ``v -> (v + i IF v)/2`` of
    the fiber component of its central direction is expanded in the conjugate
    frame induced by the first ``k`` real basis vectors, and scaled by
    ``-i/(2 n_j)``.

    Raises
    ------
    DegenerateBasis
        If the first ``k`` real basis vectors and their IF-images fail to
        span the fiber, so no frame is induced.
    ShapeMismatch
        If the number of coordinate vectors differs from the number of factors.
    """
    factors = tuple(factors)
    if len(cs.Zf_coords) != len(factors):
        raise ShapeMismatch(
            f"{len(cs.Zf_coords)} central-direction vectors for {len(factors)} factors")
    k = cs.k
    V, Vbar = _holomorphic_frame(cs.IF)
    basis = np.hstack([V, Vbar])        # (2k, 2k) complex
    sv = np.linalg.svd(basis, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DegenerateBasis(
            "the first k real basis vectors and their IF-images do not span the fiber")
    coeffs = []
    for f, z in zip(factors, cs.Zf_coords):
        v01 = 0.5 * (z + 1j * (cs.IF @ z))
        coef = np.linalg.solve(basis, v01)
        # the (1,0) part of an antiholomorphic vector vanishes identically
        w = coef[k:]
        coeffs.append((-1j / (2.0 * f.dim_n)) * w)
    return FiberSpec(k=k, c=tuple(coeffs))


def initial_metric(model: CSpaceModel, H0=None) -> InvariantMetric:
    """Initial metric with base coefficients taken from the factors' ``A``
    values and fiber matrix ``H0`` (identity by default)."""
    if H0 is None:
        H0 = np.eye(model.k, dtype=complex)
    H0 = np.asarray(H0, dtype=complex)
    if H0.shape != (model.k, model.k):
        raise ShapeMismatch(
            f"initial fiber matrix has shape {H0.shape}, expected ({model.k}, {model.k})")
    return InvariantMetric(h_base=model.A, H_fiber=H0)
