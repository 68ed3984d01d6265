"""Extinction-limit structure, static metrics, and the normalized flow.

As the flow approaches its extinction time ``T = 2 min(A)`` the metric
degenerates along a computable subspace.  The limit fiber block is obtained
algebraically, never by evaluating the closed form at ``T`` (where it is
singular): the inverse fiber metric splits into a part that blows up along
the span ``Z_p`` of the collapsed factors' coefficient vectors and a part
with a finite positive-definite limit, and a Schur-type block inversion in
an eigenbasis of the collapsed coupling sum yields the limit directly.

Static metrics (flow fixed points up to the scaling constant ``lambda``) are
unique up to homothety whenever the total coupling matrix is invertible, and
the volume-normalized flow converges to the static metric paired with the
determinant constant of the model when all initial base coefficients agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import freeze, hermitian_inverse, hermitize
from .cspace import CSpaceModel, InvariantMetric
from .errors import (
    NoStaticForNonpositiveLambda,
    NotCEProduct,
    PastExtinction,
    ThetaSingular,
    UnequalA,
)
from .flow import (
    DEFAULT_TIE_TOL,
    _check_shapes,
    closed_form_solution,
    extinction_time,
    fiber_inverse_closed_form,
    gamma_integral,
    gamma_system,
    k_tensor,
)

#: absolute eigenvalue threshold (on unit-scaled matrices) deciding numerical
#: rank; limit matrices are exact-rank by theory, this only absorbs noise
RANK_TOL = 1e-10


@dataclass(frozen=True)
class LimitForm:
    """The degenerate metric reached at the extinction time.

    ``base_limits[i]`` vanishes exactly for collapsed factors (``i`` in
    ``p_set``) and equals ``A_i - min(A)`` otherwise.  ``fiber_limit`` is
    Hermitian PSD with kernel exactly the span of ``Zp_basis`` (the
    orthonormalized coefficient vectors of the collapsed factors), and its
    restriction to the orthogonal complement is positive definite with rank
    ``fiber_rank = k - q``.
    """

    T: float
    p_set: tuple[int, ...]
    base_limits: tuple[float, ...]
    Zp_basis: np.ndarray            # (k, q) orthonormal columns
    fiber_limit: np.ndarray         # (k, k) Hermitian PSD
    fiber_rank: int
    mu: tuple[float, ...]           # nonzero eigenvalues of the collapsed coupling sum
    kernel_description: str
    collapsing_subgroup: str

    def __post_init__(self):
        object.__setattr__(self, "Zp_basis", freeze(np.asarray(self.Zp_basis, dtype=complex)))
        object.__setattr__(self, "fiber_limit", freeze(np.asarray(self.fiber_limit, dtype=complex)))


@dataclass(frozen=True)
class StaticMetric:
    """A flow fixed point: ``-K(metric) = lam * metric``.

    The base coefficients are all ``1/(2 lam)`` and the fiber matrix is
    ``(1/(4 lam))`` times the inverse total coupling matrix; ``residual`` is
    the verified sup-norm defect of the fixed-point equation.
    """

    lam: float
    metric: InvariantMetric
    residual: float


@dataclass(frozen=True)
class NormalizedState:
    """Volume-one rescaling of the flow at one time.

    ``xi_of_t`` is the volume factor ``(V^-1 (2A-t)^k det H^-1(t))^(1/m)``
    and ``c_of_t = xi_of_t / (2A - t)`` the homothety making the metric unit
    volume; ``xi_limit`` is its limit ``(V^-1 4^k det Theta_s)^(1/m)``.
    """

    t: float
    c_of_t: float
    xi_of_t: float
    normalized_metric: InvariantMetric
    V_const: float
    xi_limit: float


@dataclass(frozen=True)
class CollapseReport:
    """Product decomposition of the collapsed space for a tagged product of
    Calabi-Eckmann-type blocks: ``sigma`` pairs the factors sharing a fiber
    direction, ``I1`` are surviving factors whose partner also survives (they
    keep their torus fiber), ``I2`` are surviving factors whose partner
    collapsed (they flatten to the symmetric-space base)."""

    sigma: tuple[int, ...]
    I1: tuple[int, ...]
    I2: tuple[int, ...]
    p_set: tuple[int, ...]
    description: str


def limit_form(model: CSpaceModel, init: InvariantMetric,
               tie_tol: float = DEFAULT_TIE_TOL) -> LimitForm:
    """Compute the extinction-time limit of the flow algebraically.

    Algorithm: (1) extinction time and collapsed index set; (2) eigenbasis of
    the collapsed coupling sum, whose nonzero eigenvectors span the fiber
    kernel plane; (3) finite limit of the non-collapsed part of the inverse
    fiber metric; (4) block inversion of its trailing block in that
    eigenbasis.  Degenerate kernels (q = 0 and q = k) are both legal.
    """
    _check_shapes(model, init)
    A = init.h_base
    T, p_set = extinction_time(A, tie_tol)
    A_min = T / 2.0
    gs = gamma_system(model)
    k = model.k

    Theta_p = np.zeros((k, k), dtype=complex)
    for j in p_set:
        Theta_p += gs.Gamma[j]
    w, vecs = np.linalg.eigh(hermitize(Theta_p))
    idx = np.argsort(w)[::-1]           # nonzero eigenvalues first
    w = w[idx]
    vecs = vecs[:, idx]
    thresh = RANK_TOL * max(1.0, float(w[0]) if k else 1.0)
    q_hat = int(np.sum(w > thresh))
    Zp_basis = vecs[:, :q_hat]

    Hinv0, _ = hermitian_inverse(init.H_fiber)
    Lambda_hat = Hinv0.copy()
    for j, (A_j, Gj) in enumerate(zip(A, gs.Gamma)):
        if j not in p_set:
            Lambda_hat += gamma_integral(A_j, T) * Gj

    U = vecs.conj().T                   # U Theta_p U* is diagonal, kernel last
    Lu = U @ Lambda_hat @ U.conj().T
    limit_u = np.zeros((k, k), dtype=complex)
    if q_hat < k:
        Lo = hermitize(Lu[q_hat:, q_hat:])
        Lo_inv, _ = hermitian_inverse(Lo)
        limit_u[q_hat:, q_hat:] = Lo_inv
    fiber_limit = hermitize(vecs @ limit_u @ vecs.conj().T)

    base_limits = tuple(0.0 if i in p_set else float(a) - A_min
                        for i, a in enumerate(A))
    labels = [f"n_{i + 1}" for i in p_set]
    if q_hat > 0:
        labels += ["Z_p", "conj(Z_p)"]
    kernel_description = (
        "complexified kernel = " + " (+) ".join(labels)
        + f"  [complex dimension {sum(model.dims_n[i] for i in p_set) + 2 * q_hat}]")
    collapsing_subgroup = "·".join(f"G{i + 1}" for i in p_set)
    return LimitForm(
        T=T, p_set=p_set, base_limits=base_limits, Zp_basis=Zp_basis,
        fiber_limit=fiber_limit, fiber_rank=k - q_hat,
        mu=tuple(float(x) for x in w[:q_hat]),
        kernel_description=kernel_description,
        collapsing_subgroup=collapsing_subgroup)


def theta_total(model: CSpaceModel) -> np.ndarray:
    """Total coupling matrix; raises ``ThetaSingular`` if numerically singular."""
    Theta_s = gamma_system(model).Theta_s
    w = np.linalg.eigvalsh(Theta_s)
    if w.min() <= 1e-12 * max(1.0, float(w.max())):
        raise ThetaSingular(
            f"total coupling matrix is singular (min eigenvalue {w.min():g})")
    return Theta_s


def static_metric(model: CSpaceModel, lam: float) -> StaticMetric:
    """The unique invariant static metric at scale ``lam > 0``.

    Base coefficients ``1/(2 lam)``, fiber ``(1/(4 lam))`` times the inverse
    total coupling matrix.  The fixed-point residual is computed and attached.
    """
    lam = float(lam)
    if lam <= 0:
        raise NoStaticForNonpositiveLambda(
            f"no static metric exists for lambda={lam:g} <= 0")
    Theta_s = theta_total(model)
    Theta_inv, _ = hermitian_inverse(Theta_s)
    metric = InvariantMetric(h_base=(1.0 / (2.0 * lam),) * model.s,
                             H_fiber=Theta_inv / (4.0 * lam))
    residual, _ = static_residual(model, metric)
    if residual > 1e-9:
        raise ArithmeticError(
            f"static metric residual {residual:g} unexpectedly large; "
            "total coupling matrix is probably near-singular")
    return StaticMetric(lam=lam, metric=metric, residual=residual)


def static_residual(model: CSpaceModel, metric: InvariantMetric
                    ) -> tuple[float, float]:
    """Best-fit scale and defect of the fixed-point equation at a metric.

    Returns ``(residual, lambda_fit)`` where ``lambda_fit`` minimizes the
    squared norm of ``K(metric) + lambda * metric`` over all components and
    ``residual`` is the sup-norm defect at that fit.
    """
    K = k_tensor(model, metric)
    x = np.concatenate([np.asarray(K.base, dtype=complex), K.fiber.ravel()])
    y = np.concatenate([np.asarray(metric.h_base, dtype=complex),
                        metric.H_fiber.ravel()])
    lam_fit = -float(np.real(np.vdot(y, x)) / np.real(np.vdot(y, y)))
    residual = float(np.max(np.abs(x + lam_fit * y)))
    return residual, lam_fit


def normalized_state(model: CSpaceModel, init: InvariantMetric, t: float,
                     V: float = 1.0,
                     tie_tol: float = DEFAULT_TIE_TOL) -> NormalizedState:
    """Volume-one rescaling of the flow at time ``t``.

    Requires all initial base coefficients equal (within ``tie_tol``): the
    normalized flow is only known to converge in that case, so unequal data
    is refused rather than extrapolated.
    """
    _check_shapes(model, init)
    A = init.h_base
    if max(A) - min(A) > tie_tol * min(A):
        raise UnequalA(
            "normalized analysis requires all initial base coefficients equal; "
            f"got A={tuple(A)}")
    if V <= 0:
        raise NoStaticForNonpositiveLambda(f"volume constant V={V:g} must be positive")
    T, _ = extinction_time(A, tie_tol)
    if t >= T:
        raise PastExtinction(f"t={t:g} is not before the extinction time T={T:g}")

    k, m = model.k, model.total_dim_m
    Hinv_t, _ = fiber_inverse_closed_form(model, init, t)
    logdet_Hinv = float(np.sum(np.log(np.linalg.eigvalsh(Hinv_t))))
    xi_t = float(np.exp((-np.log(V) + k * np.log(T - t) + logdet_Hinv) / m))
    c_t = xi_t / (T - t)

    metric_t = closed_form_solution(model, init, t)
    normalized = metric_t.scaled(c_t)

    det_theta = float(np.prod(np.linalg.eigvalsh(gamma_system(model).Theta_s)))
    xi_limit = float((max(det_theta, 0.0) * 4.0 ** k / V) ** (1.0 / m))
    return NormalizedState(t=float(t), c_of_t=c_t, xi_of_t=xi_t,
                           normalized_metric=normalized, V_const=float(V),
                           xi_limit=xi_limit)


def collapse_structure_ce(model: CSpaceModel, init: InvariantMetric,
                          tie_tol: float = DEFAULT_TIE_TOL) -> CollapseReport:
    """Collapsed-space decomposition for a product of Calabi-Eckmann blocks.

    The model must carry the ``ce_blocks`` tag pairing its factors.  Factors
    in the collapsed set disappear; surviving factors whose partner also
    survives keep their shared torus fiber (a lower-dimensional block of the
    same type), while surviving factors with a collapsed partner flatten to
    their symmetric-space base.
    """
    if model.ce_blocks is None:
        raise NotCEProduct("model is not tagged with ce_blocks factor pairs")
    s = model.s
    seen: set[int] = set()
    for pair in model.ce_blocks:
        if len(pair) != 2 or not all(0 <= i < s for i in pair) or pair[0] == pair[1]:
            raise NotCEProduct(f"invalid ce_blocks pair {pair}")
        seen.update(pair)
    if len(seen) != s or len(model.ce_blocks) * 2 != s:
        raise NotCEProduct("ce_blocks must partition the factor indices into pairs")
    if model.k != len(model.ce_blocks):
        raise NotCEProduct(
            f"a product of {len(model.ce_blocks)} blocks must have fiber dimension "
            f"k={len(model.ce_blocks)}, got k={model.k}")

    sigma = list(range(s))
    for a, b in model.ce_blocks:
        sigma[a], sigma[b] = b, a
    _, p_set = extinction_time(init.h_base, tie_tol)
    surviving = [i for i in range(s) if i not in p_set]
    I1 = tuple(i for i in surviving if sigma[i] in surviving)
    I2 = tuple(i for i in surviving if sigma[i] not in surviving)

    parts = [f"G{i + 1}/K{i + 1}" for i in I2]
    for a, b in model.ce_blocks:
        if a in I1 and b in I1:
            lo, hi = sorted((a, b))
            parts.append(f"(G{lo + 1}·G{hi + 1}/L{lo + 1}·L{hi + 1})")
    description = " × ".join(parts) if parts else "point"
    return CollapseReport(sigma=tuple(sigma), I1=I1, I2=I2, p_set=p_set,
                          description=description)
