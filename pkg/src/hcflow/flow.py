"""Flow tensor evaluation and flow solutions (closed form and Runge-Kutta).

The invariant flow decouples into an affine base part and a matrix Riccati
fiber part:

* every base coefficient decays linearly, ``h_i(t) = A_i - t/2``;
* the fiber matrix obeys ``H' = -H G(t) H`` with
  ``G(t) = sum_j Gamma^j / h_j(t)^2``, where each ``Gamma^j`` is the rank-one
  positive semidefinite coupling matrix ``n_j c^j (c^j)*`` built from the
  model's fiber coefficient vectors.

The Riccati equation integrates in closed form through the inverse,
``H^{-1}(t) = H_0^{-1} + sum_j I_j(t) Gamma^j`` with the scalar integrals
``I_j(t) = 2t / (A_j (2A_j - t))``.  The fixed-step fourth-order integrator
exists purely as an independent cross-check of that closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import freeze, hermitian_inverse, hermitize
from .cspace import CSpaceModel, InvariantMetric
from .errors import (
    InputError,
    LostPositivity,
    OutOfDomain,
    PastExtinction,
    ShapeMismatch,
)

#: relative tolerance deciding which initial base coefficients tie for the minimum
DEFAULT_TIE_TOL = 1e-12


@dataclass(frozen=True)
class GammaSystem:
    """Quadratic coupling data derived from a model.

    ``Gamma[j]`` is the rank <= 1 Hermitian PSD matrix of factor ``j`` (in
    factor order); ``order`` sorts the factors by ascending initial base
    coefficient, and ``Theta[p]`` is the partial sum of the first ``p``
    matrices in that ordering.  ``Theta_s`` is the full sum.
    """

    Gamma: tuple[np.ndarray, ...]
    order: tuple[int, ...]
    Theta: dict[int, np.ndarray]
    Theta_s: np.ndarray


@dataclass(frozen=True)
class KTensor:
    """Right-hand side of the flow at a metric.

    The value on every normalized base direction is exactly -1/2 regardless
    of the metric; the fiber block is ``-H G H``, Hermitian and negative
    semidefinite.
    """

    base: tuple[float, ...]
    fiber: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "fiber", freeze(np.asarray(self.fiber, dtype=complex)))


@dataclass(frozen=True)
class Trajectory:
    """Sampled flow solution on strictly increasing times below extinction."""

    times: np.ndarray
    states: tuple[InvariantMetric, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) != len(self.states):
            raise ShapeMismatch("times and states must have equal length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ShapeMismatch("times must be strictly increasing")
        object.__setattr__(self, "times", freeze(t))
        object.__setattr__(self, "states", tuple(self.states))


def gamma_system(model: CSpaceModel) -> GammaSystem:
    """Coupling matrices ``Gamma^j = n_j c^j (c^j)*`` and their partial sums."""
    Gamma = []
    for f, cj in zip(model.factors, model.fiber.c):
        Gamma.append(freeze(f.dim_n * np.outer(cj, cj.conj())))
    order = tuple(int(i) for i in np.argsort(model.A, kind="stable"))
    Theta = {}
    acc = np.zeros((model.k, model.k), dtype=complex)
    for p, j in enumerate(order, start=1):
        acc = acc + Gamma[j]
        Theta[p] = freeze(acc)
    return GammaSystem(Gamma=tuple(Gamma), order=order, Theta=Theta,
                       Theta_s=freeze(acc))


def _check_shapes(model: CSpaceModel, metric: InvariantMetric) -> None:
    if metric.s != model.s or metric.k != model.k:
        raise ShapeMismatch(
            f"metric has (s, k) = ({metric.s}, {metric.k}), "
            f"model has ({model.s}, {model.k})")


def coupling_at(model: CSpaceModel, h_base) -> np.ndarray:
    """Metric-weighted coupling ``G = sum_j Gamma^j / h_j^2`` (Hermitian PSD)."""
    gs = gamma_system(model)
    G = np.zeros((model.k, model.k), dtype=complex)
    for hj, Gj in zip(h_base, gs.Gamma):
        G += Gj / float(hj) ** 2
    return hermitize(G)


def k_tensor(model: CSpaceModel, metric: InvariantMetric) -> KTensor:
    """Evaluate the flow right-hand side at a metric.

    Base entries are identically -1/2; the fiber block is ``-H G H`` with the
    metric-weighted coupling ``G``.
    """
    _check_shapes(model, metric)
    G = coupling_at(model, metric.h_base)
    H = metric.H_fiber
    fiber = hermitize(-(H @ G @ H))
    return KTensor(base=(-0.5,) * model.s, fiber=fiber)


def extinction_time(A, tie_tol: float = DEFAULT_TIE_TOL) -> tuple[float, tuple[int, ...]]:
    """Extinction time ``T = 2 min(A)`` and the 0-based indices attaining it.

    Indices within relative ``tie_tol`` of the minimum are treated as tied;
    the limit structure is discontinuous in ties, so the tolerance is a
    deliberate, configurable policy.
    """
    A = [float(a) for a in A]
    if not A or min(A) <= 0:
        raise InputError("all initial base coefficients must be positive")
    a_min = min(A)
    p_set = tuple(i for i, a in enumerate(A) if a <= a_min * (1.0 + tie_tol))
    return 2.0 * a_min, p_set


def base_solution(A, t: float) -> tuple[float, ...]:
    """Base coefficients at time ``t``: ``h_i(t) = A_i - t/2`` (all positive)."""
    T, _ = extinction_time(A)
    if t >= T:
        raise PastExtinction(f"t={t:g} is not before the extinction time T={T:g}")
    return tuple(float(a) - 0.5 * t for a in A)


def gamma_integral(A_j: float, t: float, allow_improper: bool = False) -> float:
    """Exact value of ``int_0^t (A_j - u/2)^(-2) du = 2t / (A_j (2A_j - t))``.

    Finite for ``t < 2 A_j`` (negative ``t`` included, where the integrand is
    still defined and the signed integral is negative).  At ``t = 2 A_j`` the
    integral diverges; ``allow_improper=True`` returns ``inf`` there instead
    of raising.
    """
    A_j = float(A_j)
    t = float(t)
    if A_j <= 0:
        raise InputError(f"A_j={A_j:g} must be positive")
    if t > 2.0 * A_j or (t == 2.0 * A_j and not allow_improper):
        raise OutOfDomain(f"t={t:g} is outside the domain [<{2 * A_j:g}] of the integral")
    if t == 2.0 * A_j:
        return math.inf
    return 2.0 * t / (A_j * (2.0 * A_j - t))


def fiber_inverse_closed_form(model: CSpaceModel, init: InvariantMetric,
                              t: float) -> tuple[np.ndarray, float]:
    """Closed-form inverse fiber metric at time ``t`` and the condition number
    of the initial inversion.  The inverse form is the numerically robust
    object near extinction, where the metric itself degenerates."""
    _check_shapes(model, init)
    gs = gamma_system(model)
    Hinv0, cond0 = hermitian_inverse(init.H_fiber)
    Hinv = Hinv0.copy()
    for A_j, Gj in zip(init.h_base, gs.Gamma):
        Hinv += gamma_integral(A_j, t) * Gj
    return hermitize(Hinv), cond0


def closed_form_solution(model: CSpaceModel, init: InvariantMetric,
                         t: float) -> InvariantMetric:
    """Exact flow solution at time ``t`` from initial data ``init``.

    The base part is affine and the fiber part inverts the closed-form
    inverse.  Requires ``t`` below the extinction time; for ``t < 0`` the
    solution exists only while the inverse form stays positive definite, and
    ``NotPositive`` is raised past that empirical boundary.
    """
    T, _ = extinction_time(init.h_base)
    if t >= T:
        raise PastExtinction(f"t={t:g} is not before the extinction time T={T:g}")
    h_t = base_solution(init.h_base, t)
    Hinv, _ = fiber_inverse_closed_form(model, init, t)
    H_t, _ = hermitian_inverse(Hinv)    # NotPositive for t past the lower boundary
    return InvariantMetric(h_base=h_t, H_fiber=H_t)


def closed_form_trajectory(model: CSpaceModel, init: InvariantMetric,
                           times) -> Trajectory:
    """Closed-form solution sampled on an increasing time grid."""
    states = tuple(closed_form_solution(model, init, float(t)) for t in times)
    return Trajectory(times=np.asarray(times, dtype=float), states=states,
                      meta={"method": "closed-form"})


def integrate_rk4(model: CSpaceModel, init: InvariantMetric,
                  t_end: float, steps: int) -> Trajectory:
    """Fixed-step classical fourth-order integration of the full flow system.

    This integrator is the independent numerical oracle for the closed form;
    it deliberately uses fixed steps for determinism.  The fiber state is
    re-Hermitized after every step so that positivity checks are meaningful,
    and a definiteness failure raises ``LostPositivity`` (step size too
    coarse near extinction) rather than propagating NaNs.
    """
    _check_shapes(model, init)
    if steps < 1:
        raise InputError(f"steps={steps} must be >= 1")
    T, _ = extinction_time(init.h_base)
    if t_end >= T:
        raise PastExtinction(f"t_end={t_end:g} is not before the extinction time T={T:g}")
    gs = gamma_system(model)

    def dH(h_base, H):
        G = np.zeros((model.k, model.k), dtype=complex)
        for hj, Gj in zip(h_base, gs.Gamma):
            G += Gj / hj ** 2
        return -(H @ G @ H)

    dt = float(t_end) / steps
    h = np.array(init.h_base, dtype=float)
    H = np.array(init.H_fiber, dtype=complex)
    times = [0.0]
    states = [init]
    for n in range(steps):
        h2 = h - 0.25 * dt      # base stages are exact: h' = -1/2
        h3 = h - 0.5 * dt
        k1 = dH(h, H)
        k2 = dH(h2, H + 0.5 * dt * k1)
        k3 = dH(h2, H + 0.5 * dt * k2)
        k4 = dH(h3, H + dt * k3)
        H = hermitize(H + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        h = h - 0.5 * dt
        t_n = (n + 1) * dt
        if not np.all(np.isfinite(H.view(float))):
            raise LostPositivity(
                f"fiber state is no longer finite at t={t_n:g} (step size too coarse)")
        if np.linalg.eigvalsh(H).min() <= 0.0:
            raise LostPositivity(
                f"fiber state lost positive definiteness at t={t_n:g} "
                f"(step size too coarse near extinction)")
        times.append(t_n)
        states.append(InvariantMetric(h_base=tuple(h), H_fiber=H))
    return Trajectory(times=np.asarray(times), states=tuple(states),
                      meta={"method": "rk4", "steps": steps, "dt": dt})
