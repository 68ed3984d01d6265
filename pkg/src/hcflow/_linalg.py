"""Small Hermitian linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveMetric, NotPositive


def freeze(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``a`` (values are immutable after construction)."""
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    return float(np.max(np.abs(a - a.conj().T))) <= tol * scale


def check_hermitian_pd(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is Hermitian positive definite; return its eigenvalues."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonPositiveMetric(f"{what} must be square, got shape {a.shape}")
    if not is_hermitian(a):
        raise NonPositiveMetric(f"{what} is not Hermitian")
    w = np.linalg.eigvalsh(a)
    if w.min() <= 0.0:
        raise NonPositiveMetric(f"{what} is not positive definite (min eigenvalue {w.min():g})")
    return w


def hermitian_inverse(a: np.ndarray) -> tuple[np.ndarray, float]:
    """Invert a Hermitian positive-definite matrix via its eigendecomposition.

    Returns the inverse together with the spectral condition number, which is
    the meaningful ill-conditioning diagnostic near the extinction time where
    inverse fiber metrics blow up along a fixed subspace.

    Raises
    ------
    NotPositive
        If the matrix has a non-positive eigenvalue.
    """
    w, q = np.linalg.eigh(hermitize(a))
    if w.min() <= 0.0:
        raise NotPositive(f"matrix not positive definite (min eigenvalue {w.min():g})")
    inv = (q * (1.0 / w)) @ q.conj().T
    return hermitize(inv), float(w.max() / w.min())
