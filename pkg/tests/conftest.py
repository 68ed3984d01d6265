import numpy as np
import pytest

from hcflow import (
    ComplexStructureInput,
    FactorSpec,
    FiberSpec,
    InvariantMetric,
    build_cspace,
    fiber_coeffs_from_complex_structure,
    initial_metric,
)

STANDARD_IF = np.array([[0.0, -1.0], [1.0, 0.0]])

# small admissible Grassmannian parameter pool for randomized models
_GRASSMANNIAN_POOL = [(1, 2), (1, 3), (2, 2), (1, 4), (2, 3)]


def ce25_fiber(factors):
    cs = ComplexStructureInput(
        Zf_coords=(np.array([1.0, 0.0]), np.array([0.0, 1.0])), IF=STANDARD_IF)
    return fiber_coeffs_from_complex_structure(cs, factors)


def ce25_model(A1=1.0, A2=1.0):
    """The canonical two-factor fixture: two projective planes, torus fiber,
    coefficient vectors (-i/4, -1/4)."""
    factors = (FactorSpec.grassmannian(1, 2, A=A1), FactorSpec.grassmannian(1, 2, A=A2))
    return build_cspace(factors, ce25_fiber(factors), ce_blocks=((0, 1),))


def random_pd(rng, k):
    """Random Hermitian PD matrix at unit scale (eigenvalues in [0.3, 2]).

    Keeping the initial fiber matrix at unit scale keeps the flow tensor and
    its time derivatives at desk scale, which the absolute tolerances of the
    finite-difference consistency checks presume.
    """
    B = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    Q, _ = np.linalg.qr(B)
    w = rng.uniform(0.3, 2.0, size=k)
    return (Q * w) @ Q.conj().T


def random_model(rng, s=None, k=None, all_A_equal=False, theta_pd=False):
    """Randomized model + initial metric: s <= 4 factors, fiber dim k <= 3,
    coefficient entries uniform in [-1,1]^2, A in [0.5, 3], random PD initial
    fiber matrix.

    ``theta_pd=True`` additionally requires the total coupling matrix to be
    decently conditioned (honest models have it invertible; randomized
    vectors occasionally come out nearly dependent).
    """
    if k is None:
        k = int(rng.integers(1, 4))
    if s is None:
        s = int(rng.integers(1, 5))
    if theta_pd:
        s = max(s, k)
    factors = []
    A = rng.uniform(0.5, 3.0, size=s)
    if all_A_equal:
        A[:] = A[0]
    for j in range(s):
        p, q = _GRASSMANNIAN_POOL[int(rng.integers(0, len(_GRASSMANNIAN_POOL)))]
        factors.append(FactorSpec.grassmannian(p, q, A=float(A[j])))
    while True:
        c = tuple(rng.uniform(-1, 1, size=k) + 1j * rng.uniform(-1, 1, size=k)
                  for _ in range(s))
        if not theta_pd:
            break
        theta = sum(f.dim_n * np.outer(cj, cj.conj()) for f, cj in zip(factors, c))
        w = np.linalg.eigvalsh(theta)
        if w.min() > 1e-3 * w.max():
            break
    model = build_cspace(factors, FiberSpec(k=k, c=c), warn_unrealizable=False)
    init = InvariantMetric(h_base=tuple(A), H_fiber=random_pd(rng, k))
    return model, init


@pytest.fixture
def ce25():
    return ce25_model()


@pytest.fixture
def ce25_init(ce25):
    return initial_metric(ce25)
