import numpy as np
import pytest

from hcflow import InvariantMetric, calabi_eckmann_realization, verify_chern_tensors
from hcflow.errors import ShapeMismatch

TOL = 1e-12


@pytest.fixture(scope="module")
def ce():
    return calabi_eckmann_realization()


def test_realization_reproduces_fixture_coefficients(ce):
    np.testing.assert_allclose(ce.fiber.c[0], [-0.25j], atol=1e-15)
    np.testing.assert_allclose(ce.fiber.c[1], [-0.25], atol=1e-15)
    assert ce.model.total_dim_m == 5


def test_realization_blocks_commute_and_fiber_spans(ce):
    # per-factor representation makes cross-factor brackets vanish; checked
    # here on the block-diagonal embedding for the record
    from scipy.linalg import block_diag
    b0, b1 = ce.blocks
    X = block_diag(b0.E[b0.roots_plus_n[0]], np.zeros_like(b1.Z))
    Y = block_diag(np.zeros_like(b0.Z), b1.E[b1.roots_plus_n[0]])
    assert np.max(np.abs(X @ Y - Y @ X)) == 0.0
    # the two central directions span the modeled fiber over the reals
    assert ce.model.fiber_realizable
    assert ce.cs_input.k == ce.fiber.k == 1


def test_tensor_formulas_unit_metric(ce):
    rep = verify_chern_tensors(ce, InvariantMetric((1.0, 1.0), np.eye(1)))
    assert rep.max_residual <= TOL, rep.values


def test_tensor_formulas_skewed_metric(ce):
    rep = verify_chern_tensors(ce, InvariantMetric((3.0, 0.5), np.array([[2.0 + 0j]])))
    assert rep.max_residual <= TOL, rep.values


def test_tensor_formulas_random_metrics(ce):
    rng = np.random.default_rng(12)
    for _ in range(5):
        metric = InvariantMetric(tuple(rng.uniform(0.2, 4.0, size=2)),
                                 np.array([[rng.uniform(0.1, 5.0) + 0j]]))
        rep = verify_chern_tensors(ce, metric)
        assert rep.max_residual <= TOL, rep.values


def test_tensor_formulas_scale_covariance(ce):
    # each claim is checked in its own scale; residuals stay tiny under
    # simultaneous rescaling of the metric
    base = InvariantMetric((1.3, 0.8), np.array([[1.7 + 0j]]))
    for lam in (0.25, 1.0, 4.0):
        rep = verify_chern_tensors(ce, base.scaled(lam))
        assert rep.max_residual <= TOL


def test_tensor_formulas_nonstandard_complex_structure():
    rng = np.random.default_rng(21)
    J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
    S = rng.normal(size=(2, 2)) + 1.5 * np.eye(2)
    ce = calabi_eckmann_realization(IF=S @ J2 @ np.linalg.inv(S))
    rep = verify_chern_tensors(ce, InvariantMetric((1.1, 0.7), np.array([[0.9 + 0j]])))
    assert rep.max_residual <= TOL, rep.values


def test_tensor_formulas_larger_blocks():
    ce = calabi_eckmann_realization(pq1=(2, 2), pq2=(1, 3))
    rep = verify_chern_tensors(ce, InvariantMetric((0.9, 1.7), np.array([[1.4 + 0j]])))
    assert rep.max_residual <= TOL, rep.values


def test_metric_shape_mismatch(ce):
    with pytest.raises(ShapeMismatch):
        verify_chern_tensors(ce, InvariantMetric((1.0, 1.0, 1.0), np.eye(1)))
    with pytest.raises(ShapeMismatch):
        verify_chern_tensors(ce, InvariantMetric((1.0, 1.0), np.eye(2)))
