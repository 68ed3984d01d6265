"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance is pinned here, nothing is deferred to calibration.
"""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from hcflow import (
    InvariantMetric,
    calabi_eckmann_realization,
    closed_form_solution,
    extinction_time,
    gamma_system,
    grassmannian_realization,
    initial_metric,
    integrate_rk4,
    k_tensor,
    limit_form,
    normalized_state,
    static_metric,
    static_residual,
    verify_chern_tensors,
    verify_root_identities,
)
from hcflow.errors import NoStaticForNonpositiveLambda, ThetaSingular
from hcflow.flow import fiber_inverse_closed_form

from conftest import ce25_model, random_model


def _report(num, name, ok, detail):
    print(f"[acceptance {num:02d}] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num} failed: {detail}"


def _ensemble(seed, count, **kwargs):
    rng = np.random.default_rng(seed)
    return [random_model(rng, **kwargs) for _ in range(count)]


def test_criterion_01_closed_form_vs_rk4():
    worst = 0.0
    for model, init in _ensemble(2024, 50):
        T, _ = extinction_time(init.h_base)
        t_end = 0.9 * T
        final = integrate_rk4(model, init, t_end, 1000).states[-1]
        exact = closed_form_solution(model, init, t_end)
        rel = (np.max(np.abs(final.H_fiber - exact.H_fiber))
               / np.max(np.abs(exact.H_fiber)))
        rel_h = max(abs(a - b) / abs(b)
                    for a, b in zip(final.h_base, exact.h_base))
        worst = max(worst, rel, rel_h)
    _report(1, "closed form vs fixed-step integrator at 0.9T",
            worst <= 1e-8, f"max relative error {worst:.3e} <= 1e-8")


def test_criterion_02_flow_equation_consistency():
    delta = 1e-6
    worst = 0.0
    for model, init in _ensemble(2024, 50):
        T, _ = extinction_time(init.h_base)
        for t in np.linspace(0.0, 0.9 * T, 10):
            K = k_tensor(model, closed_form_solution(model, init, t))
            plus = closed_form_solution(model, init, t + delta)
            minus = closed_form_solution(model, init, t - delta)
            dh = (np.array(plus.h_base) - np.array(minus.h_base)) / (2 * delta)
            dH = (plus.H_fiber - minus.H_fiber) / (2 * delta)
            worst = max(worst,
                        float(np.max(np.abs(dh - np.array(K.base)))),
                        float(np.max(np.abs(dH - K.fiber))))
    _report(2, "centered difference of the solution matches the flow tensor",
            worst <= 1e-6, f"max entrywise deviation {worst:.3e} <= 1e-6")


def test_criterion_03_tensor_lemmas_first_principles():
    ce = calabi_eckmann_realization()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(5):
        metric = InvariantMetric(tuple(rng.uniform(0.2, 4.0, size=2)),
                                 np.array([[rng.uniform(0.1, 5.0) + 0j]]))
        worst = max(worst, verify_chern_tensors(ce, metric).max_residual)
    _report(3, "connection/torsion/curvature formulas from raw brackets",
            worst <= 1e-12, f"max residual {worst:.3e} <= 1e-12 over 5 metrics")


def test_criterion_04_root_identities():
    worst = 0.0
    for pq in [(1, 2), (2, 2), (1, 3)]:
        rep = verify_root_identities(grassmannian_realization(*pq))
        worst = max(worst, rep.max_residual)
    _report(4, "root-system identities on explicit realizations",
            worst <= 1e-12, f"max residual {worst:.3e} <= 1e-12")


def test_criterion_05_determinant_extinction_law():
    worst = 0.0
    for model, init in _ensemble(55, 20, all_A_equal=True, theta_pd=True):
        T, _ = extinction_time(init.h_base)
        t = T - 1e-6
        Hinv, _ = fiber_inverse_closed_form(model, init, t)
        lhs = (T - t) ** model.k * float(np.prod(np.linalg.eigvalsh(Hinv)))
        rhs = 4.0 ** model.k * float(
            np.prod(np.linalg.eigvalsh(gamma_system(model).Theta_s)))
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    _report(5, "determinant law near extinction (all A equal)",
            worst <= 1e-4, f"max relative error {worst:.3e} <= 1e-4")


def test_criterion_06_limit_kernel_law():
    worst_angle = 0.0
    ok = True
    for model, init in _ensemble(66, 20):
        lf = limit_form(model, init)
        _, p_set = extinction_time(init.h_base)
        cols = [model.fiber.c[j] for j in p_set
                if np.linalg.norm(model.fiber.c[j]) > 0]
        if cols:
            stacked = np.column_stack(cols)
            u, sv, _ = np.linalg.svd(stacked, full_matrices=False)
            span = u[:, sv > 1e-10 * sv[0]]
        else:
            span = np.zeros((model.k, 0))
        q_expected = span.shape[1]
        eigs = np.linalg.eigvalsh(lf.fiber_limit)
        ok = ok and (model.k - lf.fiber_rank == q_expected)
        ok = ok and (int(np.sum(np.abs(eigs) <= 1e-10)) == q_expected)
        ok = ok and all(lf.base_limits[i] == 0.0 for i in p_set)
        ok = ok and all(lf.base_limits[i] > 0.0 for i in range(model.s)
                        if i not in p_set)
        if q_expected:
            worst_angle = max(worst_angle,
                              float(subspace_angles(span, lf.Zp_basis).max()))
    _report(6, "limit kernel dimension, span, and vanishing base entries",
            ok and worst_angle <= 1e-8,
            f"max principal angle {worst_angle:.3e} <= 1e-8")


def test_criterion_07_static_metrics():
    model = ce25_model()
    worst = 0.0
    metrics = {}
    for lam in (0.1, 1.0, 10.0):
        sm = static_metric(model, lam)
        metrics[lam] = sm.metric
        residual, lam_fit = static_residual(model, sm.metric)
        worst = max(worst, residual)
    # homothety: the identity is exact; the comparison allows one floating
    # rounding since decimal scale factors are not binary-representable
    hom_ok = True
    for lam in (0.1, 1.0, 10.0):
        for lam2 in (0.1, 1.0, 10.0):
            ratio = lam2 / lam
            hom_ok = hom_ok and np.allclose(
                np.array(metrics[lam].h_base),
                ratio * np.array(metrics[lam2].h_base), rtol=1e-15, atol=0.0)
            hom_ok = hom_ok and np.allclose(
                metrics[lam].H_fiber, ratio * metrics[lam2].H_fiber,
                rtol=1e-15, atol=0.0)
    with pytest.raises(NoStaticForNonpositiveLambda):
        static_metric(model, 0.0)
    with pytest.raises(NoStaticForNonpositiveLambda):
        static_metric(model, -2.0)
    from hcflow import FactorSpec, FiberSpec, build_cspace
    degenerate = build_cspace(
        (FactorSpec.grassmannian(1, 2), FactorSpec.grassmannian(1, 2)),
        FiberSpec(k=1, c=(np.zeros(1, dtype=complex),) * 2),
        warn_unrealizable=False)
    with pytest.raises(ThetaSingular):
        static_metric(degenerate, 1.0)
    _report(7, "static metrics: residuals, homothety, rejections",
            worst <= 1e-12 and hom_ok,
            f"max residual {worst:.3e} <= 1e-12, homothety {'ok' if hom_ok else 'broken'}")


def test_criterion_08_normalized_convergence():
    model = ce25_model()
    init = initial_metric(model)
    ns = normalized_state(model, init, 2.0 - 1e-6, V=1.0)
    xi_err = abs(ns.xi_limit - 1.0)
    static = static_metric(model, 1.0 / ns.xi_limit).metric
    dev = max(float(np.max(np.abs(np.array(ns.normalized_metric.h_base)
                                  - np.array(static.h_base)))),
              float(np.max(np.abs(ns.normalized_metric.H_fiber - static.H_fiber))))
    _report(8, "volume-normalized flow approaches the paired static metric",
            xi_err <= 1e-10 and dev <= 1e-3,
            f"xi defect {xi_err:.2e} <= 1e-10, sup deviation {dev:.2e} <= 1e-3")


def test_criterion_09_monotonicity_certificate():
    rng = np.random.default_rng(99)
    worst = -np.inf
    for _ in range(20):
        model, init = random_model(rng)
        T, _ = extinction_time(init.h_base)
        v = rng.normal(size=model.k) + 1j * rng.normal(size=model.k)
        v /= np.linalg.norm(v)
        vals = [float(np.real(v.conj()
                              @ closed_form_solution(model, init, t).H_fiber @ v))
                for t in np.linspace(0.0, T - 1e-4, 100)]
        worst = max(worst, max(b - a for a, b in zip(vals, vals[1:])))
    _report(9, "fiber pairings never increase along the flow",
            worst <= 1e-12, f"max observed increase {worst:.3e} <= 1e-12")


def test_criterion_10_cli_contract(tmp_path):
    doc = {
        "model": {
            "factors": [
                {"kind": "grassmannian", "p": 1, "q": 2, "A": 1.0},
                {"kind": "grassmannian", "p": 1, "q": 2, "A": 1.0},
            ],
            "fiber": {"k": 1, "c": [[[0.0, -0.25]], [[-0.25, 0.0]]]},
            "ce_blocks": [[0, 1]],
        },
        "initial": {"H0": [[[1.0, 0.0]]]},
    }
    cfg = tmp_path / "ce25.json"
    cfg.write_text(json.dumps(doc))

    def cli(*args):
        return subprocess.run([sys.executable, "-m", "hcflow.cli", *args],
                              capture_output=True, text=True)

    # cross-checked simulation CSV
    sim = tmp_path / "sim.csv"
    res = cli("simulate", "--config", str(cfg), "--t-end", "1.0",
              "--steps", "1000", "--cross-check", "--output", str(sim))
    ok = res.returncode == 0
    with open(sim, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    idx = {name: i for i, name in enumerate(header)}
    shared = [c for c in header if not c.startswith("rk4_") and c != "t"]
    max_err = max(abs(row[idx[c]] - row[idx["rk4_" + c]])
                  for row in rows for c in shared)
    ok = ok and max_err <= 1e-8

    # static metric JSON
    stat = tmp_path / "static.json"
    res = cli("static", "--config", str(cfg), "--lambda", "1.0",
              "--output", str(stat))
    data = json.loads(stat.read_text())
    ok = ok and res.returncode == 0
    ok = ok and data["h"] == [0.5, 0.5] and data["H"] == [[[1.0, 0.0]]]

    # past-extinction exit code and message
    res = cli("simulate", "--config", str(cfg), "--t-end", "3.0",
              "--output", str(tmp_path / "x.csv"))
    ok = ok and res.returncode == 3
    ok = ok and "PastExtinction" in res.stderr and "T=2" in res.stderr

    # config round trip is bit-exact
    d1, d2 = tmp_path / "dump1.json", tmp_path / "dump2.json"
    cli("simulate", "--config", str(cfg), "--t-end", "0.5",
        "--output", str(tmp_path / "s1.csv"), "--dump-config", str(d1))
    cli("simulate", "--config", str(d1), "--t-end", "0.5",
        "--output", str(tmp_path / "s2.csv"), "--dump-config", str(d2))
    ok = ok and d1.read_text() == d2.read_text()
    _report(10, "CLI contract: files, exit codes, config round trip",
            ok, f"cross-check error {max_err:.3e} <= 1e-8, exit codes and "
                f"round trip verified")
