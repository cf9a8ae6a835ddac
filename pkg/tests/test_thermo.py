import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergopt import pipeline, thermo
from ergopt.errors import EmptyTermList, InsufficientPoints, NoConvergence, PrecisionTooLow
from ergopt.potential import LocallyConstantPotential
from ergopt.sft import build_system, enumerate_words

from conftest import FULL2, GOLDEN

P256 = thermo.PrecisionConfig()
CLOSE = mpmath.mpf(2) ** (-256 + 12)


def zero_potential_analysis(table=FULL2):
    system = build_system(len(table), table)
    return pipeline.analyze(system, LocallyConstantPotential(2, {w: 0 for w in enumerate_words(system, 2)}))


def test_precision_config_validation():
    with pytest.raises(ValueError):
        thermo.PrecisionConfig(mantissa_bits=32)
    with pytest.raises(ValueError):
        thermo.PrecisionConfig(power_iter_rel_tol=0)


def test_transfer_apply_e3(e3):
    out = thermo.transfer_apply(e3.normalized_graph, 1, [1, 1], P256)
    assert float(out[0]) == pytest.approx(1 + math.exp(-2), abs=1e-12)
    assert float(out[1]) == pytest.approx(math.exp(-1) + 1, abs=1e-12)


def test_transfer_apply_beta_zero(e4):
    g = e4.normalized_graph
    vec = [1, 2, 3]
    out = thermo.transfer_apply(g, 0, vec, P256)
    adj = g.adjacency()
    assert [float(x) for x in out] == list(adj.T @ np.array(vec, dtype=float))


def test_transfer_apply_zero_potential():
    out = thermo.transfer_apply(zero_potential_analysis().normalized_graph, 3, [1, 1], P256)
    assert [float(x) for x in out] == [2, 2]


def e2_closed(ctx, beta):
    return ctx.log(1 + ctx.exp(-beta))


def e3_closed(ctx, beta):
    return ctx.log(1 + ctx.exp(-ctx.mpf(3) * beta / 2))


def e4_closed(ctx, beta):
    return ctx.log((3 + ctx.sqrt(1 + 8 * ctx.exp(-2 * ctx.mpf(beta)))) / 2)


def test_pressure_examples(e2, e3):
    assert float(thermo.pressure(e2.normalized_graph, 1)) == pytest.approx(0.313262, abs=1e-6)
    ctx = P256.context()
    for beta in (0.5, 7, 33):
        assert abs(thermo.pressure(e3.normalized_graph, beta) - e3_closed(ctx, beta)) <= CLOSE


@pytest.mark.parametrize("name,closed", [("e2", e2_closed), ("e3", e3_closed), ("e4", e4_closed)])
def test_pressure_closed_forms(name, closed, request):
    a = request.getfixturevalue(name)
    ctx = P256.context()
    for beta in (0, 1, 5, 10, 25, 40):
        P = thermo.pressure(a.normalized_graph, beta, P256)
        assert abs(P - closed(ctx, beta)) <= CLOSE * max(1, abs(closed(ctx, beta)))


def test_pressure_beta_zero_is_entropy(corpus):
    from ergopt.sft import topological_entropy
    for a in corpus[:20]:
        g = a.normalized_graph
        assert abs(float(thermo.pressure(g, 0)) - topological_entropy(g.adjacency())) <= 1e-12


def test_sweep_examples(e2, e3):
    pts = pipeline.sweep(e2, [10, 20])
    assert float(pts[0].residual) == pytest.approx(4.5398899e-5, rel=1e-7)
    assert float(pts[1].residual) == pytest.approx(2.0611536e-9, rel=1e-7)
    (pt,) = pipeline.sweep(e3, [20])
    assert float(pt.residual) == pytest.approx(9.3576e-14, rel=1e-4)


def test_sweep_exact_zero():
    a = zero_potential_analysis(GOLDEN)
    pts = pipeline.sweep(a, [1, 2, 3])
    assert all(p.exact_zero and p.residual == 0 for p in pts)
    rate = thermo.empirical_rate(pts)
    assert rate.exact_zero and rate.gamma_estimate == -math.inf
    assert "P == h" in rate.note
    report = thermo.verify_rate(pts, rate, a.bound)
    assert report.passed


def test_untrusted_points_flagged(e3):
    # bypasses the pre-check on purpose: points past the mantissa must be kept but flagged
    prec = thermo.PrecisionConfig(mantissa_bits=96, power_iter_rel_tol=1e-25)
    h = pipeline.h_extended(e3, prec)
    pts = thermo.pressure_sweep(e3.normalized_graph, [5, 20, 50], h, prec)
    assert [p.trusted for p in pts] == [True, True, False]


def test_empirical_rate_examples(e2, e3):
    for a, lam in ((e2, -1), (e3, -1.5)):
        rate = thermo.empirical_rate(pipeline.sweep(a, [20, 30, 40]))
        assert rate.slopes[-1][:2] == (30, 40)
        assert rate.gamma_estimate == pytest.approx(lam, abs=1e-12)


def test_insufficient_points(e2):
    with pytest.raises(InsufficientPoints):
        thermo.empirical_rate(pipeline.sweep(e2, [10, 20]))


def test_verify_examples(e2, e3, e4):
    grid = pipeline.beta_grid(1, 50, 50)
    for a in (e2, e3):
        report = pipeline.verify(a, grid)
        assert report.passed and report.gamma_estimate == pytest.approx(float(a.bound.lam), abs=1e-6)
    report = pipeline.verify(e4, pipeline.beta_grid(1, 30, 30))
    assert report.passed
    assert any("excluded" in n for n in report.notes)


def test_precision_precheck(e3):
    with pytest.raises(PrecisionTooLow) as info:
        pipeline.sweep(e3, [10, 200])
    msg = str(info.value)
    assert "--precision-bits" in msg and "--beta-max" in msg
    need = P256.required_bits(200, -1.5)
    pipeline.sweep(e3, [190, 200], thermo.PrecisionConfig(mantissa_bits=need))


def test_no_convergence(e3):
    prec = thermo.PrecisionConfig(power_iter_rel_tol=1e-70, max_iters=1)
    with pytest.raises(NoConvergence):
        thermo.pressure(e3.normalized_graph, 30, prec)


def test_parallel_sweep_matches_serial(e4):
    grid = pipeline.beta_grid(1, 20, 8)
    serial = pipeline.sweep(e4, grid)
    parallel = pipeline.sweep(e4, grid, workers=2)
    for a, b in zip(serial, parallel):
        assert abs(a.pressure - b.pressure) <= CLOSE


def test_pressure_monotone_convex_and_above_h(corpus):
    for a in corpus[:25]:
        beta_max = pipeline.safe_beta_max(a.bound.lam)
        pts = pipeline.sweep(a, pipeline.beta_grid(0, beta_max, 12))
        P = [p.pressure for p in pts]
        scale = max(1, abs(float(P[0])))
        for p in pts:
            assert p.residual >= 0
        for x, y in zip(P, P[1:]):
            assert y - x <= 1e-12 * scale
        for x, y, z in zip(P, P[1:], P[2:]):
            assert x - 2 * y + z >= -1e-12 * scale


def test_eigenfunction_e2(e2):
    H, V = thermo.eigenfunction(e2.normalized_graph, 10)
    assert H == [1] and V == [0]


def test_eigenfunction_zero_potential():
    H, _ = thermo.eigenfunction(zero_potential_analysis().normalized_graph, 4)
    assert all(abs(h - 1) < 1e-60 for h in H)


def test_eigenfunction_e3_close_to_calibrated(e3):
    g = e3.normalized_graph
    _, V = thermo.eigenfunction(g, 50)
    assert thermo.calibration_defect(g, V) <= math.log(2) / 50
    # (a, b) is calibrated for E3 exactly when -1 <= b - a <= 2
    assert -1.1 <= V[1] - V[0] <= 2.1


def test_calibration_defect_bound(corpus):
    for a in corpus[:25]:
        g = a.normalized_graph
        indeg = max(len(e) for e in g.in_edges)
        beta_max = pipeline.safe_beta_max(a.bound.lam)
        for beta in (beta_max / 4, beta_max / 2, beta_max):
            _, V = thermo.eigenfunction(g, beta)
            assert thermo.calibration_defect(g, V) <= math.log(indeg) / beta + 1e-12


def test_scaled_log_sum_exp_examples():
    assert thermo.scaled_log_sum_exp([(0, 0), (-1, 0)], 10) == pytest.approx(math.log(1 + math.exp(-10)) / 10)
    assert thermo.scaled_log_sum_exp([(2.5, 0)], 7) == pytest.approx(2.5)
    assert thermo.scaled_log_sum_exp([(-1, 0)] * 3, 5) == pytest.approx(-1 + math.log(3) / 5)
    with pytest.raises(EmptyTermList):
        thermo.scaled_log_sum_exp([], 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=30),
       st.integers(1, 200))
def test_scaled_log_sum_exp_bounds(terms, n):
    val = thermo.scaled_log_sum_exp(terms, n)
    top = max(a + b for a, b in terms)
    assert -1e-12 <= val - top <= math.log(len(terms)) / n + 1e-12
    arr = thermo.scaled_log_sum_exp(np.array(terms), n)
    assert arr == pytest.approx(float(val), abs=1e-9)


def test_entropy_mp_matches_closed_form():
    golden = np.array([[1, 1], [1, 0]])
    ctx = P256.context()
    assert abs(thermo.entropy_mp(golden) - ctx.log((1 + ctx.sqrt(5)) / 2)) <= CLOSE


def test_h_extended(e4):
    ctx = P256.context()
    assert abs(pipeline.h_extended(e4) - ctx.log(2)) <= CLOSE
    assert Fraction(0) == pipeline.h_extended(pipeline.analyze(
        build_system(2, FULL2), LocallyConstantPotential(1, {(0,): 0, (1,): -1})))
