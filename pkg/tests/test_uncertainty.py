import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemann_uncertainty.fock import TruncationPolicy
from riemann_uncertainty.numeric import workprec
from riemann_uncertainty.uncertainty import (Classification, EvaluationMode, UncertaintyReport,
                                             check_uncertainty, classify, commutator_closed,
                                             critical_pair, matrix_moments, random_campaign,
                                             resolve_route, rhs_direct, rhs_paper, variance_x1,
                                             variance_x2)
from riemann_uncertainty.zeta_core import PrecisionConfig, ZetaSeries, series_tail_bound

amp = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
coeffs_st = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                     min_size=2, max_size=7)
P64 = PrecisionConfig(64)


@settings(max_examples=40, deadline=None)
@given(coeffs_st, amp, amp)
def test_heisenberg_holds(coeffs, alpha, beta):
    series = ZetaSeries.custom(coeffs, bits=64)
    rep = check_uncertainty(series, alpha, beta, TruncationPolicy(64, auto_raise=False), cfg=P64)
    assert rep.error is None
    scale = max(float(rep.lhs_product + rep.rhs_direct), 1e-30)
    assert float(rep.slack_direct) >= -1e-9 * scale
    assert rep.classification is not Classification.INEQUALITY_VIOLATION_DIRECT


@settings(max_examples=30, deadline=None)
@given(coeffs_st, amp, amp)
def test_closed_forms_match_matrices(coeffs, alpha, beta):
    series = ZetaSeries.custom(coeffs, bits=64)
    pol = TruncationPolicy(64)
    m = matrix_moments(series, alpha, beta, pol)
    v1 = float(variance_x1(series, alpha, beta, pol, cfg=P64))
    v2 = float(variance_x2(series, alpha, pol, cfg=P64))
    # on a coherent state <Z^2> = P^2 and <Z+ Z> = |P|^2, so both variances reduce to <Z Z+> - |P|^2
    assert v1 == pytest.approx(m["var_x1"], rel=1e-8, abs=1e-12)
    assert v2 == pytest.approx(m["var_x2"], rel=1e-8, abs=1e-12)
    with workprec(128):
        c = complex(commutator_closed(series, mpmath.mpc(alpha), mpmath.mpc(beta)))
    assert abs(c - m["commutator"]) <= 1e-9 * (1 + abs(c))


def test_linear_series_saturates():
    lin = ZetaSeries.custom([0, 1], bits=128)
    for alpha, beta in ((0.3, 0.1), (0.3 + 0.4j, 0), (-0.7, 0.25)):
        rep = check_uncertainty(lin, alpha, beta, TruncationPolicy(64), cfg=PrecisionConfig(128))
        assert float(rep.var_x1) == pytest.approx(1, abs=1e-12)
        assert float(rep.lhs_product) == pytest.approx(1, abs=1e-12)
        assert float(rep.rhs_direct) == pytest.approx(1, abs=1e-12)
        assert float(rep.rhs_paper) == pytest.approx(1, abs=1e-12)
        assert rep.classification is Classification.CONSISTENT


def test_printed_form_mismatch_with_complex_phase():
    """The printed right-hand side only equals the commutator when Im(alpha conj beta) = 0 mod pi."""
    lin = ZetaSeries.custom([0, 1], bits=128)
    alpha, beta = 0.3 + 0.2j, 0.1 - 0.3j
    rep = check_uncertainty(lin, alpha, beta, TruncationPolicy(64), cfg=PrecisionConfig(128))
    assert rep.classification is Classification.PAPER_FORM_MISMATCH
    assert float(rep.rhs_direct) == pytest.approx(1, abs=1e-12)
    # for P(z) = z: A = (a+b) conj(a), the displaced element is e^{-i phi}(A + 1), and the
    # printed form evaluates to Re^2[A - e^{-2i phi}(A + 1)], phi = Im(a conj(b))
    big_a = (alpha + beta) * np.conj(alpha)
    phi = (alpha * np.conj(beta)).imag
    expected = np.real(big_a - np.exp(-2j * phi) * (big_a + 1)) ** 2
    assert float(rep.rhs_paper) == pytest.approx(expected, abs=1e-12)
    assert abs(expected - 1) > 0.05


def test_routes_agree():
    series = ZetaSeries.custom([0.5, -1, 0.3j, 0.2], bits=128)
    pol = TruncationPolicy(96)
    cfg = PrecisionConfig(128)
    a, b = 0.4 - 0.3j, -0.2 + 0.5j
    for fn in (rhs_direct, rhs_paper):
        m = float(fn(series, a, b, pol, route="matrix", cfg=cfg))
        c = float(fn(series, a, b, pol, route="closed", cfg=cfg))
        assert m == pytest.approx(c, rel=1e-9)
    assert resolve_route("auto", 0.1, 0.1) == "matrix"
    assert resolve_route("auto", 14j, 1) == "closed"
    with pytest.raises(ValueError):
        resolve_route("bogus", 0, 0)


def test_analytic_mode_tracks_polynomial(zeta40):
    pol = TruncationPolicy(128)
    cfg = PrecisionConfig(128, 1e-30)
    a, b = mpmath.mpc(0.1, 0.05), mpmath.mpc(0.05, -0.1)
    vp = variance_x1(zeta40, a, b, pol, EvaluationMode.POLYNOMIAL, cfg)
    va = variance_x1(zeta40, a, b, pol, EvaluationMode.ANALYTIC, cfg)
    with workprec(128):
        z = abs(a + b)
        # |zeta|^2 vs |P_K|^2 differ by at most the series tail
        bound = 2 * series_tail_bound(40, float(z)) * (abs(zeta40(a + b)) + 1) + 1e-25
        assert abs(vp - va) <= bound


def test_numeric_error_is_reported_not_raised():
    series = ZetaSeries.custom([1, 1, 1], bits=64)
    rep = check_uncertainty(series, 6.0, 0.0, TruncationPolicy(16, auto_raise=False), cfg=P64,
                            route="matrix")
    assert rep.classification is Classification.NUMERIC_ERROR
    assert "TruncationError" in rep.error


def test_classify():
    assert classify(1.0, 1.0, 1.0, 1e-9) is Classification.CONSISTENT
    assert classify(0.5, 1.0, 1.0, 1e-9) is Classification.INEQUALITY_VIOLATION_DIRECT
    assert classify(2.0, 1.0, 1.5, 1e-9) is Classification.PAPER_FORM_MISMATCH
    assert classify(0.0, 0.0, 0.0, 1e-9) is Classification.CONSISTENT


def test_report_roundtrip(zeta40):
    rep = check_uncertainty(zeta40, mpmath.mpc(0.2, 0.1), mpmath.mpc(0.1, -0.2),
                            cfg=PrecisionConfig(256, 1e-60))
    back = UncertaintyReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert back.alpha == rep.alpha and back.lhs_product == rep.lhs_product


@settings(max_examples=100)
@given(st.floats(0, 1), st.floats(-50, 50))
def test_critical_pair_phase(eps, t):
    with workprec(128):
        a, b = critical_pair(eps, t)
        assert a + b == 1 + mpmath.mpf(repr(eps))
        want = (1 + mpmath.mpf(repr(eps))) * mpmath.mpf(repr(t))
        assert abs((a * mpmath.conj(b)).imag - want) <= 1e-30 * (1 + abs(t))


def test_campaign_small():
    out = random_campaign(trials=25, seed=3)
    assert out["violations"] == []
    assert out["classifications"]["numeric_error"] == 0
    assert out["worst_relative_slack"] >= -1e-9
