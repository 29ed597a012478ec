import logging
from decimal import Decimal

import mpmath
import numpy as np
import pytest

from riemann_uncertainty import fock
from riemann_uncertainty.errors import DomainError
from riemann_uncertainty.fock import TruncationPolicy
from riemann_uncertainty.numeric import workprec
from riemann_uncertainty.rh_scan import (SCAN_PRECISION, ScanConfig, ScanContext, ScanPoint,
                                         decimal_grid, eq10_evaluate, evaluate_grid, find_crossings,
                                         group_runs, k_study, run_scan, scan_csv, violation_intervals,
                                         witness_search)
from riemann_uncertainty.zeta_core import ZetaSeries


def test_decimal_grid():
    g = decimal_grid(0, 30, 0.01)
    assert len(g) == 3001 and g[0] == Decimal("0.0") and g[-1] == Decimal("30.00")
    assert [str(t) for t in decimal_grid(0, 1, 0.3)] == ["0.0", "0.3", "0.6", "0.9"]
    assert len(decimal_grid(10, 30, 0.01)) == 2001


@pytest.mark.parametrize("kw", [dict(eps=0), dict(eps=0.2, t_min=3, t_max=1),
                                dict(eps=0.2, step=0), dict(eps=0.2, series_order=-1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ScanConfig(**kw)


def test_f_matches_double_sum(zeta40):
    ctx = ScanContext(zeta40, 0.2)
    with workprec(256):
        u = mpmath.mpf("1.2")
        ref = fock.zz_dagger_expect_normal_ordered(zeta40, u) - abs(zeta40(u)) ** 2
        assert abs(ctx.f - ref) <= 1e-50 * ref
        assert ctx.f > 0


def test_g_matches_matrix_route():
    series = ZetaSeries.custom([-0.5, -0.9, -1.0, -1.0, -1.0], bits=256)
    eps, t = 0.2, 0.3
    ctx = ScanContext(series, eps)
    pt = ctx.point(Decimal("0.3"), with_zeta=False)
    # matrix oracle: P(a+b) = D(b)^+ P(a) D(b) with b = u - gamma
    n = 96
    pol = TruncationPolicy(n)
    u, gamma = 1 + eps, complex((1 + eps) / 2, t)
    b = u - gamma
    z = fock.build_riemann_operator(series, pol).matrix
    d = fock.displacement_matrix(b, n).matrix
    ket = fock.coherent_vector(gamma, pol).vec
    w = (d @ ket).conj() @ (z @ (d @ (z.conj().T @ ket)))
    num = (np.exp(-2j * u * t) * w).real ** 2
    den = np.linalg.norm(z.conj().T @ ket) ** 2
    assert float(pt.g) == pytest.approx(num / den, rel=1e-10)
    assert pt.satisfied == (float(pt.x) >= 0)


def test_threads_do_not_change_values(zeta40):
    ctx = ScanContext(zeta40, 0.2)
    ts = decimal_grid(0, 0.55, 0.05)
    one = evaluate_grid(ctx, ts, threads=1)
    three = evaluate_grid(ctx, ts, threads=3)
    assert [(p.t, p.g, p.x, p.re_zeta) for p in one] == [(p.t, p.g, p.x, p.re_zeta) for p in three]


class _LinearX:
    """Stand-in context whose x(t) = t - 0.5 changes sign once."""
    precision = SCAN_PRECISION

    def x_at(self, t):
        return t - mpmath.mpf("0.5")


def test_crossing_refinement_and_intervals():
    ts = decimal_grid(0, 1, 0.1)
    pts = [ScanPoint(t, 0, float(t) - 0.5, 0, float(t) - 0.5 >= 0) for t in ts]
    crossings, pair = find_crossings(_LinearX(), pts, 1e-9)
    assert len(crossings) == 1 and abs(crossings[0] - 0.5) < 1e-8
    iv = violation_intervals(pts, pair)
    assert len(iv) == 1
    assert iv[0][0] == 0 and abs(iv[0][1] - 0.5) < 1e-8


def test_group_runs():
    grid = decimal_grid(0, 1, 0.1)
    picks = [grid[i] for i in (0, 1, 2, 5, 7, 8)]
    assert group_runs(picks, grid) == [(grid[0], grid[2]), (grid[5], grid[5]), (grid[7], grid[8])]


def test_witnesses_exist_where_re_zeta_is_negative():
    near_zero = witness_search(0.2, (0, 1))
    assert near_zero and max(near_zero) <= Decimal("0.75")
    later = witness_search(0.2, (43.5, 43.8))
    assert later
    with workprec(128):
        for t in later:
            assert mpmath.zeta(mpmath.mpc("0.6", str(t))).real <= 0


def test_empty_witness_list_hints(caplog):
    with caplog.at_level(logging.WARNING, logger="riemann_uncertainty"):
        assert witness_search(0.2, (10, 11), step=0.05) == []
    assert "extend" in caplog.text


def test_witness_search_single_point():
    assert witness_search(0.2, (0.5, 0.5)) == [Decimal("0.5")]
    with pytest.raises(ValueError):
        witness_search(0.2, (2, 1))


def test_small_run_scan(zeta40):
    cfg = ScanConfig(0.2, 0, 1, 0.05, series_order=40, k_orders=(20, 40), k_stride=5)
    rep = run_scan(cfg, series=zeta40)
    text = scan_csv(rep)
    lines = text.split("\n")
    assert lines[0] == "t,g,x,re_zeta,satisfied" and lines[-1] == ""
    assert len(lines) - 2 == 21 and "\r" not in text
    assert lines[1].startswith("0.00,")
    assert rep.witness_intervals and rep.witness_intervals[0][0] == 0
    assert [k["order"] for k in rep.k_study] == [20, 40]
    assert rep.k_study[-1]["g_rel_drift_max"] == "0.0"
    d = rep.to_dict()
    assert d["config_echo"]["series_order"] == 40
    with_f = scan_csv(rep, with_f=True).split("\n")
    assert with_f[0].endswith(",f") and len({row.split(",")[-1] for row in with_f[1:-1]}) == 1


def test_k_study_empty_without_orders():
    assert k_study(ScanConfig(0.2), decimal_grid(0, 1, 0.5)) == []


def test_eq10(zeta40):
    cfg = ScanConfig(0.2, series_order=40)
    ctx = ScanContext(zeta40, 0.2)
    r = eq10_evaluate(0.2, 0.5, 0, cfg, ctx=ctx)
    assert mpmath.isfinite(r)
    with pytest.raises(DomainError):
        eq10_evaluate(0.2, 0.5, mpmath.mpf(10) ** 300, cfg, ctx=ctx)
