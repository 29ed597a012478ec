"""Scans along t at fixed eps: f(eps), g(t; eps), x(t), crossings g = f,
negative-real-part witnesses, and the contradiction-test evaluator.

Notation: u = 1 + eps, gamma(t) = (1+eps)/2 + i t, beta(t) = (1+eps)/2 - i t,
so gamma + beta = u and Im(gamma conj(beta)) = (1+eps) t.

    f(eps)   = <u|P P+|u> - |zeta(u)|^2
    den(t)   = <gamma|P P+|gamma>
    num(t)   = Re^2[ e^{-i(1+eps)t} <u| P D(beta) P+ |gamma> ]
    g(t;eps) = num / den,   x(t) = f den - num

Everything is evaluated in closed form (Taylor-shifted coefficients), so no
Fock truncation enters the scan.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import Decimal

import mpmath
from mpmath import mpc, mpf

from . import fock
from .errors import DegenerateError, DomainError, NumericError
from .numeric import decimal_mpf, real_str, workprec
from .uncertainty import EvaluationMode, scalar_zeta
from .zeta_core import (COEFF_PRECISION, PrecisionConfig, ZetaSeries, eval_zeta,
                        load_or_compute_series, zeta_one_plus_eps)

log = logging.getLogger(__name__)

SCAN_PRECISION = PrecisionConfig(bits=256, target_abs_err=1e-60)
DEN_FLOOR = mpf(2) ** -200
CSV_DIGITS = 20


@dataclass(frozen=True)
class ScanConfig:
    eps: float
    t_min: float = 0.0
    t_max: float = 30.0
    step: float = 0.01
    series_order: int = 60
    truncation: int = 128
    mode: EvaluationMode = EvaluationMode.POLYNOMIAL
    precision: PrecisionConfig = SCAN_PRECISION
    bisect_tol: float = 1e-6
    k_orders: tuple = ()
    k_stride: int = 10

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be below t_max")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.series_order < 0:
            raise ValueError("series order must be >= 0")
        object.__setattr__(self, "mode", EvaluationMode(self.mode))

    def grid(self) -> list[Decimal]:
        return decimal_grid(self.t_min, self.t_max, self.step)

    def echo(self) -> dict:
        return {
            "eps": repr(self.eps), "t_min": repr(self.t_min), "t_max": repr(self.t_max),
            "step": repr(self.step), "series_order": self.series_order,
            "truncation": self.truncation, "mode": self.mode.value,
            "precision": self.precision.to_dict(), "bisect_tol": repr(self.bisect_tol),
            "k_orders": list(self.k_orders), "k_stride": self.k_stride,
        }


def decimal_grid(t_min, t_max, step) -> list[Decimal]:
    """t_min + i*step for i = 0..floor((t_max-t_min)/step), in exact decimal arithmetic."""
    lo, hi, h = Decimal(repr(float(t_min))), Decimal(repr(float(t_max))), Decimal(repr(float(step)))
    n = int((hi - lo) / h)
    return [lo + i * h for i in range(n + 1)]


@dataclass(frozen=True)
class ScanPoint:
    t: object
    g: object
    x: object
    re_zeta: object
    satisfied: bool
    error: str | None = None


@dataclass
class CrossingReport:
    f_value: object
    crossings: list
    violation_intervals: list
    witnesses: list
    points: list = field(default_factory=list, repr=False)
    witness_intervals: list = field(default_factory=list)
    k_study: list = field(default_factory=list)
    config: ScanConfig | None = None

    def to_dict(self) -> dict:
        bits = self.config.precision.bits if self.config else 53
        rs = lambda v: real_str(v, bits)  # noqa: E731
        return {
            "eps": repr(self.config.eps) if self.config else None,
            "f": rs(self.f_value),
            "crossings": [rs(c) for c in self.crossings],
            "violation_intervals": [[rs(a), rs(b)] for a, b in self.violation_intervals],
            "witnesses": [rs(w) for w in self.witnesses],
            "witness_intervals": [[rs(a), rs(b)] for a, b in self.witness_intervals],
            "point_errors": [[str(p.t), p.error] for p in self.points if p.error],
            "config_echo": self.config.echo() if self.config else {},
            "k_study": self.k_study,
        }


# ------------------------------------------------------------------ context


class ScanContext:
    """Everything that depends on eps but not on t."""

    def __init__(self, series: ZetaSeries, eps, mode=EvaluationMode.POLYNOMIAL,
                 precision: PrecisionConfig = SCAN_PRECISION):
        self.series = series
        self.mode = EvaluationMode(mode)
        self.precision = precision
        with workprec(precision.bits):
            self.eps = decimal_mpf(eps)
            self.u = 1 + self.eps
            self.half = self.u / 2
            self.b_u = fock.shifted_coeffs(series, mpc(self.u))
            if self.mode is EvaluationMode.POLYNOMIAL:
                self.zeta_u = self.b_u[0]
                self.f = fock.weighted_norm2(self.b_u, start=1)
            else:
                self.zeta_u = scalar_zeta(series, self.u, self.mode, precision)
                self.f = fock.weighted_norm2(self.b_u) - abs(self.zeta_u) ** 2

    def gamma(self, t):
        return mpc(self.half, t)

    def parts(self, t):
        """(num, den, b_gamma) at t, inside the caller's precision context."""
        gamma = self.gamma(t)
        b_g = fock.shifted_coeffs(self.series, gamma)
        den = fock.weighted_norm2(b_g)
        if den < DEN_FLOOR:
            raise DegenerateError(f"<gamma|P P+|gamma> = {den} below floor at t = {t}")
        element = mpmath.expj(-self.u * t) * fock.weighted_inner(self.b_u, b_g)
        num = (mpmath.expj(-self.u * t) * element).real ** 2
        return num, den, b_g

    def point(self, t, with_zeta: bool = True) -> ScanPoint:
        with workprec(self.precision.bits):
            tt = mpf(str(t))
            try:
                num, den, _ = self.parts(tt)
                g = num / den
                x = self.f * den - num
                rz = eval_zeta(self.gamma(tt), self.precision).real if with_zeta else mpf("nan")
                return ScanPoint(t, g, x, rz, bool(x >= 0))
            except NumericError as exc:
                nan = mpf("nan")
                return ScanPoint(t, nan, nan, nan, False, f"{type(exc).__name__}: {exc}")

    def x_at(self, t):
        with workprec(self.precision.bits):
            num, den, _ = self.parts(mpf(t))
            return self.f * den - num


def scan_series(order: int, cache_dir=None) -> ZetaSeries:
    return load_or_compute_series(order, 0.5, None, COEFF_PRECISION, cache_dir)[0]


def make_context(cfg: ScanConfig, series: ZetaSeries | None = None, cache_dir=None) -> ScanContext:
    series = series if series is not None else scan_series(cfg.series_order, cache_dir)
    return ScanContext(series, cfg.eps, cfg.mode, cfg.precision)


def f_of_eps(eps, cfg: ScanConfig | None = None, series: ZetaSeries | None = None):
    """<1+eps|P P+|1+eps> - |zeta(1+eps)|^2."""
    cfg = cfg or ScanConfig(eps)
    ctx = make_context(replace(cfg, eps=eps), series)
    return ctx.f


def g_of_t(t, eps, cfg: ScanConfig | None = None, series: ZetaSeries | None = None,
           ctx: ScanContext | None = None) -> ScanPoint:
    cfg = cfg or ScanConfig(eps)
    ctx = ctx or make_context(replace(cfg, eps=eps), series)
    return ctx.point(t)


# --------------------------------------------------------------- evaluation


def _eval_chunk(args):
    ctx, ts, with_zeta = args
    return [ctx.point(t, with_zeta) for t in ts]


def _chunks(seq, n):
    size = max(1, math.ceil(len(seq) / n))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def evaluate_grid(ctx: ScanContext, ts, threads: int = 1, with_zeta: bool = True) -> list[ScanPoint]:
    """Points in grid order; worker count never changes the values."""
    ts = list(ts)
    if threads <= 1 or len(ts) < 2:
        return _eval_chunk((ctx, ts, with_zeta))
    chunks = _chunks(ts, threads * 4)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(_eval_chunk, [(ctx, c, with_zeta) for c in chunks]))
    return [p for part in parts for p in part]


def _refine_crossing(args):
    ctx, lo, hi, lo_ok, tol = args
    with workprec(ctx.precision.bits):
        lo, hi = mpf(str(lo)), mpf(str(hi))
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if (ctx.x_at(mid) >= 0) == lo_ok:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def _map(fn, items, threads):
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def find_crossings(ctx: ScanContext, points: list[ScanPoint], tol: float, threads: int = 1):
    """Refined t for each grid sign change of x (equivalently of f - g).

    Returns (crossings, pair_index) with pair_index[i] the crossing between
    grid points i and i+1.
    """
    jobs, idx = [], []
    for i in range(len(points) - 1):
        p, q = points[i], points[i + 1]
        if p.error or q.error or p.satisfied == q.satisfied:
            continue
        jobs.append((ctx, p.t, q.t, p.satisfied, tol))
        idx.append(i)
    refined = _map(_refine_crossing, jobs, threads)
    return refined, dict(zip(idx, refined))


def violation_intervals(points: list[ScanPoint], pair_crossing: dict) -> list:
    """Maximal runs with g > f, bounded by refined crossings or scan edges."""
    out = []
    i, n = 0, len(points)
    while i < n:
        if points[i].error or points[i].satisfied:
            i += 1
            continue
        j = i
        while j + 1 < n and not points[j + 1].error and not points[j + 1].satisfied:
            j += 1
        left = pair_crossing.get(i - 1, mpf(str(points[i].t)))
        right = pair_crossing.get(j, mpf(str(points[j].t)))
        out.append((left, right))
        i = j + 1
    return out


def _confirm(args):
    t, eps, cfg = args
    with workprec(cfg.bits):
        s = mpc((1 + decimal_mpf(eps)) / 2, mpf(str(t)))
        return eval_zeta(s, cfg).real <= 0


def confirm_witnesses(ts, eps, precision: PrecisionConfig, threads: int = 1) -> list:
    """Keep the candidates whose sign survives a rescan at doubled precision."""
    hi = precision.doubled()
    keep = _map(_confirm, [(t, eps, hi) for t in ts], threads)
    return [t for t, ok in zip(ts, keep) if ok]


def group_runs(ts, grid) -> list:
    """Consecutive grid values grouped into [first, last] runs."""
    pos = {t: i for i, t in enumerate(grid)}
    runs = []
    for t in ts:
        if runs and pos[t] == pos[runs[-1][1]] + 1:
            runs[-1][1] = t
        else:
            runs.append([t, t])
    return [(a, b) for a, b in runs]


def _re_zeta_chunk(args):
    eps, ts, cfg = args
    out = []
    with workprec(cfg.bits):
        half = (1 + decimal_mpf(eps)) / 2
        for t in ts:
            out.append(eval_zeta(mpc(half, mpf(str(t))), cfg).real)
    return out


def witness_search(eps, t_range, cfg: PrecisionConfig = SCAN_PRECISION, step: float = 0.01,
                   threads: int = 1) -> list:
    """Grid t in t_range with Re zeta((1+eps)/2 + i t) <= 0, confirmed at doubled precision.

    A degenerate range (t_min == t_max) evaluates the single point.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    t_lo, t_hi = t_range
    if t_hi < t_lo:
        raise ValueError("empty t range")
    grid = [Decimal(repr(float(t_lo)))] if t_hi == t_lo else decimal_grid(t_lo, t_hi, step)
    chunks = _chunks(grid, max(1, threads) * 4)
    vals = [v for part in _map(_re_zeta_chunk, [(eps, c, cfg) for c in chunks], threads) for v in part]
    flagged = [t for t, v in zip(grid, vals) if v <= 0]
    found = confirm_witnesses(flagged, eps, cfg, threads)
    if not found:
        log.warning("no witness with Re zeta <= 0 on [%s, %s] at eps=%s; extend the t range",
                    t_lo, t_hi, eps)
    return found


def k_study(cfg: ScanConfig, grid, threads: int = 1, cache_dir=None) -> list:
    """f and the drift of g across series orders on every ``k_stride``-th grid point."""
    if not cfg.k_orders:
        return []
    sub = grid[:: cfg.k_stride]
    orders = sorted(set(cfg.k_orders))
    curves, fs = {}, {}
    for K in orders:
        ctx = make_context(replace(cfg, series_order=K), cache_dir=cache_dir)
        pts = evaluate_grid(ctx, sub, threads, with_zeta=False)
        curves[K] = [p.g for p in pts]
        fs[K] = ctx.f
    ref = orders[-1]
    bits = cfg.precision.bits
    out = []
    with workprec(bits):
        for K in orders:
            drifts = [abs(a - b) / abs(b) for a, b in zip(curves[K], curves[ref])
                      if mpmath.isfinite(a) and mpmath.isfinite(b) and b != 0]
            drifts.sort()
            out.append({
                "order": K,
                "f": real_str(fs[K], bits),
                "reference_order": ref,
                "points": len(sub),
                "g_rel_drift_max": real_str(drifts[-1], 64) if drifts else "nan",
                "g_rel_drift_median": real_str(drifts[len(drifts) // 2], 64) if drifts else "nan",
            })
    return out


def run_scan(cfg: ScanConfig, threads: int = 1, series: ZetaSeries | None = None,
             cache_dir=None, with_k_study: bool = True) -> CrossingReport:
    ctx = make_context(cfg, series, cache_dir)
    grid = cfg.grid()
    points = evaluate_grid(ctx, grid, threads)
    crossings, pair = find_crossings(ctx, points, cfg.bisect_tol, threads)
    intervals = violation_intervals(points, pair)
    flagged = [p.t for p in points if not p.error and p.re_zeta <= 0]
    witnesses = confirm_witnesses(flagged, cfg.eps, cfg.precision, threads)
    runs = group_runs(witnesses, grid)
    if not witnesses:
        log.warning("no witness with Re zeta <= 0 in the scan range; extend the t range")
    study = k_study(cfg, grid, threads, cache_dir) if with_k_study else []
    to_mpf = lambda d: mpf(str(d))  # noqa: E731
    with workprec(cfg.precision.bits):
        return CrossingReport(
            ctx.f, crossings, intervals, [to_mpf(w) for w in witnesses], points,
            [(to_mpf(a), to_mpf(b)) for a, b in runs], study, cfg)


def scan_csv(report: CrossingReport, with_f: bool = False) -> str:
    """CSV text: t,g,x,re_zeta,satisfied[,f]; LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "g", "x", "re_zeta", "satisfied"] + (["f"] if with_f else []))
    f_s = _fmt(report.f_value)
    for p in report.points:
        row = [str(p.t), _fmt(p.g), _fmt(p.x), _fmt(p.re_zeta), "true" if p.satisfied else "false"]
        if with_f:
            row.append(f_s)
        w.writerow(row)
    return buf.getvalue()


def _fmt(v) -> str:
    with workprec(SCAN_PRECISION.bits):
        v = v if isinstance(v, mpf) else mpf(v)  # never round through the ambient 53 bits
        if not mpmath.isfinite(v):
            return "nan"
        return mpmath.nstr(v, CSV_DIGITS, min_fixed=-4, max_fixed=CSV_DIGITS)


# ------------------------------------------------------- contradiction test


def eq10_evaluate(eps, t_prime, x_value, cfg: ScanConfig | None = None,
                  series: ZetaSeries | None = None, ctx: ScanContext | None = None):
    """Right-hand side R of the contradiction test ``0 >= R``:

        R = Re^2[A] + f |z'|^2 - x - 2 Re[A] sqrt(f <gamma'|P P+|gamma'> - x),
        A = zeta(1+eps) conj(z'),  z' = zeta((1+eps)/2 + i t').

    Scalars follow the mode.  The caller decides what ``R > 0`` means.
    """
    cfg = cfg or ScanConfig(eps)
    if eps <= 1:
        zeta_one_plus_eps(eps, cfg.precision)
    ctx = ctx or make_context(replace(cfg, eps=eps), series)
    with workprec(ctx.precision.bits):
        tp = mpf(str(t_prime))
        x = mpf(x_value)
        gamma = ctx.gamma(tp)
        z_g = scalar_zeta(ctx.series, gamma, ctx.mode, ctx.precision)
        den = fock.weighted_norm2(fock.shifted_coeffs(ctx.series, gamma))
        radicand = ctx.f * den - x
        if radicand < 0:
            raise DomainError(f"negative radicand {radicand} at t' = {t_prime}")
        re_a = (ctx.zeta_u * mpmath.conj(z_g)).real
        return re_a ** 2 + ctx.f * abs(z_g) ** 2 - x - 2 * re_a * mpmath.sqrt(radicand)
