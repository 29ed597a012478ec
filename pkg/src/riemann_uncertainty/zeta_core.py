"""Riemann zeta in the critical region, its Maclaurin coefficients, and critical-line zeros.

Evaluation uses the alternating (Dirichlet eta) series with Borwein's
Chebyshev-weighted acceleration,

    zeta(s) = eta(s) / (1 - 2**(1-s)),

which converges for every s we need (the coefficient contour dips to
Re s = -r).  Coefficients C_k of zeta(s) = sum_k C_k s**k come from a
discrete Cauchy integral on |s| = r < 1.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import mpmath
from mpmath import mpc, mpf

from .errors import ClaimViolation, ConvergenceError, NoZeroError, PoleError
from .numeric import decimal_mpf, horner, parse_real, real_str, workprec

CACHE_VERSION = 1
_GUARD_BITS = 24
_LOG_3_PLUS_SQRT8 = math.log(3.0 + math.sqrt(8.0))


def _default_bits() -> int:
    env = os.environ.get("RIEMANN_PREC_BITS")
    return int(env) if env else 128


@dataclass(frozen=True)
class PrecisionConfig:
    bits: int = field(default_factory=_default_bits)
    target_abs_err: float = 1e-30
    max_terms: int = 4000

    def __post_init__(self):
        if self.bits < 53:
            raise ValueError(f"bits must be >= 53, got {self.bits}")
        if not self.target_abs_err > 0:
            raise ValueError("target_abs_err must be positive")
        if self.max_terms < 8:
            raise ValueError("max_terms must be >= 8")

    @classmethod
    def for_bits(cls, bits: int, **kw) -> "PrecisionConfig":
        """Config whose error target sits ~20 bits above the rounding floor."""
        kw.setdefault("target_abs_err", float(2.0 ** -(bits - 20)))
        return cls(bits=bits, **kw)

    def doubled(self) -> "PrecisionConfig":
        return PrecisionConfig(self.bits * 2, self.target_abs_err, self.max_terms * 2)

    def to_dict(self) -> dict:
        return {"bits": self.bits, "target_abs_err": repr(self.target_abs_err),
                "max_terms": self.max_terms}


COEFF_PRECISION = PrecisionConfig(bits=256, target_abs_err=1e-60, max_terms=4000)


@dataclass(frozen=True)
class ZetaSeries:
    """Maclaurin coefficients C_0..C_K, plus how they were obtained."""

    coeffs: tuple
    contour_radius: float = 0.5
    samples: int = 512
    precision: PrecisionConfig = COEFF_PRECISION
    label: str = "zeta"

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("a series needs at least one coefficient")
        if not 0 < self.contour_radius < 1:
            raise ValueError("contour radius must lie in (0, 1)")
        if self.samples < 4 * len(self.coeffs):
            raise ValueError("samples must be >= 4(K+1)")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def custom(cls, coeffs, label: str = "custom", bits: int = 256) -> "ZetaSeries":
        """Arbitrary coefficient list (toy operators, property campaigns)."""
        with workprec(bits):
            cs = tuple(mpc(c) for c in coeffs)
        return cls(cs, 0.5, max(512, 8 * len(cs)), PrecisionConfig.for_bits(bits), label)

    def truncated(self, order: int) -> "ZetaSeries":
        if order > self.order:
            raise ValueError(f"series has order {self.order}, cannot truncate to {order}")
        return ZetaSeries(self.coeffs[: order + 1], self.contour_radius, self.samples,
                          self.precision, self.label)

    def __call__(self, z):
        """The degree-K polynomial P_K(z)."""
        return horner(self.coeffs, z)

    def coeff_strings(self) -> list:
        bits = self.precision.bits
        return [[real_str(c.real, bits), real_str(c.imag, bits)] for c in self.coeffs]

    def checksum(self) -> str:
        blob = json.dumps(self.coeff_strings(), separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_json(self) -> dict:
        return {
            "version": CACHE_VERSION,
            "order": self.order,
            "radius": repr(float(self.contour_radius)),
            "samples": self.samples,
            "bits": self.precision.bits,
            "target_abs_err": repr(self.precision.target_abs_err),
            "label": self.label,
            "coeffs": self.coeff_strings(),
            "checksum": self.checksum(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ZetaSeries":
        bits = int(obj["bits"])
        with workprec(bits):
            coeffs = tuple(mpc(parse_real(re, bits), parse_real(im, bits)) for re, im in obj["coeffs"])
        prec = PrecisionConfig(bits, float(obj.get("target_abs_err", 2.0 ** -(bits - 20))))
        series = cls(coeffs, float(obj["radius"]), int(obj["samples"]), prec,
                     obj.get("label", "zeta"))
        if series.order != int(obj["order"]):
            raise ValueError("order field disagrees with coefficient count")
        if series.checksum() != obj["checksum"]:
            raise ValueError("coefficient checksum mismatch")
        return series


@dataclass(frozen=True)
class ZeroLocation:
    t: object
    residual: object
    bracket: tuple

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo <= self.t <= hi:
            raise ValueError("bracket does not contain t")


# ---------------------------------------------------------------- evaluation


@lru_cache(maxsize=64)
def _borwein_weights(n: int, prec: int):
    """d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), k = 0..n."""
    with workprec(prec):
        term = mpf(1) / n
        acc = mpf(0)
        d = []
        for i in range(n + 1):
            if i:
                term = term * (n + i - 1) * (n - i + 1) * 4 / ((2 * i) * (2 * i - 1))
            acc += term
            d.append(n * acc)
        dn = d[n]
        # alternating, pre-normalised weights (-1)^k (d_n - d_k) / d_n
        w = tuple((-1) ** k * (dn - d[k]) / dn for k in range(n))
        logs = tuple(mpmath.log(k + 1) for k in range(n))
    return w, logs


def _terms_needed(s: mpc, cfg: PrecisionConfig, denom_abs) -> int:
    # |error| <= 3 (1+2|t|) / (3+sqrt 8)^n * max(1, |1/Gamma(s)|) / |1 - 2^(1-s)|
    t = abs(float(s.imag))
    log_rg = max(0.0, float(mpmath.log(abs(mpmath.rgamma(s)))))  # |1/Gamma| ~ e^(pi|t|/2)
    log_pref = math.log(3.0 * (1.0 + 2.0 * t)) + log_rg - math.log(float(denom_abs))
    log_target = math.log(cfg.target_abs_err) - math.log(256.0)
    n = math.ceil((log_pref - log_target) / _LOG_3_PLUS_SQRT8)
    return max(n, 8)


def eval_zeta(s, cfg: PrecisionConfig | None = None) -> mpc:
    """zeta(s) for Re s > -1, s != 1, with absolute error below ``cfg.target_abs_err``."""
    cfg = cfg or PrecisionConfig()
    prec = cfg.bits + _GUARD_BITS
    with workprec(prec):
        s = mpc(s)
        if s == 1:
            raise PoleError("zeta has a pole at s = 1")
        if s.real <= -1:
            raise ValueError(f"Re s must exceed -1, got {s}")
        denom = 1 - mpmath.power(2, 1 - s)
        if abs(denom) < mpf(2) ** (-(cfg.bits // 2)):
            raise ConvergenceError(f"eta relation degenerate at s = {s} (1 - 2^(1-s) ~ 0)")
        n = _terms_needed(s, cfg, abs(denom))
        if n > cfg.max_terms:
            raise ConvergenceError(f"needs {n} terms at s = {s}, max_terms = {cfg.max_terms}")
        # terms (k+1)^(-s) grow like n^|Re s| when Re s < 0
        extra = int(math.log2(n) * abs(float(s.real))) + 1 if s.real < 0 else 0
        w, logs = _borwein_weights(n, prec + extra)
        with workprec(prec + extra):
            acc = mpc(0)
            for wk, lk in zip(w, logs):
                acc += wk * mpmath.exp(-s * lk)
            val = acc / denom
    with workprec(cfg.bits):
        return +val


def zeta_one_plus_eps(eps, cfg: PrecisionConfig | None = None) -> mpf:
    """zeta(1+eps) for eps in (0, 1], asserting it is a positive real."""
    cfg = cfg or PrecisionConfig()
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    z = eval_zeta(1 + decimal_mpf(eps), cfg)
    if abs(z.imag) > cfg.target_abs_err or z.real <= 0:
        raise ClaimViolation(f"zeta(1+{eps}) = {z} is not a positive real")
    return z.real


# -------------------------------------------------------------- coefficients


def taylor_coeffs(K: int, r: float = 0.5, M: int | None = None,
                  cfg: PrecisionConfig = COEFF_PRECISION) -> ZetaSeries:
    """C_0..C_K by the M-point trapezoidal Cauchy integral on |s| = r."""
    if K < 0:
        raise ValueError("order must be >= 0")
    if not 0 < r < 1:
        raise ValueError(f"contour radius must lie in (0, 1), got {r}")
    M = M if M is not None else max(512, 8 * (K + 1))
    if M < 4 * (K + 1):
        raise ValueError(f"need at least 4(K+1) = {4 * (K + 1)} samples, got {M}")

    with workprec(cfg.bits + _GUARD_BITS):
        rr = mpf(r)
        nodes = [rr * mpmath.expjpi(mpf(2 * j) / M) for j in range(M)]
        values = [None] * M
        # zeta(conj s) = conj zeta(s): evaluate the upper half only
        for j in range(M // 2 + 1):
            values[j] = eval_zeta(nodes[j], cfg)
        for j in range(M // 2 + 1, M):
            values[j] = mpmath.conj(values[M - j])
        roots = [mpmath.expjpi(mpf(-2 * j) / M) for j in range(M)]
        coeffs = []
        for k in range(K + 1):
            acc = mpc(0)
            for j in range(M):
                acc += values[j] * roots[(j * k) % M]
            coeffs.append(acc / (M * rr ** k))
    with workprec(cfg.bits):
        # drop guard bits so a fresh series equals its cached round-trip
        coeffs = [+c for c in coeffs]

    series = ZetaSeries(tuple(coeffs), float(r), M, cfg, "zeta")
    _check_series(series, cfg)
    return series


def series_tail_bound(K: int, z_abs: float) -> float:
    """Bound on |sum_{k>K} C_k z^k| for |z| < 1 using |C_k| <= 2."""
    z_abs = float(z_abs)
    return 2.0 * z_abs ** (K + 1) / (1.0 - z_abs)


def _check_series(series: ZetaSeries, cfg: PrecisionConfig) -> None:
    r = series.contour_radius
    tol_im = 10 * cfg.target_abs_err
    for k, c in enumerate(series.coeffs):
        if abs(c.imag) > tol_im * r ** -k:
            raise ConvergenceError(f"Im C_{k} = {c.imag} exceeds tolerance")
    rho = 0.8 * r
    with workprec(cfg.bits):
        for z in (mpf(rho), mpc(0, rho), mpc(-rho * 0.6, rho * 0.8)):
            diff = abs(series(z) - eval_zeta(z, cfg))
            allowed = 10 * cfg.target_abs_err + series_tail_bound(series.order, rho)
            if diff > allowed:
                raise ConvergenceError(f"reconstruction at s = {z} off by {diff}")


def cache_path(cache_dir, K: int, r: float, M: int, bits: int) -> Path:
    return Path(cache_dir) / f"zeta-series-v{CACHE_VERSION}-K{K}-r{r!r}-M{M}-b{bits}.json"


def default_cache_dir() -> Path:
    env = os.environ.get("RIEMANN_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "riemann_uncertainty"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_or_compute_series(K: int, r: float = 0.5, M: int | None = None,
                           cfg: PrecisionConfig = COEFF_PRECISION,
                           cache_dir=None) -> tuple[ZetaSeries, bool]:
    """Return (series, cache_hit).  ``cache_dir=False`` disables the cache."""
    M = M if M is not None else max(512, 8 * (K + 1))
    if cache_dir is False:
        return taylor_coeffs(K, r, M, cfg), False
    path = cache_path(cache_dir or default_cache_dir(), K, r, M, cfg.bits)
    if path.exists():
        try:
            return ZetaSeries.from_json(json.loads(path.read_text())), True
        except (ValueError, KeyError, json.JSONDecodeError):
            pass  # corrupt entry: recompute and overwrite
    series = taylor_coeffs(K, r, M, cfg)
    atomic_write_text(path, json.dumps(series.to_json(), indent=1) + "\n")
    return series, False


# --------------------------------------------------------------------- zeros


def argument_principle_count(sigma_lo, sigma_hi, t_lo, t_hi,
                             cfg: PrecisionConfig | None = None,
                             initial: int = 64, max_depth: int = 12) -> int:
    """Number of zeros of zeta inside the rectangle, from the winding of arg zeta."""
    cfg = cfg or PrecisionConfig()
    corners = [mpc(sigma_lo, t_lo), mpc(sigma_hi, t_lo), mpc(sigma_hi, t_hi), mpc(sigma_lo, t_hi)]
    total = mpf(0)
    with workprec(cfg.bits):
        for a, b in zip(corners, corners[1:] + corners[:1]):
            pts = [a + (b - a) * mpf(j) / initial for j in range(initial + 1)]
            vals = [eval_zeta(p, cfg) for p in pts]
            for j in range(initial):
                total += _winding_piece(pts[j], pts[j + 1], vals[j], vals[j + 1], cfg, max_depth)
    winding = total / (2 * mpmath.pi)
    count = int(mpmath.nint(winding))
    if abs(winding - count) > 0.1:
        raise ConvergenceError(f"argument-principle winding {winding} is not near an integer")
    return count


def _winding_piece(a, b, fa, fb, cfg, depth):
    d = mpmath.arg(fb / fa)
    if abs(d) <= mpmath.pi / 8 or depth == 0:
        if depth == 0 and abs(d) > mpmath.pi / 2:
            raise ConvergenceError("argument increment unresolved; contour passes too near a zero")
        return d
    m = (a + b) / 2
    fm = eval_zeta(m, cfg)
    return (_winding_piece(a, m, fa, fm, cfg, depth - 1)
            + _winding_piece(m, b, fm, fb, cfg, depth - 1))


def _newton_zero(s, cfg: PrecisionConfig, max_iter: int = 60):
    h = mpf(2) ** (-(cfg.bits // 3))
    for _ in range(max_iter):
        f = eval_zeta(s, cfg)
        df = (eval_zeta(s + h, cfg) - eval_zeta(s - h, cfg)) / (2 * h)
        if df == 0:
            raise ConvergenceError("zero derivative in Newton refinement")
        step = f / df
        s = s - step
        if abs(step) < mpf(2) ** (-(cfg.bits - 16)) * max(1, abs(s)):
            break
    else:
        raise ConvergenceError("Newton refinement did not converge")
    return s


def find_zero_near(t0, cfg: PrecisionConfig | None = None, grid_step: float = 0.01,
                   edge: float = 0.01) -> ZeroLocation:
    """Critical-line zero ordinate nearest ``t0`` within [t0-1, t0+1]."""
    cfg = cfg or PrecisionConfig()
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    t_lo, t_hi = max(float(t0) - 1.0, 0.5), float(t0) + 1.0
    count = argument_principle_count(edge, 1 - edge, t_lo, t_hi, cfg)
    if count == 0:
        raise NoZeroError(f"no zeros of zeta with {t_lo} < Im s < {t_hi}")

    n = int(round((t_hi - t_lo) / grid_step))
    with workprec(cfg.bits):
        half = mpf(1) / 2
        ts = [mpf(t_lo) + j * mpf(grid_step) for j in range(n + 1)]
        mags = [abs(eval_zeta(mpc(half, t), cfg)) for t in ts]
        seeds = [j for j in range(1, n) if mags[j] <= mags[j - 1] and mags[j] <= mags[j + 1]]
        seeds.sort(key=lambda j: mags[j])
        found = []
        for j in seeds:
            try:
                s = _newton_zero(mpc(half, ts[j]), cfg)
            except ConvergenceError:
                continue
            if not t_lo <= s.imag <= t_hi or abs(s.real - half) > 1e-6:
                continue
            t = s.imag
            if any(abs(t - z.t) < 1e-8 for z in found):
                continue
            residual = abs(eval_zeta(mpc(half, t), cfg))
            if residual > cfg.target_abs_err:
                continue
            lo, hi = ts[j - 1], ts[j + 1]
            bracket = (min(lo, t), max(hi, t))
            found.append(ZeroLocation(t, residual, bracket))
            if len(found) == count:
                break
    if not found:
        raise ConvergenceError(f"argument principle counts {count} zero(s) but refinement found none")
    return min(found, key=lambda z: abs(z.t - t0))
