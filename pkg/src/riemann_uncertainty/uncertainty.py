"""Both sides of the displaced-quadrature uncertainty relation.

For P the operator polynomial sum_k C_k a^k take

    X1(beta) = D(beta)+ (P + P+) D(beta),     X2 = -i (P - P+).

The left side (variance product) comes from closed forms; the right side is
evaluated twice: once in the printed ``Re^2[...]`` form and once directly as
``0.25 |<[X1, X2]>|^2`` from explicit matrices.  Whether the two agree is
measured, not assumed.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, fields

import mpmath
import numpy as np
from mpmath import mpc, mpf

from . import fock
from .errors import NumericError
from .fock import TruncationPolicy
from .numeric import decimal_mpf, parse_real, real_str, workprec
from .zeta_core import PrecisionConfig, eval_zeta

SCALE_FLOOR = 1e-30
# beyond this amplitude the double-precision truncated matrices lose the
# displaced support (D(beta) spreads level n over ~|beta| sqrt(n) levels)
MATRIX_ROUTE_MAX_AMPLITUDE = 2.0
ROUTES = ("auto", "matrix", "closed")


class EvaluationMode(str, enum.Enum):
    POLYNOMIAL = "polynomial"
    ANALYTIC = "analytic"


class Classification(str, enum.Enum):
    CONSISTENT = "consistent"
    PAPER_FORM_MISMATCH = "paper_form_mismatch"
    INEQUALITY_VIOLATION_DIRECT = "inequality_violation_direct"
    NUMERIC_ERROR = "numeric_error"


def scalar_zeta(series, z, mode: EvaluationMode, cfg: PrecisionConfig | None = None):
    """The scalar standing in for zeta(z): P_K(z) or the true zeta(z)."""
    if EvaluationMode(mode) is EvaluationMode.POLYNOMIAL:
        return series(z)
    return eval_zeta(z, cfg or PrecisionConfig(bits=series.precision.bits))


def _mp(z, bits):
    with workprec(bits):
        return mpc(z)


def variance_x1(series, alpha, beta, policy: TruncationPolicy,
                mode=EvaluationMode.POLYNOMIAL, cfg: PrecisionConfig | None = None):
    """(Delta X1(beta))^2 at |alpha> = <alpha+beta|P P+|alpha+beta> - |zeta(alpha+beta)|^2."""
    bits = (cfg or series.precision).bits
    policy.fitted(alpha + beta, extra=series.order)
    with workprec(bits):
        z = _mp(alpha, bits) + _mp(beta, bits)
        if EvaluationMode(mode) is EvaluationMode.POLYNOMIAL:
            return fock.zz_dagger_variance(series, z)
        return fock.zz_dagger_expect(series, z) - abs(scalar_zeta(series, z, mode, cfg)) ** 2


def variance_x2(series, alpha, policy: TruncationPolicy,
                mode=EvaluationMode.POLYNOMIAL, cfg: PrecisionConfig | None = None):
    return variance_x1(series, alpha, 0, policy, mode, cfg)


def _paper_bracket(series, alpha, beta, element, mode, cfg):
    """zeta(alpha+beta) zeta*(alpha) - e^{-i Im(alpha beta*)} <alpha+beta| P D(beta) P+ |alpha>."""
    za = scalar_zeta(series, alpha + beta, mode, cfg)
    zb = scalar_zeta(series, alpha, mode, cfg)
    phase = mpmath.expj(-(alpha * mpmath.conj(beta)).imag)
    return za * mpmath.conj(zb) - phase * element


def resolve_route(route: str, alpha, beta) -> str:
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    if route != "auto":
        return route
    amp = max(abs(alpha), abs(beta), abs(alpha + beta))
    return "matrix" if amp <= MATRIX_ROUTE_MAX_AMPLITUDE else "closed"


def rhs_paper(series, alpha, beta, policy: TruncationPolicy,
              mode=EvaluationMode.POLYNOMIAL, cfg: PrecisionConfig | None = None,
              route: str = "auto"):
    """Re^2 of the printed bracket.  ``route`` picks how the matrix element is obtained:
    ``matrix`` (explicit Fock matrices, double precision), ``closed`` (Taylor-shift
    form, exact at working precision) or ``auto``."""
    bits = (cfg or series.precision).bits
    with workprec(bits):
        a, b = _mp(alpha, bits), _mp(beta, bits)
        route = resolve_route(route, a, b)
        if route == "matrix":
            element = mpc(matrix_cross_element(series, complex(a), complex(b), policy))
        else:
            element = fock.displaced_cross_element(series, a, b)
        return _paper_bracket(series, a, b, element, mode, cfg).real ** 2


@dataclass(frozen=True, eq=False)
class QuadratureMatrices:
    x1: np.ndarray
    x2: np.ndarray
    z: np.ndarray
    d: np.ndarray
    policy: TruncationPolicy


def build_quadratures(series, beta, policy: TruncationPolicy) -> QuadratureMatrices:
    z = fock.build_riemann_operator(series, policy).matrix
    d = fock.displacement_matrix(complex(beta), policy.dim).matrix
    zh = z.conj().T
    x1 = d.conj().T @ (z + zh) @ d
    x2 = -1j * (z - zh)
    return QuadratureMatrices(x1, x2, z, d, policy)


def _matrix_policy(series, policy, *amps):
    return policy.fitted(*amps, extra=series.order)


def matrix_cross_element(series, alpha, beta, policy: TruncationPolicy) -> complex:
    """<alpha+beta| Z D(beta) Z+ |alpha> from truncated matrices."""
    pol = _matrix_policy(series, policy, alpha, alpha + beta)
    q = build_quadratures(series, beta, pol)
    ket = fock.coherent_vector(alpha, pol).vec
    bra = fock.coherent_vector(alpha + beta, pol).vec
    return complex(bra.conj() @ (q.z @ (q.d @ (q.z.conj().T @ ket))))


def matrix_moments(series, alpha, beta, policy: TruncationPolicy) -> dict:
    """Direct matrix variances of X1, X2 and <[X1, X2]> at the truncated |alpha>."""
    pol = _matrix_policy(series, policy, alpha, alpha + beta)
    q = build_quadratures(series, beta, pol)
    v = fock.coherent_vector(alpha, pol).vec
    vc = v.conj()
    x1v, x2v = q.x1 @ v, q.x2 @ v
    m1, m2 = vc @ x1v, vc @ x2v
    var1 = (x1v.conj() @ x1v) - m1 ** 2
    var2 = (x2v.conj() @ x2v) - m2 ** 2
    comm = (vc @ q.x1) @ x2v - (vc @ q.x2) @ x1v
    return {"var_x1": var1.real, "var_x2": var2.real, "commutator": complex(comm), "dim": pol.dim}


def commutator_closed(series, alpha, beta):
    """<alpha|[X1, X2]|alpha> without truncation.

    With Q = P(a+beta): [X1, X2] = i (C + C+), C = [Q, P+], and
    <C> = sum_{m>=1} m! b_m(alpha+beta) conj(b_m(alpha)).
    """
    bu = fock.shifted_coeffs(series, alpha + beta)
    bv = fock.shifted_coeffs(series, alpha)
    c = fock.weighted_inner(bu, bv) - bu[0] * bv[0].conjugate()
    return mpc(0, 2) * c.real


def rhs_direct(series, alpha, beta, policy: TruncationPolicy, route: str = "matrix",
               cfg: PrecisionConfig | None = None):
    """0.25 |<alpha|[X1, X2]|alpha>|^2; ``matrix`` builds X1, X2 explicitly."""
    route = resolve_route(route, alpha, beta)
    if route == "matrix":
        return 0.25 * abs(matrix_moments(series, complex(alpha), complex(beta), policy)["commutator"]) ** 2
    bits = (cfg or series.precision).bits
    with workprec(bits):
        return abs(commutator_closed(series, _mp(alpha, bits), _mp(beta, bits))) ** 2 / 4


@dataclass(frozen=True)
class UncertaintyReport:
    var_x1: object
    var_x2: object
    lhs_product: object
    rhs_paper: object
    rhs_direct: object
    slack_direct: object
    slack_paper: object
    classification: Classification
    mode: EvaluationMode
    alpha: object
    beta: object
    truncation: int
    series_order: int
    precision_bits: int = 53
    route: str = "matrix"
    error: str | None = None

    _REALS = ("var_x1", "var_x2", "lhs_product", "rhs_paper", "rhs_direct",
              "slack_direct", "slack_paper")

    def to_dict(self) -> dict:
        bits = self.precision_bits
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in self._REALS:
                out[f.name] = real_str(v, bits)
            elif f.name in ("alpha", "beta"):
                if not isinstance(v, mpc):
                    with workprec(bits):
                        v = mpc(v)
                z = v
                out[f"{f.name}_re"] = real_str(z.real, bits)
                out[f"{f.name}_im"] = real_str(z.imag, bits)
            elif isinstance(v, enum.Enum):
                out[f.name] = v.value
            else:
                out[f.name] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "UncertaintyReport":
        bits = int(d["precision_bits"])
        kw = {name: parse_real(d[name], bits) for name in cls._REALS}
        with workprec(bits):
            for name in ("alpha", "beta"):
                kw[name] = mpc(parse_real(d[f"{name}_re"], bits), parse_real(d[f"{name}_im"], bits))
        return cls(classification=Classification(d["classification"]), mode=EvaluationMode(d["mode"]),
                   truncation=int(d["truncation"]), series_order=int(d["series_order"]),
                   precision_bits=bits, route=d.get("route", "matrix"), error=d.get("error"), **kw)

    @classmethod
    def from_json(cls, text: str) -> "UncertaintyReport":
        return cls.from_dict(json.loads(text))


def matrix_noise(series, alpha, beta, policy: TruncationPolicy) -> float:
    """Absolute rounding allowance for rhs_direct and rhs_paper formed from double matrices.

    Both are squares of quantities that may cancel: <[X1, X2]> (bounded by
    2 |X1 v| |X2 v|) and the printed bracket (bounded by |P(a+b) P(a)| + |element|).
    """
    pol = _matrix_policy(series, policy, alpha, alpha + beta)
    q = build_quadratures(series, beta, pol)
    ket = fock.coherent_vector(alpha, pol).vec
    bra = fock.coherent_vector(alpha + beta, pol).vec
    unit = 2.0 ** -52 * pol.dim
    c_mag = 2 * np.linalg.norm(q.x1 @ ket) * np.linalg.norm(q.x2 @ ket)
    zh = q.z.conj().T
    bracket = (abs(complex(series(alpha + beta))) * abs(complex(series(alpha)))
               + np.linalg.norm(zh @ bra) * np.linalg.norm(q.d @ (zh @ ket)))
    return float(0.5 * unit * c_mag ** 2 + 2 * unit * bracket ** 2)


def classify(lhs, rhs_d, rhs_p, tol: float, noise: float = 0.0) -> Classification:
    """``noise`` is an absolute allowance for rounding in the right-hand sides."""
    scale = max(float(lhs + rhs_d), SCALE_FLOOR)
    slack = tol * scale + noise
    if float(lhs - rhs_d) < -slack:
        return Classification.INEQUALITY_VIOLATION_DIRECT
    if abs(float(rhs_p - rhs_d)) > slack:
        return Classification.PAPER_FORM_MISMATCH
    return Classification.CONSISTENT


def check_uncertainty(series, alpha, beta, policy: TruncationPolicy | None = None,
                      mode=EvaluationMode.POLYNOMIAL, tol: float = 1e-9,
                      cfg: PrecisionConfig | None = None, route: str = "auto") -> UncertaintyReport:
    """Evaluate every quantity of the relation at (alpha, beta) and classify.

    Numeric failures do not propagate: the report carries them in ``error``.
    """
    policy = policy or TruncationPolicy()
    mode = EvaluationMode(mode)
    bits = (cfg or series.precision).bits
    with workprec(bits):
        a, b = _mp(alpha, bits), _mp(beta, bits)
        route = resolve_route(route, a, b)
    try:
        dim = _matrix_policy(series, policy, complex(a), complex(a + b)).dim if route == "matrix" else 0
        with workprec(bits):
            v1 = variance_x1(series, a, b, policy, mode, cfg)
            v2 = variance_x2(series, a, policy, mode, cfg)
            lhs = v1 * v2
            rp = rhs_paper(series, a, b, policy, mode, cfg, route=route)
            rd = mpf(rhs_direct(series, a, b, policy, route=route, cfg=cfg))
            noise = matrix_noise(series, complex(a), complex(b), policy) if route == "matrix" else 0.0
            cls = classify(lhs, rd, rp, tol, noise)
            return UncertaintyReport(v1, v2, lhs, rp, rd, lhs - rd, lhs - rp, cls, mode, a, b,
                                     dim, series.order, bits, route)
    except NumericError as exc:
        nan = mpf("nan")
        return UncertaintyReport(nan, nan, nan, nan, nan, nan, nan, Classification.NUMERIC_ERROR,
                                 mode, a, b, policy.dim, series.order, bits, route,
                                 error=f"{type(exc).__name__}: {exc}")


def critical_pair(eps, t, bits: int = 128):
    """alpha = (1+eps)/2 + i t, beta = (1+eps)/2 - i t, so alpha + beta = 1 + eps."""
    with workprec(bits):
        half = (1 + decimal_mpf(eps)) / 2
        t = decimal_mpf(t)
        return mpc(half, t), mpc(half, -t)


def random_campaign(trials: int = 200, max_order: int = 6, dim: int = 64,
                    max_amp: float = 1.0, seed: int = 0, tol: float = 1e-9) -> dict:
    """Heisenberg check on random coefficient lists and amplitudes."""
    rng = np.random.default_rng(seed)
    policy = TruncationPolicy(dim, auto_raise=False)
    worst = math.inf
    violations = []
    counts = {c.value: 0 for c in Classification}
    for i in range(trials):
        order = int(rng.integers(1, max_order + 1))
        coeffs = rng.normal(size=order + 1) + 1j * rng.normal(size=order + 1)
        series = fock_series(coeffs)
        alpha = _random_disc(rng, max_amp)
        beta = _random_disc(rng, max_amp)
        rep = check_uncertainty(series, alpha, beta, policy, tol=tol, cfg=PrecisionConfig(bits=64))
        counts[rep.classification.value] += 1
        if rep.error is None:
            scale = max(float(rep.lhs_product + rep.rhs_direct), SCALE_FLOOR)
            worst = min(worst, float(rep.slack_direct) / scale)
        if rep.classification is Classification.INEQUALITY_VIOLATION_DIRECT:
            violations.append(i)
    return {"trials": trials, "violations": violations, "worst_relative_slack": worst,
            "classifications": counts, "seed": seed}


def _random_disc(rng, radius):
    r = radius * math.sqrt(rng.uniform())
    th = rng.uniform(0, 2 * math.pi)
    return complex(r * math.cos(th), r * math.sin(th))


def fock_series(coeffs, bits: int = 64):
    from .zeta_core import ZetaSeries
    return ZetaSeries.custom(list(coeffs), bits=bits)
