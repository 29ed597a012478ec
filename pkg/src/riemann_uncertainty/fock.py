"""Truncated Fock space: coherent states, ladder and displacement matrices,
operator polynomials, and closed-form coherent-state expectations.

Matrices are dense numpy arrays.  With ``prec=None`` they are complex128
(the fast path, fine for |alpha| up to a few); with ``prec=<bits>`` they are
object arrays of mpmath ``mpc`` evaluated at that precision.

The closed forms never touch a truncation.  They rest on two facts:
normal ordering gives

    <alpha| a^j a+^k |alpha> = sum_m m! C(j,m) C(k,m) conj(alpha)^(k-m) alpha^(j-m),

and collecting that double sum through Taylor shifts b_m(z) = P^(m)(z)/m!
turns every <P(a+u) P(a)+> into sum_m m! b_m(alpha+u) conj(b_m(alpha)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mpc, mpf
from scipy.special import gammainc

from .errors import ConvergenceError, PrecisionOverflowError, TruncationError
from .numeric import taylor_shift, workprec

MAX_DIM = 4096


@dataclass(frozen=True)
class TruncationPolicy:
    dim: int = 128
    tail_tol: float = 1e-16
    auto_raise: bool = True

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("truncation needs dim >= 2")

    @staticmethod
    def tail(alpha, dim: int) -> float:
        """Poisson weight sum_{n >= dim} e^{-|a|^2} |a|^{2n} / n!."""
        lam = float(abs(alpha)) ** 2
        if lam == 0.0:
            return 0.0
        return float(gammainc(dim, lam))

    def admits(self, alpha) -> bool:
        return self.tail(alpha, self.dim) <= self.tail_tol

    @staticmethod
    def recommended_dim(alpha, extra: int = 0) -> int:
        r = float(abs(alpha))
        return math.ceil(r * r + 10 * r + 30) + extra

    def fitted(self, *amplitudes, extra: int = 0) -> "TruncationPolicy":
        """Policy large enough for every amplitude, with ``extra`` levels of headroom
        for operator powers that push weight upward."""
        need = max([self.dim] + [self.recommended_dim(a, extra) for a in amplitudes])
        if need == self.dim and all(self.admits(a) for a in amplitudes):
            return self
        if not self.auto_raise:
            raise TruncationError(f"dim {self.dim} too small; need about {need}")
        if need > MAX_DIM:
            raise TruncationError(f"required dim {need} exceeds {MAX_DIM}")
        fitted = TruncationPolicy(need, self.tail_tol, self.auto_raise)
        for a in amplitudes:
            if not fitted.admits(a):
                raise TruncationError(f"Poisson tail at |alpha|={abs(a)} exceeds {self.tail_tol}")
        return fitted


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        n, m = self.matrix.shape
        if n != m:
            raise ValueError("operator matrix must be square")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "FockOperator":
        return FockOperator(_dagger(self.matrix), f"({self.label})^+")

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix @ other.matrix, f"{self.label}*{other.label}")

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix + other.matrix, f"{self.label}+{other.label}")

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix - other.matrix, f"{self.label}-{other.label}")

    def scaled(self, c) -> "FockOperator":
        return FockOperator(self.matrix * c, f"{c}*{self.label}")

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


@dataclass(frozen=True, eq=False)
class CoherentState:
    alpha: complex
    vec: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.vec)


def _dagger(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        return np.vectorize(mpmath.conj, otypes=[object])(m).T.copy()
    return m.conj().T.copy()


def _zeros(n: int, prec, shape=None) -> np.ndarray:
    shape = shape or (n, n)
    if prec is None:
        return np.zeros(shape, dtype=complex)
    out = np.empty(shape, dtype=object)
    out.fill(mpc(0))
    return out


def _identity(n: int, prec) -> np.ndarray:
    out = _zeros(n, prec)
    for i in range(n):
        out[i, i] = 1 if prec is None else mpc(1)
    return out


def _sqrt_levels(n: int, prec) -> np.ndarray:
    """sqrt(1), ..., sqrt(n-1) as a row vector."""
    if prec is None:
        return np.sqrt(np.arange(1, n, dtype=float))
    with workprec(prec):
        return np.array([mpmath.sqrt(k) for k in range(1, n)], dtype=object)


def identity_operator(n: int, prec=None) -> FockOperator:
    return FockOperator(_identity(n, prec), "I")


def coherent_vector(alpha, policy: TruncationPolicy, prec=None) -> CoherentState:
    """Fock amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!), n < dim."""
    if not policy.admits(alpha):
        raise TruncationError(f"dim {policy.dim} cannot hold |alpha| = {abs(alpha)} "
                              f"within tail {policy.tail_tol}")
    n = policy.dim
    if prec is None:
        a = complex(alpha)
        if a == 0:
            vec = np.zeros(n, dtype=complex)
            vec[0] = 1.0
            return CoherentState(a, vec)
        k = np.arange(n)
        # log-space keeps e^{-|a|^2/2} from underflowing at large |a|
        logmag = -0.5 * abs(a) ** 2 + k * math.log(abs(a)) - 0.5 * np.array(
            [math.lgamma(j + 1) for j in k])
        vec = np.exp(logmag) * np.exp(1j * k * np.angle(a))
        return CoherentState(a, vec)
    with workprec(prec):
        a = mpc(alpha)
        vec = np.empty(n, dtype=object)
        vec[0] = mpc(mpmath.exp(-abs(a) ** 2 / 2))
        for j in range(1, n):
            vec[j] = vec[j - 1] * a / mpmath.sqrt(j)
    return CoherentState(a, vec)


def annihilation_matrix(n: int, prec=None) -> FockOperator:
    if n < 2:
        raise ValueError("dim must be >= 2")
    out = _zeros(n, prec)
    roots = _sqrt_levels(n, prec)
    for k in range(1, n):
        out[k - 1, k] = roots[k - 1]
    return FockOperator(out, "a")


def _displacement_lower(beta, n: int, prec):
    """Entries m >= n of D(beta) via normalised associated-Laguerre recurrence.

    With l_n = beta^a e^{-x/2} sqrt(n!/(n+a)!) L_n^(a)(x), x = |beta|^2:
      l_{n+1} = [(2n+1+a-x) l_n - sqrt(n(n+a)) l_{n-1}] / sqrt((n+1)(n+1+a)).
    """
    out = _zeros(n, prec)
    if prec is None:
        b = complex(beta)
        x = abs(b) ** 2
        if x > 1400:
            raise PrecisionOverflowError(f"e^(-|beta|^2/2) underflows double precision at |beta| = {abs(b)}")
        sqrt, exp = math.sqrt, math.exp
        head = exp(-x / 2)
    else:
        b = mpc(beta)
        x = abs(b) ** 2
        sqrt, exp = mpmath.sqrt, mpmath.exp
        head = exp(-x / 2)
    for a in range(n):
        if a:
            head = head * b / sqrt(a)
        prev, cur = 0, head
        out[a, 0] = cur
        for k in range(0, n - a - 1):
            nxt = ((2 * k + 1 + a - x) * cur - (sqrt(k * (k + a)) * prev if k else 0)) / sqrt(
                (k + 1) * (k + 1 + a))
            prev, cur = cur, nxt
            out[k + 1 + a, k + 1] = cur
    return out


def displacement_matrix(beta, n: int, prec=None) -> FockOperator:
    """<m|D(beta)|k> from the closed form; upper triangle via D(beta)^+ = D(-beta)."""
    if n < 2:
        raise ValueError("dim must be >= 2")
    ctx = workprec(prec) if prec is not None else _nullcontext()
    with ctx:
        lower = _displacement_lower(beta, n, prec)
        conj = mpmath.conj if prec is not None else np.conj
        upper_src = _displacement_lower(-conj(beta), n, prec)
    out = lower
    for m in range(n):
        for k in range(m + 1, n):
            out[m, k] = upper_src[k, m]
    if prec is None and not np.all(np.isfinite(out)):
        raise PrecisionOverflowError(f"displacement entries overflow at |beta| = {abs(beta)}")
    return FockOperator(out, f"D({beta})")


class _nullcontext:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def displacement_expm_oracle(beta, n: int, prec=None, pad: int | None = None,
                             max_terms: int = 400) -> FockOperator:
    """exp(beta a+ - conj(beta) a) by scaling-and-squaring Taylor series.

    The generator lives on a padded space (n + pad levels) and the result is
    cropped, so the corner is not polluted by the truncated commutator.
    """
    if n < 2:
        raise ValueError("dim must be >= 2")
    pad = pad if pad is not None else TruncationPolicy.recommended_dim(beta, 10)
    big = n + pad
    a = annihilation_matrix(big, prec).matrix
    ctx = workprec(prec) if prec is not None else _nullcontext()
    with ctx:
        if prec is None:
            b = complex(beta)
            gen = b * a.conj().T - np.conj(b) * a
            eps = 2.0 ** -60
            absf = np.abs
        else:
            b = mpc(beta)
            gen = b * _dagger(a) - mpmath.conj(b) * a
            eps = mpf(2) ** -(prec + 8)
            absf = np.vectorize(abs, otypes=[object])
        norm = float(absf(gen).sum(axis=1).max())
        squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
        g = gen / (2 ** squarings)
        result = _identity(big, prec)
        term = _identity(big, prec)
        for k in range(1, max_terms + 1):
            term = term @ g / k
            result = result + term
            if float(absf(term).max()) < eps:
                break
        else:
            raise ConvergenceError("exponential series did not converge")
        for _ in range(squarings):
            result = result @ result
    return FockOperator(result[:n, :n].copy(), f"expm D({beta})")


def times_annihilation(m: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """M @ a without forming a: column k of the product is sqrt(k) * column k-1 of M."""
    out = np.empty_like(m)
    out[:, 0] = 0 if m.dtype != object else mpc(0)
    out[:, 1:] = m[:, :-1] * roots
    return out


def build_riemann_operator(series, policy: TruncationPolicy, prec=None) -> FockOperator:
    """sum_k C_k a^k on the truncation, by Horner's rule in a."""
    n = policy.dim
    roots = _sqrt_levels(n, prec)
    ctx = workprec(prec) if prec is not None else _nullcontext()
    with ctx:
        coeffs = [complex(c) for c in series.coeffs] if prec is None else [mpc(c) for c in series.coeffs]
        eye = _identity(n, prec)
        z = eye * coeffs[-1]
        for c in reversed(coeffs[:-1]):
            z = times_annihilation(z, roots) + eye * c
    if prec is None and not np.all(np.isfinite(z)):
        raise PrecisionOverflowError("Riemann operator entries overflow in double precision")
    return FockOperator(z, f"zeta(K={series.order},N={n})")


def expect(op: FockOperator, state: CoherentState):
    """<v|M|v> for the (unnormalised) truncated coherent vector v."""
    if op.dim != state.dim:
        raise ValueError(f"dimension mismatch {op.dim} vs {state.dim}")
    v = state.vec
    if v.dtype == object:
        vc = np.array([mpmath.conj(x) for x in v], dtype=object)
    else:
        vc = v.conj()
    return vc @ (op.matrix @ v)


# -------------------------------------------------------------- closed forms


def aj_adk_expectation(alpha, j: int, k: int):
    """<alpha| a^j (a+)^k |alpha>, exact (no truncation)."""
    if j < 0 or k < 0:
        raise ValueError("powers must be non-negative")
    ac = alpha.conjugate()
    total = 0 * alpha
    for m in range(min(j, k) + 1):
        total += math.factorial(m) * math.comb(j, m) * math.comb(k, m) * ac ** (k - m) * alpha ** (j - m)
    return total


def zz_dagger_expect_normal_ordered(series, alpha):
    """sum_{j,k} C_j conj(C_k) <a^j a+^k>: the O(K^3) reference form."""
    cs = series.coeffs
    total = 0 * alpha
    for j, cj in enumerate(cs):
        for k, ck in enumerate(cs):
            total += cj * ck.conjugate() * aj_adk_expectation(alpha, j, k)
    return total.real


def shifted_coeffs(series, z):
    """b_m = P^(m)(z) / m!, m = 0..K."""
    return taylor_shift(series.coeffs, z)


def weighted_inner(bu, bv):
    """sum_m m! bu_m conj(bv_m)."""
    total = 0 * bu[0]
    fact = 1
    for m, (x, y) in enumerate(zip(bu, bv)):
        if m:
            fact *= m
        total += fact * x * y.conjugate()
    return total


def weighted_norm2(b, start: int = 0):
    """sum_{m >= start} m! |b_m|^2."""
    total = 0 * abs(b[0])
    fact = 1
    for m, x in enumerate(b):
        if m:
            fact *= m
        if m >= start:
            total += fact * (x.real ** 2 + x.imag ** 2)
    return total


def zz_dagger_expect(series, alpha):
    """<alpha| P(a) P(a)+ |alpha> = sum_m |P^(m)(alpha)|^2 / m!  (real, >= |P(alpha)|^2)."""
    return weighted_norm2(shifted_coeffs(series, alpha))


def zz_dagger_variance(series, alpha):
    """<P P+> - |P(alpha)|^2, accumulated without cancellation."""
    return weighted_norm2(shifted_coeffs(series, alpha), start=1)


def cross_expect(series, alpha, shift):
    """<alpha| P(a + shift) P(a)+ |alpha>."""
    return weighted_inner(shifted_coeffs(series, alpha + shift), shifted_coeffs(series, alpha))


def displaced_cross_element(series, alpha, beta):
    """<alpha+beta| P(a) D(beta) P(a)+ |alpha>, using P(a) D(beta) = D(beta) P(a+beta)
    and <alpha+beta| D(beta) = exp(-i Im(alpha conj(beta))) <alpha|."""
    phase = mpmath.expj(-(alpha * beta.conjugate()).imag) if isinstance(alpha, mpc) else \
        np.exp(-1j * (alpha * beta.conjugate()).imag)
    return phase * cross_expect(series, alpha, beta)
