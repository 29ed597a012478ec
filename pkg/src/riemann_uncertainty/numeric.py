"""Arbitrary-precision helpers on top of mpmath.

All multiprecision work in the package goes through :func:`workprec` so the
global mpmath context is never mutated outside a ``with`` block.
"""

from __future__ import annotations

import math
import re
from contextlib import contextmanager

import mpmath
from mpmath import mpc, mpf

LOG10_2 = math.log10(2.0)

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"""^(?:
        (?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)i     # a+bi, a-i
      | (?P<re_only>[+-]?{_NUM})                    # a
      | (?P<im_only>[+-]?(?:{_NUM})?)i                  # bi, -i
    )$""",
    re.VERBOSE,
)


@contextmanager
def workprec(bits: int):
    with mpmath.workprec(int(bits)):
        yield


def digits_for(bits: int) -> int:
    """Decimal digits that round-trip a ``bits``-bit mantissa."""
    return int(math.ceil(bits * LOG10_2)) + 1


def real_str(x, bits: int = 53) -> str:
    """Decimal string for a real value, exact on re-parse at ``bits`` precision."""
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, int):
        return str(x)
    if not isinstance(x, mpf):
        with workprec(bits):
            x = mpf(x)
    # an mpf keeps its own mantissa; mpf(x) would round to the ambient precision
    if not mpmath.isfinite(x):
        return "nan" if mpmath.isnan(x) else ("inf" if x > 0 else "-inf")
    return mpmath.libmp.to_str(x._mpf_, digits_for(bits))


def decimal_mpf(x):
    """Python floats are read as the decimal literal they print as (0.2, not 0.2000...0111)."""
    if isinstance(x, mpf):
        return x
    if isinstance(x, float):
        return mpf(repr(x))
    return mpf(x) if isinstance(x, int) else mpf(str(x))


def parse_real(s: str, bits: int = 53):
    with workprec(bits):
        return +mpf(s)


def complex_str(z, bits: int = 53) -> str:
    """Format as ``a+bi`` / ``a-bi``."""
    if not isinstance(z, mpc):
        with workprec(bits):
            z = mpc(z)
    re_s = real_str(z.real, bits)
    im_s = real_str(z.imag, bits).lstrip("-")
    sign = "-" if z.imag < 0 else "+"
    return f"{re_s}{sign}{im_s}i"


def parse_complex(text: str, bits: int = 53) -> mpc:
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi``. Whitespace is rejected."""
    if not text or any(ch.isspace() for ch in text):
        raise ValueError(f"malformed complex literal {text!r}")
    m = _COMPLEX_RE.match(text)
    if m is None:
        raise ValueError(f"malformed complex literal {text!r}")
    re_part = m.group("re") or m.group("re_only")
    im_part = m.group("im") if m.group("im") is not None else m.group("im_only")
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    with workprec(bits):
        return mpc(mpf(re_part or "0"), mpf(im_part or "0"))


def horner(coeffs, z):
    """Evaluate sum_k coeffs[k] * z**k."""
    acc = 0 * z
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def taylor_shift(coeffs, z):
    """Coefficients b_m of p(z + s) = sum_m b_m s**m, i.e. b_m = p^(m)(z)/m!.

    Repeated synthetic division; O(K^2) multiply-adds.
    """
    b = list(coeffs)
    n = len(b)
    for m in range(n - 1):
        for j in range(n - 1, m, -1):
            b[j - 1] += z * b[j]
    return b
