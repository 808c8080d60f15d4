"""Fixed-precision reals for boundary-safe circle comparisons.

A :class:`FixedReal` stores ``alpha ~ mantissa / 2**frac_bits`` with
``|alpha - mantissa / 2**frac_bits| <= err_ulps / 2**frac_bits``.  Rational
inputs also keep the exact value, and comparisons against them are decided
exactly.  Irrational inputs are decided only when the computed distance is
farther than the accumulated error from the boundary; otherwise the caller
gets :class:`PrecisionError` and must ask for more bits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .errors import ParseError, PrecisionError, PreconditionError

__all__ = ["FixedReal", "parse_real", "parse_rational", "circle_within"]


def parse_rational(value) -> Fraction:
    """Exact rational from ``int``, ``Fraction`` or text like ``1/2``, ``0.3``.

    Floats are rejected since their binary value is rarely the intended one.
    """
    if isinstance(value, bool):
        raise PreconditionError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        raise PreconditionError(f"pass {value!r} as an exact string such as '1/2'")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {value!r}") from exc
    raise PreconditionError(f"not a rational: {value!r}")


@dataclass(frozen=True)
class FixedReal:
    mantissa: int
    frac_bits: int
    err_ulps: int
    label: str
    exact: Fraction | None = None

    @classmethod
    def from_rational(cls, q, frac_bits: int = 64, label: str | None = None) -> "FixedReal":
        q = parse_rational(q)
        scaled = q * (1 << frac_bits)
        m = scaled.numerator // scaled.denominator
        err = 0 if scaled.denominator == 1 else 1
        return cls(m, frac_bits, err, label or str(q), q)

    @classmethod
    def sqrt(cls, k: int, frac_bits: int = 64) -> "FixedReal":
        if k < 0:
            raise PreconditionError("square root of a negative number")
        r = isqrt(k)
        if r * r == k:
            return cls.from_rational(r, frac_bits, f"sqrt({k})")
        m = isqrt(k << (2 * frac_bits))
        return cls(m, frac_bits, 1, f"sqrt({k})")

    def with_bits(self, frac_bits: int) -> "FixedReal":
        """Re-derive at another precision (only for parseable labels)."""
        return parse_real(self.label, frac_bits)

    def to_json(self) -> dict:
        return {"value": self.label, "frac_bits": self.frac_bits}

    def __float__(self):
        if self.exact is not None:
            return float(self.exact)
        return self.mantissa / 2.0**self.frac_bits


_SQRT = re.compile(r"^\s*sqrt\(\s*(\d+)\s*\)\s*$")


def parse_real(text, frac_bits: int = 64) -> FixedReal:
    """``sqrt(k)``, ``p/q``, integers and decimals."""
    if isinstance(text, FixedReal):
        return text if text.frac_bits == frac_bits else text.with_bits(frac_bits)
    if frac_bits < 1:
        raise PreconditionError("frac_bits must be positive")
    if isinstance(text, str):
        m = _SQRT.match(text)
        if m:
            return FixedReal.sqrt(int(m.group(1)), frac_bits)
    return FixedReal.from_rational(text, frac_bits)


def circle_within(values, alpha: FixedReal, epsilon: Fraction) -> np.ndarray:
    """Boolean array: ``dist(v * alpha mod 1, 0) < epsilon`` for integer ``v``.

    ``values`` are nonnegative integers (numpy array or list of Python ints).
    Raises :class:`PrecisionError` when some ``v`` cannot be decided.
    """
    epsilon = parse_rational(epsilon)
    if not 0 < epsilon < Fraction(1, 2):
        raise PreconditionError("epsilon must lie in (0, 1/2)")
    if alpha.exact is not None:
        return _within_exact(values, alpha.exact, epsilon)
    b = alpha.frac_bits
    scale = 1 << b
    ec_num = epsilon.numerator * scale
    ec = -(-ec_num // epsilon.denominator)  # ceil(eps * 2^b)
    arr = np.asarray(values) if not isinstance(values, np.ndarray) else values
    if (
        b <= 64
        and arr.dtype != object
        and arr.size
        and int(arr.min()) >= 0
        and int(arr.max()) < (1 << 62) // max(1, alpha.err_ulps)
    ):
        return _within_fast(arr.astype(np.uint64), alpha, ec)
    out = np.zeros(len(values), dtype=bool)
    mask = scale - 1
    m, e = alpha.mantissa, alpha.err_ulps
    for k, v in enumerate(values):
        v = int(v)
        phi = (v * m) & mask
        d = min(phi, scale - phi)
        err = abs(v) * e
        if d + err <= ec - 1:
            out[k] = True
        elif d - err >= ec:
            out[k] = False
        else:
            raise PrecisionError(
                f"{alpha.label} at {b} fractional bits cannot decide v={v} against epsilon={epsilon}"
            )
    return out


def _within_fast(v: np.ndarray, alpha: FixedReal, ec: int) -> np.ndarray:
    b = alpha.frac_bits
    m = np.uint64(alpha.mantissa & ((1 << 64) - 1))
    with np.errstate(over="ignore"):
        phi = v * m
    if b < 64:
        phi &= np.uint64((1 << b) - 1)
        half = np.uint64(1 << (b - 1))
        full = np.uint64(1 << b)
        d = np.where(phi > half, full - phi, phi)
    else:
        d = np.where(phi > np.uint64(1 << 63), np.uint64(0) - phi, phi)
    err = v * np.uint64(alpha.err_ulps)
    inside = d + err <= np.uint64(ec - 1)
    # d - err >= ec  <=>  d >= ec + err
    outside = d >= np.uint64(ec) + err
    undecided = ~(inside | outside)
    if undecided.any():
        k = int(np.argmax(undecided))
        raise PrecisionError(
            f"{alpha.label} at {b} fractional bits cannot decide v={int(v[k])}; use more bits"
        )
    return inside


def _within_exact(values, q: Fraction, epsilon: Fraction) -> np.ndarray:
    p, den = q.numerator % q.denominator, q.denominator
    en, ed = epsilon.numerator, epsilon.denominator
    arr = np.asarray(values)
    if arr.size == 0:
        return np.zeros(0, dtype=bool)
    small = (
        den < (1 << 20)
        and arr.dtype != object
        and ed * den < (1 << 40)
        and en * den < (1 << 62)
    )
    if small:
        r = (arr.astype(np.int64) % den) * p % den
        d = np.minimum(r, den - r)
        # d / den < en / ed
        return d * ed < en * den
    out = np.zeros(len(arr), dtype=bool)
    for k, v in enumerate(values):
        r = (int(v) * p) % den
        out[k] = min(r, den - r) * ed < en * den
    return out
