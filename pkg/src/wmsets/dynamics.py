"""Statistics along the characteristic word of a set.

Everything here is an estimate at finite ``N`` computed from the single word
``w(n) = 1_A(n)``; nothing stands in for an invariant measure.  Frequencies
are exact :class:`~fractions.Fraction` values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Sequence

import numpy as np

from .errors import HorizonError, ParseError, PreconditionError
from .integer_sets import IntegerSet
from .polynomials import IntPolynomial
from .reals import FixedReal, circle_within, parse_rational, parse_real

__all__ = [
    "CylinderPattern",
    "MixingDiagnostic",
    "DiscrepancyReport",
    "VdcReport",
    "cylinder_frequency",
    "weak_mixing_statistic",
    "mixing_table",
    "all_patterns",
    "genericity_defect",
    "vdc_average",
    "weyl_discrepancy",
    "cesaro_density_check",
]

MAX_PATTERN_LENGTH = 20


@dataclass(frozen=True)
class CylinderPattern:
    """Matches at ``n`` iff ``w(n + i - 1) = symbols[i - 1]`` for every ``i``."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(c) for c in self.symbols)
        if not s:
            raise PreconditionError("pattern must be nonempty")
        if len(s) > MAX_PATTERN_LENGTH:
            raise PreconditionError(f"pattern longer than {MAX_PATTERN_LENGTH}")
        if any(c not in (0, 1) for c in s):
            raise PreconditionError("pattern symbols must be 0 or 1")
        object.__setattr__(self, "symbols", s)

    @classmethod
    def parse(cls, text) -> "CylinderPattern":
        if isinstance(text, CylinderPattern):
            return text
        text = str(text).strip()
        if not text or set(text) - {"0", "1"}:
            raise ParseError(f"pattern must be a 0/1 string, got {text!r}")
        return cls(tuple(int(c) for c in text))

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return "".join(map(str, self.symbols))

    @property
    def code(self) -> int:
        v = 0
        for c in self.symbols:
            v = 2 * v + c
        return v


def all_patterns(max_len: int) -> list[CylinderPattern]:
    return [
        CylinderPattern(bits)
        for k in range(1, max_len + 1)
        for bits in itertools.product((0, 1), repeat=k)
    ]


def _need(A: IntegerSet, last: int, what: str):
    if last > A.horizon:
        raise HorizonError(f"{what} needs positions up to {last} but the set horizon is {A.horizon}")


def _matches(A: IntegerSet, pattern: CylinderPattern, count: int) -> np.ndarray:
    """Boolean array over positions 1..count."""
    w = A.mask
    out = np.ones(count, dtype=bool)
    for i, c in enumerate(pattern.symbols):
        seg = w[i:i + count]
        out &= seg if c else ~seg
    return out


def cylinder_frequency(A: IntegerSet, pattern, N: int) -> Fraction:
    pattern = CylinderPattern.parse(pattern)
    N = int(N)
    if N < 1:
        raise PreconditionError("N must be >= 1")
    _need(A, N + len(pattern), "N + pattern length")
    return Fraction(int(np.count_nonzero(_matches(A, pattern, N))), N)


@dataclass
class MixingDiagnostic:
    N: int
    U: CylinderPattern
    V: CylinderPattern
    lag_cap: int
    W: Fraction
    f_U: Fraction
    f_V: Fraction
    series: list[Fraction] | None = field(default=None, repr=False)

    def to_row(self) -> dict:
        return {
            "U": str(self.U), "V": str(self.V), "N": self.N, "lag_cap": self.lag_cap,
            "f_U": self.f_U, "f_V": self.f_V, "W": self.W,
        }


def weak_mixing_statistic(A: IntegerSet, U, V, N: int, lag_cap: int, keep_series: bool = False) -> MixingDiagnostic:
    """``W = E_{n <= lag_cap} |f_n - f_U f_V|`` with ``f_n`` the frequency of
    ``U`` at ``m`` and ``V`` at ``m + n`` over ``m <= N``."""
    U, V = CylinderPattern.parse(U), CylinderPattern.parse(V)
    N, lag_cap = int(N), int(lag_cap)
    if N < 1 or lag_cap < 1:
        raise PreconditionError("N and lag_cap must be >= 1")
    _need(A, N + lag_cap + max(len(U), len(V)), "N + lag_cap + pattern length")
    mu = _matches(A, U, N)
    mv = _matches(A, V, N + lag_cap)
    cu = int(np.count_nonzero(mu))
    cv = int(np.count_nonzero(mv[:N]))
    prod = cu * cv
    total = 0
    series = [] if keep_series else None
    for n in range(1, lag_cap + 1):
        c = int(np.count_nonzero(mu & mv[n:n + N]))
        total += abs(c * N - prod)
        if keep_series:
            series.append(Fraction(c, N))
    W = Fraction(total, N * N * lag_cap)
    return MixingDiagnostic(N, U, V, lag_cap, W, Fraction(cu, N), Fraction(cv, N), series)


def mixing_table(A: IntegerSet, max_len: int, N: int, lag_cap: int) -> list[MixingDiagnostic]:
    """:func:`weak_mixing_statistic` for every pair of patterns of length at
    most ``max_len``, from one joint window histogram per lag."""
    N, lag_cap, L = int(N), int(lag_cap), int(max_len)
    if not 1 <= L <= 8:
        raise PreconditionError("max_len must lie in 1..8 for the table")
    if N < 1 or lag_cap < 1:
        raise PreconditionError("N and lag_cap must be >= 1")
    _need(A, N + lag_cap + L, "N + lag_cap + pattern length")
    w = A.mask.astype(np.int64)
    span = N + lag_cap
    codes = np.zeros(span, dtype=np.int64)
    for i in range(L):
        codes = 2 * codes + w[i:i + span]
    B = 1 << L
    head = codes[:N] * B
    pats = all_patterns(L)
    # marginal counts over m <= N of each pattern
    base = np.bincount(codes[:N], minlength=B)
    marg = {}
    for p in pats:
        k = len(p)
        marg[p] = int(base.reshape(1 << k, 1 << (L - k)).sum(axis=1)[p.code])
    acc = {(u, v): 0 for u in pats for v in pats}
    for n in range(1, lag_cap + 1):
        joint = np.bincount(head + codes[n:n + N], minlength=B * B).reshape(B, B)
        for ku in range(1, L + 1):
            ju = joint.reshape(1 << ku, B >> ku, B).sum(axis=1)
            for kv in range(1, L + 1):
                j = ju.reshape(1 << ku, 1 << kv, B >> kv).sum(axis=2)
                for u in (p for p in pats if len(p) == ku):
                    row = j[u.code]
                    for v in (p for p in pats if len(p) == kv):
                        acc[(u, v)] += abs(int(row[v.code]) * N - marg[u] * marg[v])
    out = []
    for (u, v), total in acc.items():
        out.append(
            MixingDiagnostic(N, u, v, lag_cap, Fraction(total, N * N * lag_cap),
                             Fraction(marg[u], N), Fraction(marg[v], N))
        )
    return out


def genericity_defect(A: IntegerSet, factors: Sequence[tuple[int, bool]], N: int) -> Fraction:
    """``|E_{n<=N} prod_i f_i(w(n + k_i)) - prod_i mean(f_i)|``.

    ``factors`` lists ``(k_i, complemented)``; ``f_i`` is the word itself or
    ``1 - word``.  Means on the right are taken over the whole horizon.
    """
    if not factors:
        raise PreconditionError("need at least one factor")
    N = int(N)
    if N < 1:
        raise PreconditionError("N must be >= 1")
    ks = [int(k) for k, _ in factors]
    if min(ks) < 0:
        raise PreconditionError("shifts must be nonnegative")
    _need(A, N + max(ks), "N + max shift")
    w = A.mask
    prod = np.ones(N, dtype=bool)
    expected = Fraction(1)
    d = A.density()
    for k, comp in factors:
        seg = w[k:k + N]
        prod &= ~seg if comp else seg
        expected *= (1 - d) if comp else d
    return abs(Fraction(int(np.count_nonzero(prod)), N) - expected)


# --- van der Corput ---------------------------------------------------------------

_PHASE_BITS = 128


def _phases(q: IntPolynomial, alpha: FixedReal, count: int) -> np.ndarray:
    """``q(n) alpha mod 1`` for ``n = 1..count``, rounded to double."""
    a = alpha if alpha.frac_bits >= _PHASE_BITS else alpha.with_bits(_PHASE_BITS)
    b = a.frac_bits
    mask = (1 << b) - 1
    m = a.mantissa
    scale = 2.0 ** -53
    shift = b - 53
    out = np.empty(count, dtype=np.float64)
    exact = a.exact
    for n in range(1, count + 1):
        v = q(n)
        if exact is not None:
            f = (v * exact.numerator) % exact.denominator
            out[n - 1] = f / exact.denominator
        else:
            out[n - 1] = (((v * m) & mask) >> shift) * scale
    return out


@dataclass
class VdcReport:
    """``lhs_norm = |E_{n<=N} u_n|`` and the van der Corput chain.

    ``correlations[d] = |E_{n<=N} conj(u_n) u_{n+d}|`` for ``0 <= d < H``;
    ``cs_bound`` is the Cauchy-Schwarz step ``E_{h,h'} |E_n u_{n+h} conj(u_{n+h'})|``;
    ``vdc_bound = E_{h,h'<=H} correlations[|h-h'|]``; ``split_bound`` is
    ``K/H + max_{K<d<H} correlations[d]`` with ``K = isqrt(H)``.
    """

    N: int
    H: int
    K: int
    lhs_norm: float
    averaged_norm: float
    cs_bound: float
    vdc_bound: float
    split_bound: float
    correlations: list[float] = field(repr=False)

    def inequality_slack(self) -> float:
        return self.vdc_bound - self.lhs_norm**2


def vdc_average(q: IntPolynomial, alpha, N: int, H: int) -> VdcReport:
    if q.degree is None or q.degree < 1:
        raise PreconditionError("q must have degree >= 1")
    N, H = int(N), int(H)
    if N < 1 or H < 1:
        raise PreconditionError("N and H must be >= 1")
    alpha = parse_real(alpha, _PHASE_BITS)
    total = N + 2 * H
    phi = _phases(q, alpha, total)
    u = np.exp(2j * np.pi * phi)  # u[k] = u_{k+1}
    lhs = abs(u[:N].mean())
    avg = abs(np.mean([u[h:h + N].mean() for h in range(1, H + 1)]))
    corr = np.array([abs(np.vdot(u[:N], u[d:d + N])) / N for d in range(H)])
    idx = np.abs(np.subtract.outer(np.arange(H), np.arange(H)))
    vdc = float(corr[idx].mean())
    # Cauchy-Schwarz step: prefix sums of u_m conj(u_{m+d}) give each (h, h') sum
    cs = 0.0
    for d in range(H):
        w = u[: total - d] * np.conj(u[d:total])
        pref = np.concatenate([[0], np.cumsum(w)])
        hs = np.arange(1, H - d + 1)
        # sum_{n=1..N} u_{n+h} conj(u_{n+h+d}) = pref[h+N] - pref[h]
        vals = np.abs(pref[hs + N] - pref[hs]) / N
        cs += vals.sum() * (1 if d == 0 else 2)
    cs /= H * H
    K = isqrt(H)
    tail = corr[K + 1:] if K + 1 < H else np.zeros(1)
    split = K / H + float(tail.max())
    return VdcReport(N, H, K, float(lhs), float(avg), float(cs), vdc, split, corr.tolist())


# --- Weyl / Gamma ---------------------------------------------------------------------


@dataclass
class DiscrepancyReport:
    polynomial: str
    alpha: str
    delta: Fraction
    T: int
    count: int
    fraction: Fraction
    target: Fraction
    gap: Fraction

    def to_row(self) -> dict:
        return {
            "polynomial": self.polynomial, "alpha": self.alpha, "delta": self.delta,
            "T": self.T, "count": self.count, "fraction": self.fraction,
            "target": self.target, "gap": self.gap,
        }


def weyl_discrepancy(a: IntPolynomial, alpha, delta, T: int, frac_bits: int = 128) -> DiscrepancyReport:
    """Fraction of ``t <= T`` with ``dist(a(t) alpha mod 1, 0) < delta``
    against the arc length ``2 delta``."""
    if a.degree is None or a.degree < 1:
        raise PreconditionError("a must have degree >= 1")
    delta = parse_rational(delta)
    if not 0 < delta < Fraction(1, 2):
        raise PreconditionError("delta must lie in (0, 1/2)")
    T = int(T)
    if T < 1:
        raise PreconditionError("T must be >= 1")
    if frac_bits < 80:
        raise PreconditionError("phases need at least 80 fractional bits")
    alpha = parse_real(alpha, frac_bits)
    vals = [a(t) for t in range(1, T + 1)]
    hits = circle_within(np.array(vals, dtype=object), alpha, delta)
    count = int(np.count_nonzero(hits))
    frac = Fraction(count, T)
    target = 2 * delta
    return DiscrepancyReport(a.to_text("t"), alpha.label, delta, T, count, frac, target, abs(frac - target))


def cesaro_density_check(sequence, threshold) -> tuple[float, float]:
    """(Cesàro mean over the final half, density of indices with ``a_n > threshold``)."""
    a = np.asarray(sequence, dtype=np.float64)
    if a.size == 0:
        raise PreconditionError("sequence must be nonempty")
    thr = float(threshold)
    if not thr > 0:
        raise PreconditionError("threshold must be positive")
    if a.min() < 0 or a.max() > 1:
        raise PreconditionError("values must lie in [0, 1]")
    tail = a[a.size // 2:]
    return float(tail.mean()), float(np.count_nonzero(a > thr) / a.size)
