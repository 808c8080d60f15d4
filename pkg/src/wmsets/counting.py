"""Counting solutions of polynomial patterns in a set, and the
representability census for ``N = n1 + n2``.

For fixed ``N`` the values ``v_i(n) = p_i^{(N)}(n)`` are computed exactly; for
each ``n`` the admissible ``m`` form the AND of ``1_B[1..M]`` with the
shifted windows ``1_A[v_i(n) + 1 .. v_i(n) + M]``.  The windows are boolean
slices of the cached membership array, so one ``n`` costs ``r`` vector ANDs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, HorizonError, PreconditionError
from .integer_sets import IntegerSet, density_profile
from .polynomials import (
    AdmissibilityVerdict,
    BivariatePolynomial,
    IntPolynomial,
    is_admissible_family,
    is_uniformly_admissible,
)

__all__ = [
    "PatternSystem",
    "SolutionCount",
    "RepresentabilityRecord",
    "CensusResult",
    "count_solutions",
    "count_solutions_naive",
    "normalized_deviation",
    "asymptotic_check",
    "is_representable",
    "representability_census",
    "ASYMPTOTIC_COLUMNS",
    "CENSUS_COLUMNS",
    "write_asymptotic_csv",
    "write_census_csv",
    "format_real",
]

ASYMPTOTIC_COLUMNS = ["N", "M", "count", "normalized", "d_hat_A", "d_hat_B", "expected", "deviation"]
CENSUS_COLUMNS = ["N", "representable", "n1", "n2", "m"]


def format_real(x) -> str:
    return format(float(x), ".12g")


def _tail_checkpoints(h: int) -> list[int]:
    return sorted({max(1, h * k // 10) for k in range(6, 11)})


@dataclass
class PatternSystem:
    family: list[BivariatePolynomial]
    A: IntegerSet
    B: IntegerSet
    _verdicts: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        fam = []
        for f in self.family:
            if isinstance(f, IntPolynomial):
                f = f.to_bivariate()
            if not isinstance(f, BivariatePolynomial):
                raise PreconditionError(f"family members must be polynomials, got {f!r}")
            if f.deg_x is None or f.deg_x < 1:
                raise PreconditionError(f"{f.to_text()} has no positive x-degree")
            fam.append(f)
        if not fam:
            raise PreconditionError("family must be nonempty")
        self.family = fam

    @property
    def r(self) -> int:
        return len(self.family)

    def uniform_verdict(self) -> AdmissibilityVerdict:
        if "uniform" not in self._verdicts:
            self._verdicts["uniform"] = is_uniformly_admissible(self.family)
        return self._verdicts["uniform"]

    def admissible_verdict(self, test_horizon: int = 20) -> AdmissibilityVerdict:
        key = ("family", test_horizon)
        if key not in self._verdicts:
            self._verdicts[key] = is_admissible_family(self.family, test_horizon)
        return self._verdicts[key]

    def values(self, N: int) -> list[list[int]]:
        """``v_i(n)`` for ``n = 1..N``; exact Python ints."""
        out = []
        for f in self.family:
            p = f.specialize(N)
            out.append([p(n) for n in range(1, N + 1)])
        return out

    def check_horizons(self, N: int, M: int) -> list[list[int]]:
        if N < 1 or M < 1:
            raise PreconditionError("N and M must be >= 1")
        if M > self.B.horizon:
            raise HorizonError(f"M = {M} exceeds horizon(B) = {self.B.horizon}")
        vals = self.values(N)
        lo = min(min(v) for v in vals)
        hi = max(max(v) for v in vals)
        if lo < 0:
            raise HorizonError(f"min_n p_i(n) = {lo} < 0, so p_i(n) + 1 leaves the set's domain")
        if hi + M > self.A.horizon:
            raise HorizonError(
                f"max_n p_i(n) + M = {hi} + {M} = {hi + M} exceeds horizon(A) = {self.A.horizon}"
            )
        return vals


@dataclass(frozen=True)
class SolutionCount:
    N: int
    M: int
    count: int
    normalized: Fraction
    d_hat_A: Fraction
    d_hat_B: Fraction
    expected: Fraction
    deviation: Fraction
    oscillation_A: Fraction = Fraction(0)
    oscillation_B: Fraction = Fraction(0)

    def row(self) -> list[str]:
        return [
            str(self.N), str(self.M), str(self.count), format_real(self.normalized),
            format_real(self.d_hat_A), format_real(self.d_hat_B),
            format_real(self.expected), format_real(self.deviation),
        ]


def _raw_count(sys: PatternSystem, vals, N: int, M: int) -> int:
    a = sys.A.mask
    b = sys.B.mask[:M]
    total = 0
    acc = np.empty(M, dtype=bool)
    for k in range(N):
        np.copyto(acc, b)
        for v in vals:
            s = v[k]
            np.logical_and(acc, a[s:s + M], out=acc)
        total += int(np.count_nonzero(acc))
    return total


def count_solutions(sys: PatternSystem, N: int, M: int) -> SolutionCount:
    """Exact number of ``(n, m)`` in ``[1,N] x ([1,M] ∩ B)`` with every
    ``p_i^{(N)}(n) + m`` in ``A``."""
    N, M = int(N), int(M)
    vals = sys.check_horizons(N, M)
    count = _raw_count(sys, vals, N, M)
    pa = density_profile(sys.A, _tail_checkpoints(sys.A.horizon))
    pb = density_profile(sys.B, _tail_checkpoints(sys.B.horizon))
    normalized = Fraction(count, N * M)
    expected = pb.final * pa.final ** sys.r
    return SolutionCount(
        N, M, count, normalized, pa.final, pb.final, expected, abs(normalized - expected),
        pa.oscillation, pb.oscillation,
    )


def count_solutions_naive(sys: PatternSystem, N: int, M: int) -> int:
    """Double loop over ``(n, m)`` with membership queries; the oracle."""
    sys.check_horizons(N, M)
    polys = [f.specialize(N) for f in sys.family]
    total = 0
    for n in range(1, N + 1):
        vs = [p(n) for p in polys]
        for m in range(1, M + 1):
            if m in sys.B and all((v + m) in sys.A for v in vs):
                total += 1
    return total


def normalized_deviation(sys: PatternSystem, N: int, M: int) -> Fraction:
    """``|E_{m<=M} E_{n<=N} 1_B(m) (prod_i 1_A(m + p_i(n)) - d_A^r)|``."""
    N, M = int(N), int(M)
    vals = sys.check_horizons(N, M)
    count = _raw_count(sys, vals, N, M)
    d = sys.A.density()
    b = sys.B.count(M)
    return abs(Fraction(count, N * M) - d ** sys.r * Fraction(b, M))


def asymptotic_check(sys: PatternSystem, N_list: Iterable[int], M: int) -> list[SolutionCount]:
    return [count_solutions(sys, N, M) for N in N_list]


# --- representability ---------------------------------------------------------------


@dataclass(frozen=True)
class RepresentabilityRecord:
    """``witness = (n1, n2, m)`` or ``None``; a missing witness means
    "not found within bounds", never a proof of non-representability."""

    N: int
    representable: bool
    witness: tuple[int, int, int] | None
    M_cap: int
    A: IntegerSet = field(repr=False, compare=False, default=None)
    p: IntPolynomial = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.representable != (self.witness is not None):
            raise ConsistencyError("representable flag disagrees with witness")
        if self.witness is not None and self.A is not None:
            n1, n2, m = self.witness
            ok = (
                n1 >= 1 and n2 >= 1 and n1 + n2 == self.N and 1 <= m <= self.M_cap
                and m in self.A and (self.p(n1) + m) in self.A and (self.p(n2) + m) in self.A
            )
            if not ok:
                raise ConsistencyError(f"witness {self.witness} fails re-verification")

    @property
    def status(self) -> str:
        return "found" if self.representable else "not found within bounds"

    def row(self) -> list[str]:
        if self.witness is None:
            return [str(self.N), "false", "", "", ""]
        n1, n2, m = self.witness
        return [str(self.N), "true", str(n1), str(n2), str(m)]


def _check_rep_args(A: IntegerSet, N: int, p: IntPolynomial, M_cap: int):
    if p.degree is None or p.degree < 1 or p.leading_coefficient <= 0:
        raise PreconditionError("p needs positive degree and positive leading coefficient")
    if N < 2:
        raise PreconditionError("N must be >= 2")
    if M_cap < 1:
        raise PreconditionError("M_cap must be >= 1")
    vals = [p(n) for n in range(1, N)]
    lo, hi = min(vals), max(vals)
    if lo < 0:
        raise HorizonError(f"min p(n) = {lo} < 0 for n in [1, N-1]")
    if M_cap > A.horizon:
        raise HorizonError(f"M_cap = {M_cap} exceeds horizon(A) = {A.horizon}")
    if hi + M_cap > A.horizon:
        raise HorizonError(
            f"max p(n) + M_cap = {hi} + {M_cap} = {hi + M_cap} exceeds horizon(A) = {A.horizon}"
        )
    return vals


def is_representable(A: IntegerSet, N: int, p: IntPolynomial, M_cap: int) -> RepresentabilityRecord:
    """First ``(n1, m)`` in lexicographic order with ``m, p(n1)+m, p(n2)+m``
    all in ``A`` and ``n1 + n2 = N``."""
    N, M_cap = int(N), int(M_cap)
    vals = _check_rep_args(A, N, p, M_cap)
    a = A.mask
    for n1 in range(1, N):
        s1, s2 = vals[n1 - 1], vals[N - n1 - 1]
        start, chunk = 0, 256
        while start < M_cap:
            stop = min(M_cap, start + chunk)
            hit = a[start:stop] & a[s1 + start:s1 + stop] & a[s2 + start:s2 + stop]
            if hit.any():
                m = start + int(np.argmax(hit)) + 1
                return RepresentabilityRecord(N, True, (n1, N - n1, m), M_cap, A, p)
            start, chunk = stop, chunk * 4
    return RepresentabilityRecord(N, False, None, M_cap, A, p)


@dataclass
class CensusResult:
    fraction: Fraction
    exceptions: list[int]
    records: list[RepresentabilityRecord]

    def to_json(self) -> dict:
        return {"fraction": str(self.fraction), "exceptions": self.exceptions,
                "checked": len(self.records)}


def representability_census(A: IntegerSet, p: IntPolynomial, N_range: Sequence[int], M_cap: int) -> CensusResult:
    Ns = list(N_range)
    if not Ns:
        raise PreconditionError("N_range is empty")
    # check the binding horizon once, up front
    _check_rep_args(A, max(Ns), p, M_cap)
    recs = [is_representable(A, N, p, M_cap) for N in Ns]
    exc = [r.N for r in recs if not r.representable]
    return CensusResult(Fraction(len(Ns) - len(exc), len(Ns)), exc, recs)


# --- CSV ------------------------------------------------------------------------------


def write_asymptotic_csv(rows: Sequence[SolutionCount], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ASYMPTOTIC_COLUMNS)
    for r in rows:
        w.writerow(r.row())


def write_census_csv(records: Sequence[RepresentabilityRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CENSUS_COLUMNS)
    for r in records:
        w.writerow(r.row())
