"""PET induction: characteristic vectors, the reduction p -> p~_h, exceptional
shifts, reduction trees and grid checks of the reduction facts.

Index bookkeeping.  Every entry of a reduced family is labelled ``(i, s)``
with ``s`` in {0, 1}; the entry equals ``p_i(x + s*h) - p_r(x)`` where
``p_r`` is the last member after a stable sort by nonincreasing degree.

* plain construction: ``(i, 0)`` for ``i < r`` then ``(i, 1)`` for ``i <= r``.
* linear variant (mixed degrees, at least one linear member): ``(i, 0)`` and
  ``(i, 1)`` for every nonlinear ``i``, then ``(i, 0)`` for every linear
  ``i != r``.  The two entries built from ``p_r`` itself (``0`` and
  ``a_r * h``) are constants absorbed into the functions and are dropped.

Labels are 0-based in code and 1-based in every JSON document.
"""

from __future__ import annotations

import enum
import functools
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DepthExceededError,
    ExceptionalOnlyError,
    FactViolationError,
    PreconditionError,
)
from .polynomials import (
    BivariatePolynomial,
    IntPolynomial,
    is_admissible_sequence,
    is_uniformly_admissible,
)

__all__ = [
    "CharacteristicVector",
    "Ordering",
    "characteristic_vector",
    "compare_revlex",
    "sort_family",
    "choose_construction",
    "reduction_labels",
    "pet_reduce",
    "pet_reduce_linear_variant",
    "reduce_family",
    "degenerate_pairs",
    "ExceptionalSet",
    "degenerate_h_scan",
    "exceptional_h_set",
    "leading_cancellation_set",
    "ReductionNode",
    "ReductionTree",
    "build_reduction_tree",
    "FactItem",
    "FactReport",
    "verify_reduction_facts",
    "enumerate_shapes",
    "enumerate_families",
]

PLAIN = "plain"
LINEAR = "linear-variant"
BASE = "base"


# --- characteristic vectors ----------------------------------------------------


class Ordering(str, enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


@dataclass(frozen=True)
class CharacteristicVector:
    """Sparse map ``degree -> count`` with zero counts omitted."""

    counts: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = tuple(sorted((int(k), int(v)) for k, v in dict(self.counts).items() if v))
        for k, v in items:
            if k < 1 or v < 0:
                raise PreconditionError(f"bad characteristic vector entry {k}: {v}")
        object.__setattr__(self, "counts", items)

    @classmethod
    def from_dense(cls, values: Sequence[int]) -> "CharacteristicVector":
        """``(chi_1, chi_2, ...)`` as written in the literature."""
        return cls(tuple((k, v) for k, v in enumerate(values, 1)))

    def __getitem__(self, k: int) -> int:
        return dict(self.counts).get(k, 0)

    def dense(self) -> tuple[int, ...]:
        top = self.counts[-1][0] if self.counts else 0
        d = dict(self.counts)
        return tuple(d.get(k, 0) for k in range(1, top + 1))

    def __lt__(self, other):
        return compare_revlex(self, other) is Ordering.LESS

    def __le__(self, other):
        return compare_revlex(self, other) is not Ordering.GREATER

    def __gt__(self, other):
        return compare_revlex(self, other) is Ordering.GREATER

    def __ge__(self, other):
        return compare_revlex(self, other) is not Ordering.LESS

    def to_json(self) -> dict[str, int]:
        return {str(k): v for k, v in self.counts}

    def __str__(self):
        return "(" + ",".join(map(str, self.dense())) + ")"


def characteristic_vector(ps: Iterable[IntPolynomial]) -> CharacteristicVector:
    """Number of distinct leading coefficients per positive degree."""
    seen: dict[int, set[int]] = defaultdict(set)
    for p in ps:
        d = p.degree
        if d is not None and d >= 1:
            seen[d].add(p.leading_coefficient)
    return CharacteristicVector(tuple((k, len(v)) for k, v in seen.items()))


def compare_revlex(a: CharacteristicVector, b: CharacteristicVector) -> Ordering:
    da, db = dict(a.counts), dict(b.counts)
    for k in sorted(set(da) | set(db), reverse=True):
        x, y = da.get(k, 0), db.get(k, 0)
        if x != y:
            return Ordering.GREATER if x > y else Ordering.LESS
    return Ordering.EQUAL


# --- reduction -------------------------------------------------------------------


def _deg(p: IntPolynomial) -> int:
    d = p.degree
    return -1 if d is None else d


def sort_family(ps: Sequence[IntPolynomial]) -> list[IntPolynomial]:
    """Stable sort by nonincreasing degree (ties keep caller order)."""
    return sorted(ps, key=lambda p: -_deg(p))


def _require_sorted(ps: Sequence[IntPolynomial]):
    if not ps:
        raise PreconditionError("family must be nonempty")
    for k, (a, b) in enumerate(zip(ps, ps[1:]), 1):
        if _deg(a) < _deg(b):
            raise PreconditionError(
                f"family not sorted by nonincreasing degree at positions {k},{k + 1}"
            )


def choose_construction(ps: Sequence[IntPolynomial]) -> str:
    """``plain`` without linear members, ``linear-variant`` for mixed degrees,
    ``base`` when every member is linear (the linear case needs no reduction)."""
    degs = [_deg(p) for p in ps]
    if all(d <= 1 for d in degs):
        return BASE
    if any(d == 1 for d in degs):
        return LINEAR
    return PLAIN


def reduction_labels(ps: Sequence[IntPolynomial], construction: str) -> list[tuple[int, int]]:
    r = len(ps)
    if construction in (PLAIN, BASE):
        return [(i, 0) for i in range(r - 1)] + [(i, 1) for i in range(r)]
    if construction == LINEAR:
        nl = [i for i in range(r) if _deg(ps[i]) >= 2]
        li = [i for i in range(r - 1) if _deg(ps[i]) == 1]
        return [(i, 0) for i in nl] + [(i, 1) for i in nl] + [(i, 0) for i in li]
    raise PreconditionError(f"unknown construction {construction!r}")


@functools.lru_cache(maxsize=1 << 16)
def _shift_cached(p: IntPolynomial, h: int) -> IntPolynomial:
    return p.shift(h)


def _build(ps, labels, h) -> list[IntPolynomial]:
    pr = ps[-1]
    out = []
    for i, s in labels:
        q = _shift_cached(ps[i], h) if s else ps[i]
        out.append(q - pr)
    return out


def pet_reduce(ps: Sequence[IntPolynomial], h: int) -> list[IntPolynomial]:
    """``[p_i - p_r for i < r] ++ [p_i(x+h) - p_r for i <= r]``."""
    _require_sorted(ps)
    return _build(ps, reduction_labels(ps, PLAIN), h)


def pet_reduce_linear_variant(ps: Sequence[IntPolynomial], h: int) -> list[IntPolynomial]:
    """Reduction used when linear and nonlinear members coexist."""
    _require_sorted(ps)
    degs = [_deg(p) for p in ps]
    if not any(d == 1 for d in degs):
        raise PreconditionError("linear variant needs at least one linear member")
    if all(d <= 1 for d in degs):
        raise PreconditionError("family is entirely linear; the linear base case applies")
    if any(d < 1 for d in degs):
        raise PreconditionError("family contains a constant member")
    return _build(ps, reduction_labels(ps, LINEAR), h)


def reduce_family(ps: Sequence[IntPolynomial], h: int, construction: str | None = None):
    construction = construction or choose_construction(ps)
    if construction == LINEAR:
        return pet_reduce_linear_variant(ps, h)
    return pet_reduce(ps, h)


# --- enumeration -----------------------------------------------------------------


def enumerate_shapes(max_degree: int = 3, coeff_range: tuple[int, int] = (-2, 2)) -> list[IntPolynomial]:
    """Nonconstant polynomials with zero constant term, positive leading
    coefficient and coefficients in ``coeff_range``.

    Constant terms change neither degeneracy nor characteristic vectors, so
    families up to constant terms are represented by these shapes.
    """
    lo, hi = coeff_range
    out = []
    for d in range(1, max_degree + 1):
        for lc in range(max(1, lo), hi + 1):
            for mid in itertools.product(range(lo, hi + 1), repeat=d - 1):
                out.append(IntPolynomial((0,) + mid + (lc,)))
    return out


def enumerate_families(max_r: int = 3, max_degree: int = 3, coeff_range: tuple[int, int] = (-2, 2)):
    """Admissible families of distinct shapes, each sorted for reduction."""
    shapes = enumerate_shapes(max_degree, coeff_range)
    for r in range(1, max_r + 1):
        for combo in itertools.combinations(shapes, r):
            yield sort_family(combo)


# --- exceptional shifts -----------------------------------------------------------


def _is_constant(p: IntPolynomial) -> bool:
    return len(p.coeffs) <= 1


def degenerate_pairs(
    ps: Sequence[IntPolynomial], h: int, construction: str | None = None
) -> list[tuple]:
    """Brute-force degeneracy check of the reduced family at one ``h``.

    Returns offending items: ``("entry", label)`` for a constant entry and
    ``("pair", label, label)`` for a constant difference.  Pairs ``(i,0),(i,1)``
    with ``deg p_i = 1`` are exempt.  Quadratic in the family size.
    """
    _require_sorted(ps)
    construction = construction or choose_construction(ps)
    labels = reduction_labels(ps, construction)
    entries = _build(ps, labels, h)
    out = []
    for lab, e in zip(labels, entries):
        if _is_constant(e):
            out.append(("entry", lab))
    for (la, ea), (lb, eb) in itertools.combinations(zip(labels, entries), 2):
        if la[0] == lb[0] and _deg(ps[la[0]]) == 1:
            continue
        if _is_constant(ea - eb):
            out.append(("pair", la, lb))
    return out


def _shift_table(p: IntPolynomial, hs: np.ndarray, width: int) -> np.ndarray:
    """Row ``k`` holds the coefficients of ``p(x + hs[k])``, padded to ``width``."""
    c = p.coeffs
    out = np.zeros((len(hs), width), dtype=hs.dtype)
    for j, cj in enumerate(c):
        if not cj:
            continue
        hp = np.ones_like(hs)
        for k in range(j, -1, -1):
            out[:, k] += cj * _binom(j, k) * hp
            hp = hp * hs
    return out


def degenerate_h_scan(
    ps: Sequence[IntPolynomial], hs: Sequence[int], construction: str | None = None
) -> frozenset:
    """The ``h`` in ``hs`` at which the reduced family degenerates, by direct
    evaluation of every entry's coefficients for all ``h`` at once.

    Same criterion as :func:`degenerate_pairs` (constant entry, or constant
    difference outside the linear same-index exemption), computed without
    the symbolic machinery of :func:`exceptional_h_set`.
    """
    ps = list(ps)
    _require_sorted(ps)
    construction = construction or choose_construction(ps)
    labels = reduction_labels(ps, construction)
    width = max(len(p.coeffs) for p in ps)
    bound = max(abs(c) for p in ps for c in p.coeffs) * (2 ** width) * (max(abs(h) for h in hs) + 1) ** width
    dtype = np.int64 if bound < (1 << 60) else object
    H = np.asarray(list(hs), dtype=dtype)
    pr = np.zeros(width, dtype=dtype)
    pr[: len(ps[-1].coeffs)] = ps[-1].coeffs
    tables = {}
    rows = []
    for i, s in labels:
        if s:
            if i not in tables:
                tables[i] = _shift_table(ps[i], H, width)
            rows.append(tables[i] - pr)
        else:
            row = np.zeros(width, dtype=dtype)
            row[: len(ps[i].coeffs)] = ps[i].coeffs
            rows.append(np.broadcast_to(row - pr, (len(H), width)))
    E = np.stack(rows, axis=1)  # (h, entry, coefficient)
    bad = ~(E[:, :, 1:] != 0).any(axis=2).T.astype(bool)
    bad = bad.any(axis=0) if bad.size else np.zeros(len(H), dtype=bool)
    for a, b in itertools.combinations(range(len(labels)), 2):
        if labels[a][0] == labels[b][0] and _deg(ps[labels[a][0]]) == 1:
            continue
        d = E[:, a, 1:] - E[:, b, 1:]
        bad |= ~(d != 0).any(axis=1).astype(bool)
    return frozenset(int(h) for h, flag in zip(hs, bad) if flag)


@dataclass(frozen=True)
class ExceptionalSet:
    """Integers ``h`` at which a reduction degenerates.

    ``universal`` means every ``h`` degenerates (the construction does not
    apply to the family); otherwise ``values`` is the finite set.
    """

    values: frozenset = frozenset()
    universal: bool = False
    reason: str | None = None

    def __contains__(self, h) -> bool:
        return self.universal or h in self.values

    def within(self, lo: int, hi: int) -> frozenset:
        if self.universal:
            return frozenset(range(lo, hi + 1))
        return frozenset(h for h in self.values if lo <= h <= hi)

    def to_json(self):
        if self.universal:
            return {"universal": True, "reason": self.reason}
        return sorted(self.values)


def _shift_frac(coeffs: Sequence[int], t: Fraction) -> tuple:
    d = len(coeffs)
    out = [Fraction(0)] * d
    for i, c in enumerate(coeffs):
        if not c:
            continue
        tp = Fraction(1)
        for k in range(i, -1, -1):
            out[k] += c * _binom(i, k) * tp
            tp *= t
    return tuple(out)


_BINOM = {}


def _binom(n, k):
    v = _BINOM.get((n, k))
    if v is None:
        from math import comb

        v = _BINOM[(n, k)] = comb(n, k)
    return v


@functools.lru_cache(maxsize=1 << 16)
def _canonical_key(p: IntPolynomial):
    """Shift-invariant key: two members of degree d >= 2 with this key are
    translates of each other up to an additive constant."""
    c = p.coeffs
    d = len(c) - 1
    a, b = c[d], c[d - 1]
    t = Fraction(b, a * d)
    shifted = _shift_frac(c, -t)
    return (d, a, shifted[1:d - 1])


_INT64_SAFE = 1 << 61


def _integer_offset_differences(bs: list[int], den: int) -> set[int]:
    """All integers ``(b_j - b_i) / den`` over pairs from ``bs``."""
    by_res: dict[int, list[int]] = defaultdict(list)
    for b in bs:
        by_res[b % den].append(b)
    out: set[int] = set()
    for group in by_res.values():
        if len(group) == 1:
            out.add(0)
            continue
        if max(abs(b) for b in group) < _INT64_SAFE // 2 and len(group) > 16:
            arr = np.asarray(sorted(set(group)), dtype=np.int64)
            diffs = np.unique(np.subtract.outer(arr, arr)) // den
            out.update(int(v) for v in diffs)
        else:
            u = sorted(set(group))
            out.update((y - x) // den for x in u for y in u)
    return out


def exceptional_h_set(
    ps: Sequence[IntPolynomial], construction: str | None = None
) -> ExceptionalSet:
    """Exact set of integers ``h`` for which the reduced family has a constant
    entry or a constant pairwise difference, computed symbolically in ``h``.

    An entry is a difference against the reference ``(r, 0)``.  A difference
    ``p_i(x + s h) - p_j(x + s' h)`` with ``s == s'`` does not depend on
    ``h``; with ``s != s'`` and equal leading term of degree ``d >= 2`` it is
    constant exactly when ``p_j`` is the translate of ``p_i`` by ``h`` up to a
    constant, which ``_canonical_key`` detects.  ``h = 0`` is always included.
    """
    ps = list(ps)
    _require_sorted(ps)
    construction = construction or choose_construction(ps)
    for k, p in enumerate(ps, 1):
        if _is_constant(p):
            raise PreconditionError(f"member {k} is constant")
    labels = reduction_labels(ps, construction)
    r = len(ps) - 1
    items = labels + [(r, 0)]

    # classes of members sharing degree and leading coefficient
    classes: dict[tuple[int, int], dict[int, set[int]]] = defaultdict(lambda: defaultdict(set))
    for k, (i, s) in enumerate(items):
        p = ps[i]
        classes[(_deg(p), p.leading_coefficient)][i].add(s)

    values = {0}
    for (d, a), members in classes.items():
        idx = list(members)
        if d == 1:
            # translates of a linear polynomial differ by constants
            if len(idx) > 1:
                return ExceptionalSet(universal=True, reason="two linear labels share a leading coefficient")
            (i,) = idx
            if i == r and construction != LINEAR and len(members[i]) > 1:
                return ExceptionalSet(universal=True, reason="entry p_r(x+h) - p_r(x) is constant")
            continue
        groups: dict[tuple, list[int]] = defaultdict(list)
        for i in idx:
            groups[_canonical_key(ps[i])].append(i)
        den = a * d
        for g in groups.values():
            if len(g) < 2 and len(members[g[0]]) < 2:
                continue
            zeros = [i for i in g if 0 in members[i]]
            ones = [i for i in g if 1 in members[i]]
            bvals = defaultdict(list)
            for i in g:
                bvals[ps[i].coeffs[d - 1]].append(i)
            if any(len(v) > 1 for v in bvals.values()):
                # equal offsets: p_i - p_j constant for i != j
                return ExceptionalSet(universal=True, reason="two members differ by a constant")
            if not zeros or not ones:
                continue
            b0 = [ps[i].coeffs[d - 1] for i in zeros]
            b1 = [ps[i].coeffs[d - 1] for i in ones]
            if zeros == ones or set(b0) == set(b1):
                values |= _integer_offset_differences(b0, den)
            else:
                values |= _cross_offsets(b1, b0, den)
    return ExceptionalSet(frozenset(values))


def _cross_offsets(b1: list[int], b0: list[int], den: int) -> set[int]:
    # (i,1) vs (j,0): constant iff h = (b_j - b_i) / den
    zero_by_res: dict[int, list[int]] = defaultdict(list)
    for b in b0:
        zero_by_res[b % den].append(b)
    out = set()
    for bi in b1:
        for bj in zero_by_res.get(bi % den, ()):
            out.add((bj - bi) // den)
    return out


def leading_cancellation_set(
    ps: Sequence[IntPolynomial], construction: str | None = None
) -> tuple[frozenset, CharacteristicVector | None]:
    """Non-degenerate ``h`` where the characteristic vector of the reduced
    family differs from its generic value, plus that generic value.

    Such ``h`` exist when a leading coefficient of an entry, linear in ``h``,
    vanishes or collides with another one.
    """
    ps = list(ps)
    construction = construction or choose_construction(ps)
    exc = exceptional_h_set(ps, construction)
    if exc.universal:
        return frozenset(), None
    candidates: set[int] = set()
    if construction == PLAIN:
        pr = ps[-1]
        d, a = _deg(pr), pr.leading_coefficient
        bs = [p.coeffs[d - 1] for p in ps if _deg(p) == d and p.leading_coefficient == a]
        candidates = _integer_offset_differences(bs, a * d) if d >= 1 else set()
    h0 = 1
    while h0 in exc or h0 in candidates:
        h0 += 1
    generic = characteristic_vector(_build(ps, reduction_labels(ps, construction), h0))
    bad = set()
    for h in candidates:
        if h in exc:
            continue
        if characteristic_vector(_build(ps, reduction_labels(ps, construction), h)) != generic:
            bad.add(h)
    return frozenset(bad), generic


# --- trees ----------------------------------------------------------------------


@dataclass
class ReductionNode:
    family: list[IntPolynomial]
    chi: CharacteristicVector
    depth: int
    construction: str
    h_sample: list[int] = field(default_factory=list)
    exceptional: ExceptionalSet | None = None
    children: dict[int, "ReductionNode"] = field(default_factory=dict)
    terminal: str | None = None
    widened: bool = False

    def to_json(self) -> dict:
        out = {
            "family": [p.to_text() for p in self.family],
            "chi": self.chi.to_json(),
            "depth": self.depth,
            "construction": self.construction,
        }
        if self.terminal:
            out["terminal"] = self.terminal
        else:
            out["reference"] = len(self.family)
            out["h_sample"] = list(self.h_sample)
            if self.widened:
                out["widened"] = True
            out["exceptional"] = self.exceptional.to_json() if self.exceptional else []
            out["children"] = {str(h): c.to_json() for h, c in self.children.items()}
        return out

    def walk(self):
        yield self
        for c in self.children.values():
            yield from c.walk()

    def edges(self):
        for c in self.children.values():
            yield self, c
            yield from c.edges()


@dataclass
class ReductionTree:
    root: ReductionNode
    max_depth: int

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.root.walk())

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())

    def validate(self) -> list[str]:
        """Problems found; empty when every edge is strictly chi-decreasing
        and every leaf is a base case."""
        problems = []
        for parent, child in self.root.edges():
            if compare_revlex(child.chi, parent.chi) is not Ordering.LESS:
                problems.append(f"chi {child.chi} not below {parent.chi} at depth {child.depth}")
        for n in self.root.walk():
            if not n.children and n.terminal != "linear":
                problems.append(f"{n.terminal or 'non-terminal'} leaf at depth {n.depth}")
        return problems

    def to_json(self) -> dict:
        return {"max_depth": self.max_depth, "depth": self.depth, "root": self.root.to_json()}


def _internal_check(ps):
    for k, p in enumerate(ps, 1):
        if _is_constant(p):
            raise PreconditionError(f"member {k} is constant")


def build_reduction_tree(
    ps: Sequence[IntPolynomial],
    h_sample: Sequence[int],
    max_depth: int = 12,
    max_branch: int | None = None,
    widen: bool = False,
    truncate: bool = False,
) -> ReductionTree:
    """Reduce recursively at every non-exceptional ``h`` of ``h_sample``
    (or at the first ``max_branch`` of them) until every member is linear.

    Depth counts levels, the root being level 1.  Exceptional sets grow along
    a branch (translates accumulate), so a fixed sample can run out.  By
    default that raises :class:`ExceptionalOnlyError`; with ``widen`` the
    node instead uses the smallest positive integer outside its exceptional
    set, beyond the sample, and records that it did so.  ``truncate`` turns
    the depth limit into a ``truncated`` leaf instead of an error, for
    inspecting traces that are too deep to finish.
    """
    ps = list(ps)
    if not ps:
        raise PreconditionError("family must be nonempty")
    verdict = is_admissible_sequence(ps)
    if not verdict.holds:
        raise PreconditionError(f"family is not admissible: {verdict.witness}")
    if not h_sample:
        raise PreconditionError("h_sample must be nonempty")
    hs = list(dict.fromkeys(int(h) for h in h_sample))

    def grow(fam, depth):
        fam = sort_family(fam)
        chi = characteristic_vector(fam)
        construction = choose_construction(fam)
        if construction == BASE:
            return ReductionNode(fam, chi, depth, BASE, terminal="linear")
        if depth >= max_depth:
            if truncate:
                return ReductionNode(fam, chi, depth, construction, terminal="truncated")
            raise DepthExceededError(
                f"reduction needs more than {max_depth} levels (chi {chi} at level {depth}, "
                f"{len(fam)} members)"
            )
        exc = exceptional_h_set(fam, construction)
        good = [h for h in hs if h not in exc]
        widened = False
        if not good:
            if not widen or exc.universal:
                raise ExceptionalOnlyError(
                    f"every sampled h is exceptional at level {depth}: {exc.to_json()}"
                )
            h = max(abs(v) for v in hs) + 1
            while h in exc:
                h += 1
            good, widened = [h], True
        if max_branch is not None:
            good = good[:max_branch]
        node = ReductionNode(fam, chi, depth, construction, hs, exc, widened=widened)
        for h in good:
            child = reduce_family(fam, h, construction)
            node.children[h] = grow(child, depth + 1)
        return node

    return ReductionTree(grow(ps, 1), max_depth)


# --- fact checks ------------------------------------------------------------------


@dataclass
class FactItem:
    item: str
    description: str
    applicable: bool = True
    points: int = 0
    failures: list = field(default_factory=list)
    hard_failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "item": self.item,
            "description": self.description,
            "applicable": self.applicable,
            "points_checked": self.points,
            "passed": self.passed,
            "failures": self.failures[:50],
            "hard_failures": self.hard_failures[:50],
        }


@dataclass
class FactReport:
    family: list[str]
    construction: str
    labels: list[tuple[int, int]]
    h_range: tuple[int, int]
    t_range: tuple[int, int] | None
    chi: CharacteristicVector
    generic_chi: CharacteristicVector | None
    exceptional: list[int]
    leading_cancellation: list[int]
    items: list[FactItem]

    @property
    def ok(self) -> bool:
        return not any(it.hard_failures for it in self.items)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "construction": self.construction,
            "labels": [[i + 1, s] for i, s in self.labels],
            "h_range": list(self.h_range),
            "t_range": list(self.t_range) if self.t_range else None,
            "chi": self.chi.to_json(),
            "generic_chi": self.generic_chi.to_json() if self.generic_chi else None,
            "exceptional": self.exceptional,
            "leading_cancellation": self.leading_cancellation,
            "ok": self.ok,
            "items": [it.to_json() for it in self.items],
        }


def _leading(p: IntPolynomial):
    return (p.degree, p.leading_coefficient)


def _degenerate_flag(entries, labels, ps, with_exemption=True, with_entries=True):
    if with_entries and any(_is_constant(e) for e in entries):
        return True
    for (la, ea), (lb, eb) in itertools.combinations(zip(labels, entries), 2):
        if with_exemption and la[0] == lb[0] and _deg(ps[la[0]]) == 1:
            continue
        if _is_constant(ea - eb):
            return True
    return False


def verify_reduction_facts(
    ps,
    h_range: tuple[int, int],
    t_range: tuple[int, int] | None = None,
    strict: bool = True,
) -> FactReport:
    """Grid check of the reduction facts.

    Univariate input (IntPolynomial, or N-free BivariatePolynomial) runs the
    three items about ``p~_h``; a family involving ``N`` runs the five items
    for uniformly admissible families on the ``(h, t)`` grid, ``t`` being the
    value substituted for ``N``.  A failure at an ``h`` outside the symbolic
    exceptional set is a hard failure and raises :class:`FactViolationError`
    when ``strict``.
    """
    ps = list(ps)
    if not ps:
        raise PreconditionError("family must be nonempty")
    lo, hi = int(h_range[0]), int(h_range[1])
    if lo > hi:
        raise PreconditionError("empty h_range")
    bivariate = any(isinstance(p, BivariatePolynomial) and p.depends_on_n() for p in ps)
    if bivariate:
        report = _verify_uniform(ps, lo, hi, t_range)
    else:
        fam = [p.as_univariate() if isinstance(p, BivariatePolynomial) else p for p in ps]
        report = _verify_plain(fam, lo, hi)
    if strict and not report.ok:
        bad = [it.item for it in report.items if it.hard_failures]
        raise FactViolationError(f"violations outside the exceptional set: {bad}", report)
    return report


def _verify_plain(ps, lo, hi) -> FactReport:
    verdict = is_admissible_sequence(ps)
    if not verdict.holds:
        raise PreconditionError(f"family is not admissible: {verdict.witness}")
    ps = sort_family(ps)
    construction = choose_construction(ps)
    if construction == BASE:
        raise PreconditionError("family is entirely linear; there is nothing to reduce")
    chi = characteristic_vector(ps)
    labels = reduction_labels(ps, construction)
    exc = exceptional_h_set(ps, construction)
    lcs, generic = leading_cancellation_set(ps, construction)
    hs = range(lo, hi + 1)
    i1 = FactItem("reduced-nonconstant", "reduced family has nonconstant entries and differences off the exceptional set")
    i1.description += f" ({construction})"
    i2 = FactItem("reduced-chi-stable", "characteristic vector of the reduced family is the same for all h off the exceptional sets")
    i3 = FactItem("chi-decreases", "characteristic vector of the reduced family is below that of the family")
    iex = FactItem("exceptional-exact", "symbolic exceptional set equals the brute-force degenerate set")
    for h in hs:
        entries = _build(ps, labels, h)
        degenerate = _degenerate_flag(entries, labels, ps)
        iex.points += 1
        if degenerate != (h in exc):
            iex.failures.append({"h": h})
            iex.hard_failures.append({"h": h})
        if h in exc:
            continue
        c = characteristic_vector(entries)
        for it in (i1, i2, i3):
            it.points += 1
        if degenerate:
            i1.failures.append({"h": h})
            i1.hard_failures.append({"h": h})
        if h not in lcs and c != generic:
            i2.failures.append({"h": h, "chi": c.to_json()})
            i2.hard_failures.append({"h": h, "chi": c.to_json()})
        if compare_revlex(c, chi) is not Ordering.LESS:
            i3.failures.append({"h": h, "chi": c.to_json()})
            i3.hard_failures.append({"h": h, "chi": c.to_json()})
    return FactReport(
        [p.to_text() for p in ps], construction, labels, (lo, hi), None, chi, generic,
        sorted(exc.within(lo, hi)), sorted(lcs), [i1, i2, i3, iex],
    )


def _verify_uniform(fs, lo, hi, t_range) -> FactReport:
    if t_range is None:
        raise PreconditionError("a family involving N needs t_range")
    verdict = is_uniformly_admissible(fs)
    if not verdict.holds:
        raise PreconditionError(f"family is not uniformly admissible: {verdict.witness}")
    tlo, thi = int(t_range[0]), int(t_range[1])
    if tlo > thi:
        raise PreconditionError("empty t_range")
    # degrees are N-free, so one sort order serves every t
    order = sorted(range(len(fs)), key=lambda k: -fs[k].deg_x)
    fs = [fs[k] for k in order]
    ts = range(tlo, thi + 1)
    spec = {t: [f.specialize(t) for f in fs] for t in ts}
    first = spec[tlo]
    construction = choose_construction(first)
    if construction == BASE:
        raise PreconditionError("family is entirely linear; there is nothing to reduce")
    labels = reduction_labels(first, construction)
    chi0 = characteristic_vector(first)
    exc_t = {t: exceptional_h_set(spec[t], construction) for t in ts}
    lc_t = {t: leading_cancellation_set(spec[t], construction)[0] for t in ts}
    exc_union = set()
    for e in exc_t.values():
        exc_union |= e.within(lo, hi)
    lc_union = set().union(*lc_t.values()) if lc_t else set()

    it1 = FactItem("uniform-chi-t-free", "characteristic vector does not depend on t")
    it2 = FactItem("uniform-leading-t-free", "leading terms of reduced entries and differences do not depend on t")
    it3 = FactItem("uniform-chi-decreases", "characteristic vector of the reduced family is constant in (h, t) and below that of the family")
    it4 = FactItem("uniform-admissible-reduced", "reduced family is uniformly admissible when chi_1 <= 1")
    it5 = FactItem("uniform-differences-nonconstant", "differences of distinct labels are nonconstant when chi_1 >= 2, except same-index linear pairs")
    it4.applicable = chi0[1] <= 1
    it5.applicable = chi0[1] >= 2
    for t in ts:
        it1.points += 1
        c = characteristic_vector(spec[t])
        if c != chi0:
            it1.failures.append({"t": t, "chi": c.to_json()})
            it1.hard_failures.append({"t": t, "chi": c.to_json()})

    plain_labels = reduction_labels(first, PLAIN)
    generic = None
    for h in range(lo, hi + 1):
        if h in exc_union:
            continue
        lead_ref = None
        for t in ts:
            ps = spec[t]
            entries = _build(ps, labels, h)
            pairs = [_leading(a - b) for a, b in itertools.combinations(entries, 2)]
            lead = ([_leading(e) for e in entries], pairs)
            c = characteristic_vector(entries)
            off = h not in lc_union
            it2.points += 1
            if lead_ref is None:
                lead_ref = lead
            elif lead != lead_ref and off:
                it2.failures.append({"h": h, "t": t})
                it2.hard_failures.append({"h": h, "t": t})
            it3.points += 1
            if off:
                if generic is None:
                    generic = c
                elif c != generic:
                    it3.failures.append({"h": h, "t": t, "chi": c.to_json()})
                    it3.hard_failures.append({"h": h, "t": t, "chi": c.to_json()})
            if compare_revlex(c, chi0) is not Ordering.LESS:
                it3.failures.append({"h": h, "t": t, "chi": c.to_json()})
                it3.hard_failures.append({"h": h, "t": t, "chi": c.to_json()})
            if it4.applicable:
                it4.points += 1
                if _degenerate_flag(entries, labels, ps) or (lead != lead_ref and off):
                    it4.failures.append({"h": h, "t": t})
                    it4.hard_failures.append({"h": h, "t": t})
            if it5.applicable:
                it5.points += 1
                plain = _build(ps, plain_labels, h)
                if _degenerate_flag(plain, plain_labels, ps, with_entries=False):
                    it5.failures.append({"h": h, "t": t})
                    it5.hard_failures.append({"h": h, "t": t})
    return FactReport(
        [f.to_text() for f in fs], construction, labels, (lo, hi), (tlo, thi), chi0, generic,
        sorted(exc_union), sorted(lc_union), [it1, it2, it3, it4, it5],
    )
