"""Exact polynomials over the integers in ``x`` and in ``(x, N)``.

Coefficients are Python ints throughout, so nothing ever wraps around.
The zero polynomial has ``degree`` equal to ``None``; callers must handle
that case explicitly instead of comparing against a numeric sentinel.

Text syntax (used by the CLI and config files)::

    2*x^2 - 3*x + 1
    (N-x)^3
    x^2 + x + N^2

Operators ``+ - * ^`` and parentheses, integer literals, variables ``x`` and
``N``.  Exponents must be nonnegative integer literals.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

from .errors import ParseError, PreconditionError

__all__ = [
    "IntPolynomial",
    "BivariatePolynomial",
    "X",
    "evaluate",
    "specialize",
    "shift",
    "parse_polynomial",
    "parse_family",
    "parse_univariate",
    "format_family",
    "Verdict",
    "AdmissibilityVerdict",
    "is_admissible_sequence",
    "is_uniformly_admissible",
    "is_admissible_family",
    "nonnegativity_certificate",
]


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    end = len(coeffs)
    while end and coeffs[end - 1] == 0:
        end -= 1
    return tuple(coeffs[:end])


class IntPolynomial:
    """Univariate polynomial with integer coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()):
        object.__setattr__(self, "coeffs", _trim([int(c) for c in coeffs]))

    @classmethod
    def _canonical(cls, coeffs: tuple[int, ...]) -> "IntPolynomial":
        # caller guarantees no trailing zeros
        p = object.__new__(cls)
        object.__setattr__(p, "coeffs", coeffs)
        return p

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPolynomial":
        return cls([0] * k + [c])

    def __setattr__(self, name, value):
        raise AttributeError("IntPolynomial is immutable")

    def __reduce__(self):
        return (IntPolynomial, (self.coeffs,))

    @property
    def degree(self) -> int | None:
        return len(self.coeffs) - 1 if self.coeffs else None

    @property
    def leading_coefficient(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    lc = leading_coefficient

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        """True for the zero polynomial and for nonzero constants."""
        return len(self.coeffs) <= 1

    def __eq__(self, other):
        if isinstance(other, IntPolynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self.coeffs == _trim([other])
        return NotImplemented

    def __hash__(self):
        return hash(("IntPolynomial", self.coeffs))

    def __add__(self, other):
        if isinstance(other, int):
            other = IntPolynomial([other])
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPolynomial._canonical(_trim(out))

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial._canonical(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = IntPolynomial([other])
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) >= len(b):
            out = list(a)
            for i, c in enumerate(b):
                out[i] -= c
        else:
            out = [-c for c in b]
            for i, c in enumerate(a):
                out[i] += c
        while out and out[-1] == 0:
            out.pop()
        return IntPolynomial._canonical(tuple(out))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial([c * other for c in self.coeffs])
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPolynomial._canonical(())
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return IntPolynomial._canonical(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PreconditionError("negative exponent")
        out = IntPolynomial([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __call__(self, n: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def shift(self, h: int) -> "IntPolynomial":
        """Return ``p(x + h)`` (repeated synthetic division by ``x - h``)."""
        c = self.coeffs
        if h == 0 or len(c) <= 1:
            return self
        out = list(c)
        n = len(out)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                out[j] += h * out[j + 1]
        return IntPolynomial._canonical(tuple(out))

    def to_bivariate(self) -> "BivariatePolynomial":
        return BivariatePolynomial({(i, 0): c for i, c in enumerate(self.coeffs) if c})

    def to_text(self, var: str = "x") -> str:
        return _format_terms(
            [(c, ((var, i),)) for i, c in reversed(list(enumerate(self.coeffs))) if c]
        )

    __str__ = to_text

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)!r})"


X = IntPolynomial([0, 1])


def evaluate(p: IntPolynomial, n: int) -> int:
    """Exact value of ``p`` at ``n``."""
    return p(n)


def shift(p: IntPolynomial, h: int) -> IntPolynomial:
    return p.shift(h)


class BivariatePolynomial:
    """Element of Z[x, N] stored as a sparse map ``(i, j) -> c`` for ``c x^i N^j``."""

    __slots__ = ("_terms", "_key")

    def __init__(self, terms: dict[tuple[int, int], int] | Iterable = ()):
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict[tuple[int, int], int] = {}
        for (i, j), c in items:
            if i < 0 or j < 0:
                raise PreconditionError("negative exponent in term")
            acc[(i, j)] = acc.get((i, j), 0) + int(c)
        clean = {k: v for k, v in acc.items() if v}
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_key", tuple(sorted(clean.items())))

    def __setattr__(self, name, value):
        raise AttributeError("BivariatePolynomial is immutable")

    def __reduce__(self):
        return (BivariatePolynomial, (self._key,))

    @classmethod
    def x(cls) -> "BivariatePolynomial":
        return cls({(1, 0): 1})

    @classmethod
    def n(cls) -> "BivariatePolynomial":
        return cls({(0, 1): 1})

    @classmethod
    def constant(cls, c: int) -> "BivariatePolynomial":
        return cls({(0, 0): c})

    @property
    def terms(self) -> dict[tuple[int, int], int]:
        return dict(self._terms)

    def items(self):
        return self._key

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def deg_x(self) -> int | None:
        return max((i for i, _ in self._terms), default=None)

    @property
    def deg_n(self) -> int | None:
        return max((j for _, j in self._terms), default=None)

    def depends_on_n(self) -> bool:
        return any(j for _, j in self._terms)

    def x_coefficient(self, i: int) -> IntPolynomial:
        """Coefficient of ``x^i`` as a polynomial in ``N``."""
        deg = max((j for (a, j) in self._terms if a == i), default=-1)
        out = [0] * (deg + 1)
        for (a, j), c in self._terms.items():
            if a == i:
                out[j] = c
        return IntPolynomial(out)

    def leading_x_coefficient(self) -> IntPolynomial:
        d = self.deg_x
        return IntPolynomial() if d is None else self.x_coefficient(d)

    def specialize(self, n: int) -> IntPolynomial:
        d = self.deg_x
        if d is None:
            return IntPolynomial()
        out = [0] * (d + 1)
        for (i, j), c in self._terms.items():
            out[i] += c * n**j
        return IntPolynomial(out)

    def __call__(self, x: int, n: int) -> int:
        return sum(c * x**i * n**j for (i, j), c in self._terms.items())

    def __eq__(self, other):
        if isinstance(other, BivariatePolynomial):
            return self._key == other._key
        if isinstance(other, IntPolynomial):
            return self == other.to_bivariate()
        if isinstance(other, int):
            return self._key == BivariatePolynomial.constant(other)._key
        return NotImplemented

    def __hash__(self):
        return hash(("BivariatePolynomial", self._key))

    @staticmethod
    def _coerce(other):
        if isinstance(other, BivariatePolynomial):
            return other
        if isinstance(other, IntPolynomial):
            return other.to_bivariate()
        if isinstance(other, int):
            return BivariatePolynomial.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return BivariatePolynomial(itertools.chain(self._key, other._key))

    __radd__ = __add__

    def __neg__(self):
        return BivariatePolynomial({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return BivariatePolynomial(
            itertools.chain(self._key, ((k, -v) for k, v in other._key))
        )

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc: dict[tuple[int, int], int] = {}
        for (i, j), c in self._key:
            for (k, l), d in other._key:
                key = (i + k, j + l)
                acc[key] = acc.get(key, 0) + c * d
        return BivariatePolynomial(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PreconditionError("negative exponent")
        out = BivariatePolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def as_univariate(self) -> IntPolynomial:
        """The polynomial as an element of Z[x]; fails if it involves ``N``."""
        if self.depends_on_n():
            raise PreconditionError(f"{self.to_text()} depends on N")
        return self.specialize(0)

    def to_text(self) -> str:
        key = sorted(self._key, key=lambda t: (-t[0][0], -t[0][1]))
        return _format_terms([(c, (("x", i), ("N", j))) for (i, j), c in key])

    __str__ = to_text

    def __repr__(self):
        return f"BivariatePolynomial({self.to_text()!r})"


def _format_terms(terms) -> str:
    if not terms:
        return "0"
    parts = []
    for idx, (c, powers) in enumerate(terms):
        factors = []
        for var, e in powers:
            if e == 1:
                factors.append(var)
            elif e > 1:
                factors.append(f"{var}^{e}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if idx == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([xN])|(\*\*|[-+*^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
        num, var, op = m.groups()
        if num is not None:
            out.append(("int", int(num)))
        elif var is not None:
            out.append(("var", var))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} in {self.text!r}")

    def parse(self) -> BivariatePolynomial:
        if not self.toks:
            raise ParseError("empty polynomial")
        out = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input in {self.text!r}")
        return out

    def expr(self):
        acc = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.unary()
        return acc

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "int":
                raise ParseError(f"exponent must be a nonnegative integer in {self.text!r}")
            return base**val
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return BivariatePolynomial.constant(val)
        if kind == "var":
            return BivariatePolynomial.x() if val == "x" else BivariatePolynomial.n()
        if (kind, val) == ("op", "("):
            inner = self.expr()
            self.expect_op(")")
            return inner
        if val is None:
            raise ParseError(f"unexpected end of input in {self.text!r}")
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def parse_polynomial(text: str) -> BivariatePolynomial:
    """Parse the text syntax into an element of Z[x, N]."""
    return _Parser(text).parse()


def parse_univariate(text: str) -> IntPolynomial:
    f = parse_polynomial(text)
    if f.depends_on_n():
        raise ParseError(f"expected a polynomial in x only, got {text!r}")
    return f.as_univariate()


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced parentheses in {text!r}")
        if ch in ",;" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    if depth:
        raise ParseError(f"unbalanced parentheses in {text!r}")
    return [p.strip() for p in parts]


def parse_family(text: str | Sequence[str]) -> list[BivariatePolynomial]:
    """Parse a comma-separated family such as ``"(x^3),((N-x)^3)"``."""
    parts = _split_top_level(text) if isinstance(text, str) else list(text)
    if not parts or any(not p for p in parts):
        raise ParseError(f"empty member in family {text!r}")
    return [parse_polynomial(p) for p in parts]


def format_family(ps) -> list[str]:
    return [p.to_text() for p in ps]


# --- admissibility -------------------------------------------------------------


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    """Outcome of an admissibility predicate.

    ``witness`` is required for ``fails`` and names the violated clause with
    1-based indices, so re-evaluating the clause reproduces the failure.
    ``literal`` is only set by :func:`is_uniformly_admissible` and carries the
    verdict with the positive-leading-coefficient clause enforced.
    """

    verdict: Verdict
    witness: dict | None = None
    literal: "AdmissibilityVerdict | None" = None
    certificate: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.verdict is Verdict.FAILS and not self.witness:
            raise PreconditionError("a failing verdict needs a witness")

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_json(self) -> dict:
        out = {"verdict": self.verdict.value, "witness": self.witness}
        if self.literal is not None:
            out["literal"] = self.literal.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def _fails(**witness) -> AdmissibilityVerdict:
    return AdmissibilityVerdict(Verdict.FAILS, witness)


HOLDS = AdmissibilityVerdict(Verdict.HOLDS)


def is_admissible_sequence(ps: Sequence[IntPolynomial]) -> AdmissibilityVerdict:
    """Pairwise nonconstant differences and every member tending to +infinity."""
    if not ps:
        raise PreconditionError("family must be nonempty")
    for i, p in enumerate(ps, 1):
        if p.is_constant() or p.leading_coefficient < 0:
            return _fails(
                clause="tends-to-infinity",
                index=i,
                degree=p.degree,
                leading_coefficient=p.leading_coefficient,
            )
    for (i, p), (j, q) in itertools.combinations(enumerate(ps, 1), 2):
        d = p - q
        if d.is_constant():
            return _fails(clause="nonconstant-difference", pair=[i, j], difference=d.to_text())
    return HOLDS


def _leading_data(f: BivariatePolynomial):
    d = f.deg_x
    return d, (f.x_coefficient(d) if d is not None else IntPolynomial())


def is_uniformly_admissible(fs: Sequence[BivariatePolynomial]) -> AdmissibilityVerdict:
    """Degrees and leading x-coefficients of members and differences are N-free.

    The returned verdict treats the leading coefficient of a member as
    admissible when it is a nonzero N-free constant; ``.literal`` additionally
    requires it to be positive.
    """
    if not fs:
        raise PreconditionError("family must be nonempty")
    relaxed = None
    sign_failure = None
    for i, f in enumerate(fs, 1):
        d, lead = _leading_data(f)
        if d is None or d == 0:
            relaxed = relaxed or _fails(clause="member-degree", index=i, deg_x=d)
            break
        if not lead.is_constant():
            relaxed = relaxed or _fails(
                clause="member-leading-coefficient",
                index=i,
                coefficient=lead.to_text("N"),
            )
            break
        if lead.leading_coefficient < 0 and sign_failure is None:
            sign_failure = _fails(
                clause="member-leading-coefficient-positive",
                index=i,
                coefficient=lead.to_text("N"),
            )
    if relaxed is None:
        for (i, f), (j, g) in itertools.combinations(enumerate(fs, 1), 2):
            d, lead = _leading_data(f - g)
            if d is None or d == 0:
                relaxed = _fails(clause="difference-degree", pair=[i, j], deg_x=d)
                break
            if not lead.is_constant():
                relaxed = _fails(
                    clause="difference-leading-coefficient",
                    pair=[i, j],
                    coefficient=lead.to_text("N"),
                )
                break
    if relaxed is not None:
        return AdmissibilityVerdict(relaxed.verdict, relaxed.witness, literal=relaxed)
    literal = sign_failure or HOLDS
    return AdmissibilityVerdict(Verdict.HOLDS, None, literal=literal)


def _in_xy(f: BivariatePolynomial) -> dict[tuple[int, int], int]:
    """Rewrite ``f(x, N)`` as ``g(x, y)`` with ``y = N - x``."""
    g: dict[tuple[int, int], int] = {}
    for (i, j), c in f.items():
        for k in range(j + 1):
            key = (i + k, j - k)
            g[key] = g.get(key, 0) + c * comb(j, k)
    return {k: v for k, v in g.items() if v}


def nonnegativity_certificate(f: BivariatePolynomial, max_multiplier: int = 12) -> int | None:
    """Smallest ``k`` with ``N^k f`` having nonnegative coefficients in the
    basis ``x^a (N-x)^b``, or ``None`` if none up to ``max_multiplier``.

    Such a ``k`` proves ``f >= 0`` on the real triangle ``0 <= x <= N``.
    """
    g = _in_xy(f)
    for k in range(max_multiplier + 1):
        if all(c >= 0 for c in g.values()):
            return k
        nxt: dict[tuple[int, int], int] = {}
        for (a, b), c in g.items():
            nxt[(a + 1, b)] = nxt.get((a + 1, b), 0) + c
            nxt[(a, b + 1)] = nxt.get((a, b + 1), 0) + c
        g = nxt
    return None


def _first_negative(f: BivariatePolynomial, test_horizon: int):
    for n in range(1, test_horizon + 1):
        p = f.specialize(n)
        for x in range(n + 1):
            v = p(x)
            if v < 0:
                return x, n, v
    return None


def is_admissible_family(
    fs: Sequence[BivariatePolynomial], test_horizon: int
) -> AdmissibilityVerdict:
    """Admissibility of a polynomial family in Z[x, N].

    Positive x-degree and nonconstant x-differences are decided exactly.
    Nonnegativity on ``0 <= x <= N`` is certified by
    :func:`nonnegativity_certificate`, refuted by searching the integer grid
    ``N <= test_horizon``, and otherwise reported as ``undetermined``.
    """
    if not fs:
        raise PreconditionError("family must be nonempty")
    if test_horizon < 1:
        raise PreconditionError("test_horizon must be >= 1")
    for i, f in enumerate(fs, 1):
        d = f.deg_x
        if d is None or d == 0:
            return _fails(clause="positive-x-degree", index=i, deg_x=d)
    for (i, f), (j, g) in itertools.combinations(enumerate(fs, 1), 2):
        d = (f - g).deg_x
        if d is None or d == 0:
            return _fails(clause="nonconstant-x-difference", pair=[i, j], deg_x=d)
    certs = {}
    pending = []
    for i, f in enumerate(fs, 1):
        k = nonnegativity_certificate(f)
        if k is None:
            pending.append(i)
        else:
            certs[str(i)] = k
    for i in pending:
        hit = _first_negative(fs[i - 1], test_horizon)
        if hit is not None:
            x, n, v = hit
            return _fails(clause="nonnegative", index=i, x=x, N=n, value=v)
    if pending:
        return AdmissibilityVerdict(
            Verdict.UNDETERMINED,
            {"clause": "nonnegative", "uncertified": pending, "test_horizon": test_horizon},
            certificate={"multiplier": certs},
        )
    return AdmissibilityVerdict(Verdict.HOLDS, None, certificate={"multiplier": certs})


def specialize(f: BivariatePolynomial, n: int) -> IntPolynomial:
    return f.specialize(n)
