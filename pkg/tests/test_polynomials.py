import pytest
import sympy
from hypothesis import given, strategies as st

from wmsets.errors import ParseError, PreconditionError
from wmsets.polynomials import (
    BivariatePolynomial,
    IntPolynomial,
    Verdict,
    evaluate,
    is_admissible_family,
    is_admissible_sequence,
    is_uniformly_admissible,
    nonnegativity_certificate,
    parse_family,
    parse_polynomial,
    parse_univariate,
    shift,
    specialize,
)

X, NN = sympy.symbols("x N")

coeff_lists = st.lists(st.integers(-50, 50), max_size=7)
polys = coeff_lists.map(IntPolynomial)
biv_terms = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 3)), st.integers(-9, 9), max_size=8
)
bivs = biv_terms.map(BivariatePolynomial)


def to_sympy(p):
    if isinstance(p, IntPolynomial):
        return sum((c * X**i for i, c in enumerate(p.coeffs)), sympy.Integer(0))
    return sum((c * X**i * NN**j for (i, j), c in p.items()), sympy.Integer(0))


def from_sympy(expr) -> IntPolynomial:
    expr = sympy.expand(expr)
    if expr == 0:
        return IntPolynomial()
    coeffs = sympy.Poly(expr, X).all_coeffs()[::-1]
    return IntPolynomial([int(c) for c in coeffs])


# --- canonical form and basic values ------------------------------------------------


def test_zero_polynomial_has_sentinel_degree():
    z = IntPolynomial([0, 0, 0])
    assert z.coeffs == ()
    assert z.degree is None
    assert z.leading_coefficient == 0


def test_trailing_zeros_trimmed():
    p = IntPolynomial([1, 2, 0, 0])
    assert p.coeffs == (1, 2)
    assert p.degree == 1


@pytest.mark.parametrize(
    "text,n,value",
    [("x^3", 5, 125), ("0", 10**9, 0), ("2*x^2 - 3*x + 1", -4, 45)],
)
def test_eval_examples(text, n, value):
    assert evaluate(parse_univariate(text), n) == value


def test_eval_big_integers_exact():
    p = parse_univariate("x^5 + 1")
    assert p(10**30) == 10**150 + 1


def test_specialize_examples():
    f = parse_polynomial("(N-x)^3")
    assert specialize(f, 2) == parse_univariate("-x^3 + 6*x^2 - 12*x + 8")
    assert specialize(parse_polynomial("x^4"), 7) == parse_univariate("x^4")
    assert specialize(parse_polynomial("N*x - N"), 0).is_zero()


def test_shift_examples():
    assert shift(parse_univariate("x^2"), 1) == parse_univariate("x^2 + 2*x + 1")
    assert shift(parse_univariate("x^3"), 0) == parse_univariate("x^3")
    assert shift(parse_univariate("x^2 + x"), 3) == parse_univariate("x^2 + 7*x + 12")


# --- parser -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    ["x^2+", "2.5*x", "x^-1", "y + 1", "(x + 1", "x^^2", "", "3 4"],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_polynomial(text)


def test_parse_univariate_rejects_n():
    with pytest.raises(ParseError):
        parse_univariate("x + N")


def test_parse_family_splits_at_top_level():
    fam = parse_family("(x^3),((N-x)^3)")
    assert len(fam) == 2
    assert fam[1] == parse_polynomial("-x^3 + 3*x^2*N - 3*x*N^2 + N^3")
    assert len(parse_family("x^2 + N; x^2 + x + N^2")) == 2


def test_parse_requires_explicit_multiplication():
    with pytest.raises(ParseError):
        parse_polynomial("2x")


def test_parse_unary_minus_and_parentheses():
    assert parse_polynomial("-(x - 1)^2") == parse_polynomial("-x^2 + 2*x - 1")


@given(polys)
def test_text_round_trip_univariate(p):
    assert parse_univariate(p.to_text()) == p


@given(bivs)
def test_text_round_trip_bivariate(f):
    assert parse_polynomial(f.to_text()) == f


def test_bivariate_has_no_zero_terms():
    f = BivariatePolynomial({(1, 0): 2, (0, 1): 0})
    assert dict(f.items()) == {(1, 0): 2}
    assert (f - f).deg_x is None


# --- arithmetic against sympy ----------------------------------------------------


@given(polys, polys)
def test_arithmetic_matches_sympy(p, q):
    assert p + q == from_sympy(to_sympy(p) + to_sympy(q))
    assert p - q == from_sympy(to_sympy(p) - to_sympy(q))
    assert p * q == from_sympy(to_sympy(p) * to_sympy(q))


@given(polys, st.integers(-30, 30))
def test_shift_matches_sympy(p, h):
    assert p.shift(h) == from_sympy(to_sympy(p).subs(X, X + h))


@given(polys, st.integers(-10**6, 10**6))
def test_eval_matches_sympy(p, n):
    assert p(n) == int(to_sympy(p).subs(X, n))


@given(bivs, st.integers(-20, 20))
def test_specialize_matches_sympy(f, n):
    assert f.specialize(n) == from_sympy(to_sympy(f).subs(NN, n))


@given(polys, st.integers(0, 5))
def test_power_matches_repeated_product(p, k):
    acc = IntPolynomial([1])
    for _ in range(k):
        acc = acc * p
    assert p**k == acc


# --- algebraic invariants ---------------------------------------------------------


@given(polys, polys)
def test_outputs_are_canonical(p, q):
    for r in (p + q, p - q, p * q, p.shift(3), -p):
        assert IntPolynomial(r.coeffs) == r
        assert not r.coeffs or r.coeffs[-1] != 0


@given(polys, st.integers(-100, 100))
def test_shift_inverse(p, h):
    assert shift(shift(p, h), -h) == p


@given(polys, polys)
def test_degree_and_lc_multiply(p, q):
    if p.is_zero() or q.is_zero():
        assert (p * q).is_zero()
        return
    r = p * q
    assert r.degree == p.degree + q.degree
    assert r.leading_coefficient == p.leading_coefficient * q.leading_coefficient


@given(bivs, bivs, st.integers(-15, 15))
def test_specialize_commutes_with_arithmetic(f, g, n):
    assert specialize(f + g, n) == specialize(f, n) + specialize(g, n)
    assert specialize(f - g, n) == specialize(f, n) - specialize(g, n)
    assert specialize(f * g, n) == specialize(f, n) * specialize(g, n)


# --- admissibility ----------------------------------------------------------------


def P(text):
    return parse_univariate(text)


def test_sequence_examples():
    assert is_admissible_sequence([P("x^2"), P("x^2 + x")]).verdict is Verdict.HOLDS
    v = is_admissible_sequence([P("x^2"), P("x^2 + 5")])
    assert v.verdict is Verdict.FAILS
    assert v.witness["pair"] == [1, 2]
    assert v.witness["clause"] == "nonconstant-difference"
    v = is_admissible_sequence([P("-x^3")])
    assert v.verdict is Verdict.FAILS
    assert v.witness["index"] == 1
    assert v.witness["clause"] == "tends-to-infinity"


def test_sequence_rejects_constant_member():
    v = is_admissible_sequence([P("x"), P("7")])
    assert v.witness == {"clause": "tends-to-infinity", "index": 2, "degree": 0, "leading_coefficient": 7}


def test_empty_family_is_precondition_error():
    with pytest.raises(PreconditionError):
        is_admissible_sequence([])
    with pytest.raises(PreconditionError):
        is_uniformly_admissible([])


def test_uniform_examples():
    assert is_uniformly_admissible(parse_family("x^3, (N-x)^3")).holds
    v = is_uniformly_admissible(parse_family("x^2, (N-x)^2"))
    assert v.verdict is Verdict.FAILS
    assert v.witness["clause"] == "difference-leading-coefficient"
    assert v.witness["coefficient"] == "2*N"
    assert is_uniformly_admissible(parse_family("x^2 + N, x^2 + x + N^2")).holds


def test_uniform_literal_sign_clause():
    v = is_uniformly_admissible(parse_family("x^3, (N-x)^3"))
    assert v.literal.verdict is Verdict.FAILS
    assert v.literal.witness["index"] == 2
    assert is_uniformly_admissible(parse_family("x^2 + N, x^2 + x + N^2")).literal.holds


def test_uniform_rejects_n_dependent_subleading_difference():
    v = is_uniformly_admissible(parse_family("x^2 + N*x, x^2 + x"))
    assert v.verdict is Verdict.FAILS
    assert v.witness["pair"] == [1, 2]


def _recheck_uniform_witness(fs, w):
    if "pair" in w:
        i, j = w["pair"]
        f = fs[i - 1] - fs[j - 1]
    else:
        f = fs[w["index"] - 1]
    d = f.deg_x
    if w["clause"].endswith("degree"):
        return d is None or d == 0
    return not f.x_coefficient(d).is_constant()


@given(st.lists(bivs, min_size=1, max_size=3))
def test_uniform_failure_witness_rechecks(fs):
    v = is_uniformly_admissible(fs)
    if v.verdict is Verdict.FAILS:
        assert _recheck_uniform_witness(fs, v.witness)


@given(st.lists(bivs, min_size=1, max_size=3), st.integers(1, 100))
def test_uniform_implies_specialized_sequence_admissible(fs, n):
    # member and difference leading data are N-free, so every N qualifies
    v = is_uniformly_admissible(fs)
    if not v.literal.holds:
        return
    assert is_admissible_sequence([f.specialize(n) for f in fs]).holds


def test_family_examples():
    v = is_admissible_family(parse_family("x^3, (N-x)^3"), test_horizon=20)
    assert v.holds
    assert v.certificate == {"multiplier": {"1": 0, "2": 0}}
    v = is_admissible_family(parse_family("x - N, x^2"), test_horizon=20)
    assert v.verdict is Verdict.FAILS
    assert (v.witness["x"], v.witness["N"]) == (0, 1)
    assert parse_polynomial("x - N").specialize(v.witness["N"])(v.witness["x"]) < 0
    v = is_admissible_family(parse_family("x^2, x^2 + 5"), test_horizon=20)
    assert v.witness["clause"] == "nonconstant-x-difference"


def test_family_undetermined_when_only_integer_points_are_nonnegative():
    # consecutive-integer product: >= 0 on the grid, < 0 at x = N/2 + 1/4
    f = parse_polynomial("(2*x - N)*(2*x - N - 1)")
    v = is_admissible_family([f, parse_polynomial("x")], test_horizon=12)
    assert v.verdict is Verdict.UNDETERMINED
    assert v.witness["uncertified"] == [1]
    assert v.certificate == {"multiplier": {"2": 0}}


def test_certificate_proves_nonnegativity_on_triangle():
    f = parse_polynomial("x^2 - x*N + N^2")
    k = nonnegativity_certificate(f)
    assert k is not None
    for n in range(0, 15):
        for x in range(0, n + 1):
            assert f.specialize(n)(x) >= 0


def test_certificate_none_for_negative_polynomial():
    assert nonnegativity_certificate(parse_polynomial("x - N")) is None


def test_verdict_requires_witness_for_failure():
    from wmsets.polynomials import AdmissibilityVerdict

    with pytest.raises(PreconditionError):
        AdmissibilityVerdict(Verdict.FAILS, None)
