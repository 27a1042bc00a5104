import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittops.poly import (
    DiffOpOnA,
    Fp,
    MultiPoly,
    NotAPthPower,
    PolyParseError,
    Zmod,
    ZZ,
    diffop_apply,
    divided_power_apply,
    format_poly,
    parse_poly,
)


def poly_strategy(ring, n, max_deg=4, max_terms=4, max_coeff=None):
    if max_coeff is None:
        max_coeff = getattr(ring, "modulus", 20) - 1 if ring != ZZ else 9
    expv = st.tuples(*[st.integers(0, max_deg) for _ in range(n)])
    term = st.tuples(expv, st.integers(0, max_coeff))
    return st.lists(term, max_size=max_terms).map(
        lambda ts: MultiPoly(ring, n, {ev: c for ev, c in ts})
    )


R = Zmod(2, 2)


@given(poly_strategy(R, 2), poly_strategy(R, 2), poly_strategy(R, 2))
def test_ring_axioms(f, g, h):
    assert f + g == g + f
    assert (f + g) + h == f + (g + h)
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f - f == MultiPoly.zero(R, 2)


def test_ring_mismatch_errors():
    f = MultiPoly.one(Fp(2), 1)
    g = MultiPoly.one(Fp(3), 1)
    with pytest.raises(ValueError):
        f + g
    with pytest.raises(ValueError):
        f * MultiPoly.one(Fp(2), 2)


def test_lex_ordering_display():
    f = parse_poly("T1 + T2^5 + T1^2*T2", Zmod(5, 2), 2)
    # leftmost variable most significant, descending
    assert format_poly(f) == "T1^2*T2 + T1 + T2^5"


def test_divided_power_examples():
    R4 = Zmod(2, 2)
    T = MultiPoly.variable(R4, 1, 0)
    assert divided_power_apply(0, 2, T**3) == T.scale(3)  # C(3,2) = 3
    assert divided_power_apply(0, 2, T**5) == (T**3).scale(2)  # C(5,2) = 10 = 2 mod 4
    assert divided_power_apply(0, 1, MultiPoly.constant(R4, 1, 7)).is_zero()


@given(poly_strategy(Fp(3), 1, max_deg=5), poly_strategy(Fp(3), 1, max_deg=5),
       st.integers(0, 4))
def test_divided_power_leibniz(f, g, m):
    lhs = (f * g).divided_power(0, m)
    rhs = MultiPoly.zero(Fp(3), 1)
    for i in range(m + 1):
        rhs = rhs + f.divided_power(0, i) * g.divided_power(0, m - i)
    assert lhs == rhs


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 8),
       st.sampled_from([Zmod(2, 3), Zmod(3, 2)]))
def test_divided_power_iterativity(i, j, deg, ring):
    import math

    T = MultiPoly.variable(ring, 1, 0)
    probe = T**deg
    lhs = probe.divided_power(0, j).divided_power(0, i)
    rhs = probe.divided_power(0, i + j).scale(math.comb(i + j, i))
    assert lhs == rhs


def test_diffop_apply():
    ring = Fp(2)
    T = MultiPoly.variable(ring, 1, 0)
    op = DiffOpOnA(ring, 1, [(T, (1,))])  # T*d
    assert op.apply(T**2).is_zero()  # 2T^2 = 0 over F_2
    ident = DiffOpOnA.identity(ring, 1)
    f = T**3 + T
    assert ident.apply(f) == f


def test_pth_root():
    ring = Fp(2)
    T = MultiPoly.variable(ring, 1, 0)
    f = T**2 + T**4
    assert f.pth_root() == T + T**2
    assert MultiPoly.one(ring, 1).pth_root() == MultiPoly.one(ring, 1)
    with pytest.raises(NotAPthPower):
        (T**3).pth_root()


@given(poly_strategy(Fp(3), 2, max_deg=3))
def test_pth_root_roundtrip(f):
    assert (f**3).pth_root() == f


def test_frobenius_substitute():
    R4 = Zmod(2, 2)
    T = MultiPoly.variable(R4, 1, 0)
    f = T + MultiPoly.one(R4, 1)
    assert f.frobenius_substitute(2) == T**2 + MultiPoly.one(R4, 1)
    c = MultiPoly.constant(R4, 1, 3)
    assert c.frobenius_substitute(2) == c
    two = MultiPoly.variable(Fp(5), 2, 0) * MultiPoly.variable(Fp(5), 2, 1)
    assert two.frobenius_substitute(5) == MultiPoly.monomial(Fp(5), 2, (5, 5))


@given(poly_strategy(Fp(3), 1, max_deg=4))
def test_frobenius_substitute_is_cube_over_f3(f):
    assert f.frobenius_substitute(3) == f**3


def test_divexact():
    R8 = Zmod(2, 3)
    f = MultiPoly(R8, 1, {(1,): 4, (0,): 2})
    g = f.divexact_p(1)
    assert g.ring == Zmod(2, 2) and g.terms == {(1,): 2, (0,): 1}
    with pytest.raises(ValueError):
        MultiPoly(R8, 1, {(0,): 1}).divexact_p(1)


def test_parse_format_examples():
    f = parse_poly("3*T1^2*T2 + 1", Zmod(5, 2), 2)
    assert f.terms == {(2, 1): 3, (0, 0): 1}
    assert parse_poly("T", Fp(2), 1) == MultiPoly.variable(Fp(2), 1, 0)
    assert parse_poly("0", Fp(2), 1).is_zero()
    assert parse_poly("T1 - T2", Zmod(3, 2), 2).terms == {(1, 0): 1, (0, 1): 8}
    with pytest.raises(PolyParseError):
        parse_poly("T3", Fp(2), 2)
    with pytest.raises(PolyParseError):
        parse_poly("1 +", Fp(2), 1)
    with pytest.raises(PolyParseError):
        parse_poly("T^", Fp(2), 1)


@given(poly_strategy(Zmod(3, 2), 2))
def test_parse_format_roundtrip(f):
    assert parse_poly(format_poly(f), Zmod(3, 2), 2) == f
