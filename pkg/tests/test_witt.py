import random

import pytest

from wittops.poly import Fp, MultiPoly, parse_poly
from wittops.suites import random_witt
from wittops.witt import (
    WittVec,
    format_witt,
    map_along,
    parse_witt,
    teichmuller,
    vmul,
    witt_op_universal,
    witt_scalar,
    _ghost_mod,
)


F2 = Fp(2)
T = MultiPoly.variable(F2, 1, 0)
one = MultiPoly.one(F2, 1)
zero = MultiPoly.zero(F2, 1)


def test_pinned_arithmetic():
    a = WittVec(2, 1, [one, zero])
    assert a + a == WittVec(2, 1, [zero, one])
    v = WittVec(2, 1, [zero, one])
    assert v * v == WittVec.zero(2, 1, 2)


def test_teichmuller_multiplicative():
    rng = random.Random(0)
    for p in (2, 3, 5):
        ring = Fp(p)
        for _ in range(10):
            f = MultiPoly(ring, 1, {(rng.randrange(4),): rng.randrange(1, p)})
            g = MultiPoly(ring, 1, {(rng.randrange(4),): rng.randrange(1, p)})
            assert teichmuller(f, 3) * teichmuller(g, 3) == teichmuller(f * g, 3)


def test_ghost_examples():
    w = WittVec(2, 1, [one, zero])
    gs = w.ghost()
    assert [g.constant_term() for g in gs] == [1, 1]
    w = WittVec(2, 1, [zero, one])
    assert [g.constant_term() for g in w.ghost()] == [0, 2]
    w = WittVec(2, 1, [T, one])
    gs = w.ghost()
    assert gs[0] == T.lift_to(__import__("wittops.poly", fromlist=["ZZ"]).ZZ)
    assert gs[1].terms == {(2,): 1, (0,): 2}


def _ghost_hom_holds(a, b, op):
    p, L = a.p, a.L
    ga, gb = _ghost_mod(a.coords, p, L), _ghost_mod(b.coords, p, L)
    out = a + b if op == "add" else a * b
    go = _ghost_mod(out.coords, p, L)
    for s in range(L):
        want = ga[s] + gb[s] if op == "add" else ga[s] * gb[s]
        if any(c % p ** (s + 1) for c in (go[s] - want).terms.values()):
            return False
    return True


@pytest.mark.parametrize("p,L,n", [(2, 2, 1), (2, 3, 2), (3, 3, 1), (3, 2, 2), (5, 2, 1), (5, 3, 1)])
def test_ghost_is_ring_hom(p, L, n):
    rng = random.Random(f"{p}{L}{n}")
    for _ in range(30):
        a = random_witt(rng, p, n, L, 3, 2)
        b = random_witt(rng, p, n, L, 3, 2)
        assert _ghost_hom_holds(a, b, "add")
        assert _ghost_hom_holds(a, b, "mul")


@pytest.mark.parametrize("p", [2, 3, 5])
def test_universal_oracle(p):
    rng = random.Random(p)
    for L in (1, 2, 3):
        for _ in range(10):
            a = random_witt(rng, p, 1, L, 3, 2)
            b = random_witt(rng, p, 1, L, 3, 2)
            assert witt_op_universal(a, b, "add") == a + b
            assert witt_op_universal(a, b, "mul") == a * b


def test_ring_axioms_random():
    rng = random.Random(7)
    for p in (2, 3):
        for _ in range(10):
            a = random_witt(rng, p, 1, 3, 3, 2)
            b = random_witt(rng, p, 1, 3, 3, 2)
            c = random_witt(rng, p, 1, 3, 3, 2)
            assert (a + b) + c == a + (b + c)
            assert a * (b * c) == (a * b) * c
            assert a * (b + c) == a * b + a * c
            assert a + WittVec.zero(p, 1, 3) == a
            assert a * WittVec.one(p, 1, 3) == a
            assert (a - a).is_zero()


def test_structure_map_identities():
    rng = random.Random(3)
    for p in (2, 3):
        L = 3
        for _ in range(15):
            a = random_witt(rng, p, 1, L, 3, 2)
            b = random_witt(rng, p, 1, L, 3, 2)
            pa = witt_scalar(p, p, 1, L) * a
            # FV = p and VF = p on F_p-algebras
            assert a.verschiebung().frobenius() == pa
            assert a.frobenius().verschiebung() == pa
            # F is a ring hom, V is additive, V(x)V(y) = pV(xy)
            assert (a * b).frobenius() == a.frobenius() * b.frobenius()
            assert (a + b).verschiebung() == a.verschiebung() + b.verschiebung()
            assert a.verschiebung() * b.verschiebung() == (
                witt_scalar(p, p, 1, L) * (a * b).verschiebung()
            )
            # R commutes with F and V
            assert a.frobenius().restrict() == a.restrict().frobenius()
            assert a.verschiebung().restrict() == a.restrict().verschiebung()


def test_verschiebung_restrict_shapes():
    w = WittVec(2, 1, [T, one, T**2])
    assert w.verschiebung().coords == (zero, T, one)
    assert w.restrict().coords == (T, one)
    assert WittVec(2, 1, [one, zero]).verschiebung() == WittVec(2, 1, [zero, one])
    with pytest.raises(ValueError):
        WittVec(2, 1, [T]).restrict()


def test_frobenius_examples():
    w = WittVec(2, 1, [T, one])
    assert w.frobenius() == WittVec(2, 1, [T**2, one])
    f = T**3 + T
    assert teichmuller(f, 2).frobenius() == teichmuller(f * f, 2)
    assert WittVec.zero(2, 1, 2).frobenius().is_zero()


def test_vmul():
    rng = random.Random(1)
    a = random_witt(rng, 2, 1, 2, 2, 2)
    b = random_witt(rng, 2, 1, 2, 2, 2)
    assert vmul(a, 0, b) == a * b
    assert vmul(teichmuller(T, 2), 1, WittVec.one(2, 1, 2)) == WittVec(2, 1, [zero, T])
    # the semilinear action: a * V^j(b) = V^j(F^j(a) * b)
    for p in (2, 3):
        for j in (1, 2):
            L = 3
            a = random_witt(rng, p, 1, L, 2, 2)
            b = random_witt(rng, p, 1, L, 2, 2)
            lhs = a * b.verschiebung(j)
            fa = a
            for _ in range(j):
                fa = fa.frobenius()
            assert lhs == vmul(fa, j, b)


def test_map_along():
    rng = random.Random(5)
    S_ring = Fp(2)
    w = random_witt(rng, 2, 1, 3, 2, 2)
    ident = [MultiPoly.variable(S_ring, 1, 0)]
    assert map_along(ident, w) == w
    h = [MultiPoly.variable(S_ring, 1, 0) ** 2]
    assert map_along(h, teichmuller(T, 2)) == teichmuller(T**2, 2)
    # functoriality: commutes with F and V
    out = map_along(h, w)
    assert map_along(h, w.frobenius()) == out.frobenius()
    assert map_along(h, w.verschiebung()) == out.verschiebung()
    # into two variables
    h2 = [MultiPoly.variable(S_ring, 2, 0) * MultiPoly.variable(S_ring, 2, 1)]
    out2 = map_along(h2, w)
    assert out2.n == 2
    assert map_along(h2, w + w) == out2 + out2


def test_scalar_embedding():
    # the scalar ring W_L(F_p) behaves like Z/p^L
    for p in (2, 3):
        L = 3
        for c1 in range(6):
            for c2 in range(6):
                s1 = witt_scalar(c1, p, 1, L)
                s2 = witt_scalar(c2, p, 1, L)
                assert s1 + s2 == witt_scalar(c1 + c2, p, 1, L)
                assert s1 * s2 == witt_scalar(c1 * c2, p, 1, L)
    assert witt_scalar(8, 2, 1, 3).is_zero()


def test_text_roundtrip():
    w = WittVec(2, 2, [parse_poly("T1*T2 + 1", F2 := Fp(2), 2), MultiPoly.zero(F2, 2)])
    s = format_witt(w)
    assert parse_witt(s, 2, 2) == w
    assert parse_witt("[1;0]", 2, 1, 2) == WittVec(2, 1, [one, zero])
    with pytest.raises(ValueError):
        parse_witt("1;0", 2, 1)
    with pytest.raises(ValueError):
        parse_witt("[1;0]", 2, 1, 3)


def test_lift_independence_of_arithmetic():
    # balanced and standard lifts give the same sums and products
    from wittops.witt import _from_top_ghost, _top_ghost

    rng = random.Random(11)
    for p in (2, 3, 5):
        for _ in range(10):
            a = random_witt(rng, p, 1, 3, 3, 2)
            b = random_witt(rng, p, 1, 3, 3, 2)
            g_std = _top_ghost(a.coords, p, 3) + _top_ghost(b.coords, p, 3)
            g_bal = _top_ghost(a.coords, p, 3, "balanced") + _top_ghost(b.coords, p, 3, "balanced")
            assert _from_top_ghost(g_std, p, 3) == _from_top_ghost(g_bal, p, 3)


def test_context_mismatch():
    a = WittVec(2, 1, [one, zero])
    with pytest.raises(ValueError):
        a + WittVec(2, 1, [one, zero, zero])
    with pytest.raises(ValueError):
        a + WittVec(2, 2, [MultiPoly.one(Fp(2), 2), MultiPoly.zero(Fp(2), 2)])
