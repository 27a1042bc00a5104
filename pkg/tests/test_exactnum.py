import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittops.exactnum import (
    INF,
    ModExp,
    binomial_mod,
    binomial_shift_congruence,
    factorial_valuation,
    multinomial_reduction_congruence,
    orbit_enumerate,
    p_valuation,
)


def test_p_valuation_examples():
    assert p_valuation(12, 2) == 2
    assert p_valuation(0, 3) == INF
    assert p_valuation(66, 2) == 1


@given(st.integers(min_value=1, max_value=10**6), st.sampled_from([2, 3, 5, 7]))
def test_p_valuation_divides(x, p):
    v = p_valuation(x, p)
    assert x % p**v == 0
    assert x % p ** (v + 1) != 0


@given(st.integers(min_value=0, max_value=400), st.sampled_from([2, 3, 5]))
def test_factorial_valuation_legendre(n, p):
    assert factorial_valuation(n, p) == p_valuation(math.factorial(n), p) if n else True


def test_binomial_mod_examples():
    assert binomial_mod(12, 2, 2, 2).value == 2  # C(12,2) = 66
    assert binomial_mod(9, 0, 3, 2).value == 1
    assert binomial_mod(6, 1, 2, 2).value == 2
    with pytest.raises(ValueError):
        binomial_mod(2, 5, 2, 2)


@given(
    st.integers(min_value=0, max_value=60),
    st.integers(min_value=0, max_value=60),
    st.sampled_from([(2, 3), (3, 2), (5, 2)]),
)
def test_binomial_mod_product_formula(a, b, pe):
    # compare against the falling-factorial product evaluated with exact
    # rationals, the stated independent route
    if b > a:
        a, b = b, a
    p, e = pe
    from fractions import Fraction

    prod = Fraction(1)
    for t in range(1, b + 1):
        prod *= Fraction(a - b + t, t)
    assert prod.denominator == 1
    assert binomial_mod(a, b, p, e).value == prod.numerator % p**e


def test_modexp_arithmetic():
    x = ModExp(7, 2, 3)
    y = ModExp(3, 2, 3)
    assert (x + y).value == 2
    assert (x * y).value == 5
    assert (x - y).value == 4
    assert x.is_unit() and x.inverse().value * 7 % 8 == 1
    assert ModExp(4, 2, 3).valuation() == 2
    assert ModExp(0, 2, 3).valuation() == INF
    with pytest.raises(ValueError):
        x + ModExp(1, 3, 3)


def test_binomial_shift_examples():
    assert binomial_shift_congruence(3, 2, 1, 2)  # C(12,2)=66 == C(6,1)=6 mod 4
    assert binomial_shift_congruence(1, 1, 1, 5)
    with pytest.raises(ValueError):
        binomial_shift_congruence(1, 2, 3, 2)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_binomial_shift_sweep(p):
    for r in range(1, 7):
        for j in range(1, r + 1):
            for l in range(0, 9):
                assert binomial_shift_congruence(l, r, j, p), (l, r, j, p)


def test_multinomial_reduction_examples():
    assert multinomial_reduction_congruence(0, 2, (2, 2), 2)  # 6 == 2 mod 4
    assert multinomial_reduction_congruence(0, 1, (3,), 3)
    with pytest.raises(ValueError):
        multinomial_reduction_congruence(0, 2, (3, 1), 2)
    with pytest.raises(ValueError):
        multinomial_reduction_congruence(2, 2, (2, 2), 2)


def _partitions_div_p(total, p, max_part):
    if total == 0:
        yield ()
        return
    start = min(total, max_part)
    start -= start % p
    for part in range(start, 0, -p):
        for rest in _partitions_div_p(total - part, p, part):
            yield (part,) + rest


@pytest.mark.parametrize("p", [2, 3])
def test_multinomial_reduction_sweep(p):
    for r in range(1, 5):
        for l in range(0, r):
            for counts in _partitions_div_p(p ** (r - l), p, p ** (r - l)):
                assert multinomial_reduction_congruence(l, r, counts, p), (l, r, counts)


def test_orbit_examples():
    orbits = orbit_enumerate(1, 1, 1, 2)
    assert len(orbits) == 1
    o = orbits[0]
    assert o.values == (1,) and o.counts == (1,) and o.alpha == 1
    assert o.b.value == 1 and o.reduced_counts == (1,)

    orbits = orbit_enumerate(2, 0, 1, 2)
    assert len(orbits) == 2
    by_alpha = {o.alpha: o for o in orbits}
    assert by_alpha[0].values == (1,) and by_alpha[0].counts == (2,)
    assert by_alpha[0].reduced_counts == (1,)
    assert by_alpha[1].values == (2, 0) and by_alpha[1].counts == (1, 1)
    assert by_alpha[1].reduced_counts == (1, 1)
    assert all(o.b.value == 1 for o in orbits)


def test_orbit_single_part_when_no_room():
    # l = r forces one part, so only the single-value orbit exists
    for p in (2, 3):
        for j in (1, 2, 4, 5):
            if j % p == 0:
                continue
            orbits = orbit_enumerate(j, 2, 2, p)
            assert len(orbits) == 1
            assert orbits[0].values == (j,) and orbits[0].counts == (1,)


def test_orbit_errors():
    with pytest.raises(ValueError):
        orbit_enumerate(0, 0, 1, 2)
    with pytest.raises(ValueError):
        orbit_enumerate(1, 3, 2, 2)


@pytest.mark.parametrize("p,j,l,r", [(2, 3, 0, 2), (3, 4, 0, 2), (2, 5, 1, 2), (3, 7, 0, 1)])
def test_orbit_invariants(p, j, l, r):
    parts = p ** (r - l)
    for o in orbit_enumerate(j, l, r, p):
        coeff = p**l * math.factorial(parts)
        for c in o.counts:
            coeff //= math.factorial(c)
        assert p_valuation(coeff, p) == o.alpha
        assert o.unit == coeff // p**o.alpha
        assert o.unit % p == o.b.value and o.b.value != 0
        assert sum(o.counts) == parts
        assert sum(v * c for v, c in zip(o.values, o.counts)) == j
        q = p ** (r - o.alpha)
        assert all(c == cp * q for c, cp in zip(o.counts, o.reduced_counts))
        assert o.alpha >= l


@pytest.mark.parametrize("p,j,r", [(2, 3, 2), (3, 2, 1), (2, 4, 2), (3, 5, 2)])
def test_orbit_sizes_partition_compositions(p, j, r):
    # orbits (including the alpha > r ones) partition all compositions;
    # re-enumerate without the alpha filter by brute force
    parts = p**r
    total = math.comb(j + parts - 1, parts - 1)
    seen = 0
    from wittops.exactnum import _partitions_max_parts

    for partition in _partitions_max_parts(j, parts):
        counts = {}
        for v in partition:
            counts[v] = counts.get(v, 0) + 1
        counts[0] = counts.get(0, 0) + parts - len(partition)
        size = math.factorial(parts)
        for c in counts.values():
            size //= math.factorial(c)
        seen += size
    assert seen == total
