"""The embedding of W_L(F_p[T]) into (Z/p^L)[T], its decoder, and the
monomial-level filtration tests that the embedded picture makes cheap.

A Witt vector (f_1, ..., f_L) maps to lift(f_1)^(p^r) + p*lift(f_2)^(p^(r-1))
+ ... + p^r*lift(f_L) with r = L-1. The image is the span of the monomials
p^j * T^(K*p^(r-j)); a monomial c*T^K lies in it iff val(c) >= max(0, r - t)
where t is the minimal valuation of the entries of K.
"""

from __future__ import annotations

from .exactnum import INF, p_valuation
from .poly import Fp, MultiPoly, NotAPthPower, Zmod
from .witt import WittVec, _top_ghost


class NotInImage(ValueError):
    """Raised when a polynomial is not in the embedded copy of the Witt ring."""


def embed(w: WittVec, style: str = "standard") -> MultiPoly:
    """Top ghost component in (Z/p^L)[T]."""
    return _top_ghost(w.coords, w.p, w.L, style)


def exponent_level(expv, p: int, r: int) -> int:
    """V-filtration level of an embedded monomial: r minus the minimal
    valuation of the exponent entries, clamped to [0, r]."""
    t = min((p_valuation(e, p) for e in expv if e), default=INF)
    if t >= r:
        return 0
    return r - int(t)


def in_image(g: MultiPoly) -> bool:
    """Monomial-by-monomial membership test for the embedded Witt ring."""
    ring = g.ring
    p, r = ring.p, ring.e - 1
    for expv, c in g.terms.items():
        if p_valuation(c, p) < exponent_level(expv, p, r):
            return False
    return True


def decode(g: MultiPoly) -> WittVec:
    """Invert the embedding by peeling p-power roots.

    Reduce mod p, take the p^r-th root (that is coordinate one), subtract its
    lifted p^r-th power, check exact divisibility by p, divide, and recurse
    at length L-1. Any failed root or division raises NotInImage; partial
    decodes are never returned.
    """
    from .witt import _from_top_ghost

    ring = g.ring
    p, L = ring.p, ring.e
    try:
        coords = _from_top_ghost(g, p, L)
    except NotAPthPower as exc:
        raise NotInImage(f"no p-power root while peeling: {exc}") from None
    except ValueError as exc:
        raise NotInImage(f"failed divisibility while peeling: {exc}") from None
    return WittVec(p, g.n, coords)


def membership(g: MultiPoly) -> bool:
    return in_image(g)


# -- filtration comparisons ---------------------------------------------------
#
# Working mod p^k at truncation L, membership of an embedded element in either
# filtration reduces to a per-monomial valuation bound.


def in_v_step_mod(g: MultiPoly, m: int, k: int) -> bool:
    """Is the Witt vector with embedding g inside V^m + p^k at truncation?

    V^m corresponds to val(c) >= max(m, r - t); multiplying the whole image
    span by p^k adds k to the other bound.
    """
    ring = g.ring
    p, r = ring.p, ring.e - 1
    for expv, c in g.terms.items():
        lvl = exponent_level(expv, p, r)
        need = min(max(m, lvl), k + lvl)
        if p_valuation(c, p) < need:
            return False
    return True


def in_f_step_mod(g: MultiPoly, m: int, k: int) -> bool:
    """Is g inside the Frobenius-side filtration step m, modulo p^k?

    The basis expansion of an image element assigns each monomial the level
    determined by its exponents; membership requires every component of
    level s < m to vanish mod p^(s+k).
    """
    ring = g.ring
    p, r = ring.p, ring.e - 1
    for expv, c in g.terms.items():
        lvl = exponent_level(expv, p, r)
        if lvl < m and p_valuation(c, p) < lvl + k:
            return False
    return True


def f_degree_mod(g: MultiPoly, k: int) -> int:
    """Largest m with g in the Frobenius-side step m (mod p^k); the Witt
    length caps the answer."""
    ring = g.ring
    L = ring.e
    m = 0
    while m < L and in_f_step_mod(g, m + 1, k):
        m += 1
    return m


def check_filtration_inclusions(p, n, m, k, samples, rng, L=None, max_deg=2):
    """Sample both inclusions between the V- and F-filtrations mod p^k.

    For each sample: an element built in F-step m must land in V^m mod p^k,
    and V^(m+k-1) of a random vector must land in F-step m mod p^k. Returns
    (ok, counterexample-or-None).
    """
    L = L or min(m + k, 6)
    ring = Zmod(p, L)
    r = L - 1
    for idx in range(samples):
        # F-side sample: levels >= m only
        g = MultiPoly.zero(ring, n)
        for _ in range(3):
            s = rng.randrange(min(m, r), r + 1) if m <= r else r
            expv = []
            for v in range(n):
                base = rng.randrange(0, max_deg + 1)
                expv.append(base * p ** (r - s))
            if s >= 1 and all(e % p ** (r - s + 1) == 0 or e == 0 for e in expv):
                expv[rng.randrange(n)] += p ** (r - s)
            coeff = rng.randrange(1, p) * p**s
            g = g + MultiPoly.monomial(ring, n, tuple(expv), coeff)
        if not in_f_step_mod(g, m, k):
            continue
        if not in_v_step_mod(g, m, k):
            return False, ("F-step not inside V-step", g)
        # V-side sample
        w = WittVec(
            p,
            n,
            [
                MultiPoly(
                    Fp(p),
                    n,
                    {tuple(rng.randrange(0, max_deg + 1) for _ in range(n)): rng.randrange(1, p)},
                )
                for _ in range(L)
            ],
        )
        shifted = w.verschiebung(m + k - 1)
        if not in_f_step_mod(embed(shifted), m, k):
            return False, ("V-step not inside F-step", w)
    return True, None
