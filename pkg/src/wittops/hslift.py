"""Hasse-Schmidt derivations on F_p[T] and their canonical lifts to Witt
vectors, computed two independent ways.

A derivation is stored through its variable images: the polynomials D_i(T_v).
On a polynomial ring those images are free parameters and determine an
algebra map T_v -> T_v + D_1(T_v) t + D_2(T_v) t^2 + ..., so the Leibniz rule
holds by construction, over the base ring and over any coefficient lift.

The canonical lift of D_j is computed either from the closed orbit-sum
formula (exactnum.orbit_enumerate supplies the coefficients), or by lifting
the derivation to (Z/p^L)[T], applying it to the embedded Witt vector, and
decoding. Agreement of the two is the module's central test surface.
"""

from __future__ import annotations

from .exactnum import orbit_enumerate, p_valuation
from .poly import DiffOpOnA, Fp, MultiPoly
from .witt import WittVec, witt_scalar


class TruncSeries:
    """A polynomial in t with MultiPoly coefficients, truncated past t^order."""

    __slots__ = ("coeffs", "order", "ring", "n")

    def __init__(self, coeffs, order, ring, n):
        coeffs = list(coeffs[: order + 1])
        while len(coeffs) <= order:
            coeffs.append(MultiPoly.zero(ring, n))
        self.coeffs = coeffs
        self.order = order
        self.ring = ring
        self.n = n

    @staticmethod
    def constant(f: MultiPoly, order: int):
        return TruncSeries([f], order, f.ring, f.n)

    def __add__(self, other):
        return TruncSeries(
            [a + b for a, b in zip(self.coeffs, other.coeffs)], self.order, self.ring, self.n
        )

    def __mul__(self, other):
        order = self.order
        zero = MultiPoly.zero(self.ring, self.n)
        out = [zero] * (order + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if i + j > order:
                    break
                if b.is_zero():
                    continue
                out[i + j] = out[i + j] + a * b
        return TruncSeries(out, order, self.ring, self.n)

    def __pow__(self, k: int):
        result = TruncSeries.constant(MultiPoly.one(self.ring, self.n), self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result


class HSDerivation:
    """A Hasse-Schmidt derivation of F_p[T_1..T_n], component 0 the identity.

    images[v] maps i >= 1 to D_i(T_v); absent entries are zero. length=None
    means the family extends to all orders (with the stored finite image
    data), otherwise components past `length` are undefined.
    """

    def __init__(self, p: int, n: int, images, length=None):
        self.p = p
        self.n = n
        self.ring = Fp(p)
        self.length = length
        clean = []
        for v in range(n):
            img = {}
            for i, f in images[v].items():
                if i < 1:
                    raise ValueError("image indices start at 1")
                if length is not None and i > length:
                    raise ValueError("image index beyond stated length")
                if f.ring != self.ring or f.n != n:
                    raise ValueError("image ring mismatch")
                if not f.is_zero():
                    img[i] = f
            clean.append(img)
        self.images = clean

    @staticmethod
    def coordinate(p: int, n: int, var: int, length=None):
        """The iterated divided-power family along one variable."""
        images = [dict() for _ in range(n)]
        images[var] = {1: MultiPoly.one(Fp(p), n)}
        return HSDerivation(p, n, images, length)

    def has_component(self, i: int) -> bool:
        return self.length is None or i <= self.length

    def _series_images(self, order, ring, style="standard"):
        out = []
        for v in range(self.n):
            coeffs = [MultiPoly.variable(ring, self.n, v)]
            for i in range(1, order + 1):
                f = self.images[v].get(i)
                if f is None:
                    coeffs.append(MultiPoly.zero(ring, self.n))
                elif ring == self.ring:
                    coeffs.append(f)
                else:
                    coeffs.append(f.lift_to(ring, style))
            out.append(TruncSeries(coeffs, order, ring, self.n))
        return out

    def apply_to_order(self, f: MultiPoly, order: int, style: str = "standard"):
        """[D_0(f), ..., D_order(f)] over f's ring.

        Over the base ring this is the derivation itself; over Z/p^L it is
        the coefficient-wise lift determined by `style`.
        """
        if self.length is not None and order > self.length:
            raise ValueError(f"component {order} beyond derivation length {self.length}")
        ring = f.ring
        images = self._series_images(order, ring, style)
        zero = MultiPoly.zero(ring, self.n)
        total = TruncSeries.constant(zero, order)
        pow_cache = {}
        for expv, c in f.terms.items():
            term = TruncSeries.constant(MultiPoly.constant(ring, self.n, c), order)
            for v, e in enumerate(expv):
                if e:
                    key = (v, e)
                    if key not in pow_cache:
                        pow_cache[key] = images[v] ** e
                    term = term * pow_cache[key]
            total = total + term
        return total.coeffs

    def component(self, i: int, f: MultiPoly) -> MultiPoly:
        return self.apply_to_order(f, i)[i]

    def component_operator(self, i: int) -> DiffOpOnA:
        """D_i written in the divided-power basis sum(a_I d^[I])."""
        if not self.has_component(i):
            raise ValueError("component beyond derivation length")
        ring, n = self.ring, self.n
        parts = []

        def rec(v, order_left, index, coeff_series):
            if v == n:
                c = coeff_series.coeffs[i]
                if not c.is_zero():
                    parts.append((c, tuple(index)))
                return
            img = self.images[v]
            h = TruncSeries(
                [MultiPoly.zero(ring, n)]
                + [img.get(k, MultiPoly.zero(ring, n)) for k in range(1, i + 1)],
                i,
                ring,
                n,
            )
            power = TruncSeries.constant(MultiPoly.one(ring, n), i)
            for iv in range(order_left + 1):
                if iv:
                    power = power * h
                    if all(c.is_zero() for c in power.coeffs):
                        break
                rec(v + 1, order_left - iv, index + [iv], coeff_series * power)

        rec(0, i, [], TruncSeries.constant(MultiPoly.one(ring, n), i))
        return DiffOpOnA(ring, n, parts)


# -- canonical lifts ----------------------------------------------------------


def canonical_lift_orbit(D: HSDerivation, j: int, w: WittVec) -> WittVec:
    """Closed-form canonical lift: sum the orbit contributions slotwise.

    For the coordinate in slot l, each orbit of compositions of j into
    p^(r-l) parts contributes its exact unit coefficient times V^alpha of
    the Teichmuller lift of the product of component values; its leading
    coordinate sits in slot alpha and carries the mod-p unit. Slots are
    combined by Witt addition.
    """
    if j < 1:
        raise ValueError("need j >= 1")
    if not D.has_component(j):
        raise ValueError("component beyond derivation length")
    p, L, n = w.p, w.L, w.n
    r = L - 1
    total = WittVec.zero(p, n, L)
    for l in range(L):
        f = w.coords[l]
        if f.is_zero():
            continue
        values = D.apply_to_order(f, j)
        for orbit in orbit_enumerate(j, l, r, p):
            if D.length is not None and any(v > D.length for v in orbit.values):
                continue
            prod = MultiPoly.one(Fp(p), n)
            for v, c in zip(orbit.values, orbit.reduced_counts):
                prod = prod * values[v] ** c
                if prod.is_zero():
                    break
            if prod.is_zero():
                continue
            term = WittVec.teichmuller(prod, L).verschiebung(orbit.alpha)
            unit = orbit.unit % p ** (L - orbit.alpha)
            if unit != 1:
                term = witt_scalar(unit, p, n, L) * term
            total = total + term
    return total


def canonical_lift_embed(D: HSDerivation, j: int, w: WittVec, style: str = "standard") -> WittVec:
    """Oracle route: lift the derivation to (Z/p^L)[T], apply component j to
    the embedded element, decode. The decoded result is independent of the
    coefficient lift style."""
    from .embed import decode, embed

    if j < 1:
        raise ValueError("need j >= 1")
    if not D.has_component(j):
        raise ValueError("component beyond derivation length")
    g = embed(w, style)
    value = D.apply_to_order(g, j, style)[j]
    return decode(value)


def canonical_lift(D: HSDerivation, j: int, w: WittVec, method: str = "orbit") -> WittVec:
    if method == "orbit":
        return canonical_lift_orbit(D, j, w)
    if method == "embed":
        return canonical_lift_embed(D, j, w)
    raise ValueError(f"unknown method {method!r}")


# -- structural checks --------------------------------------------------------


def check_frobenius_intertwine(D: HSDerivation, j: int, samples) -> bool:
    """Lift-of-D_j after Frobenius equals Frobenius after lift-of-D_(j/p),
    the right side being zero when p does not divide j."""
    for w in samples:
        lhs = canonical_lift_orbit(D, j, w.frobenius())
        if j % w.p:
            rhs = WittVec.zero(w.p, w.n, w.L)
        else:
            rhs = canonical_lift_orbit(D, j // w.p, w).frobenius()
        if lhs != rhs:
            return False
    return True


def check_restriction_descent(D: HSDerivation, j: int, samples) -> bool:
    """Restriction compatibility and the V-filtration bound of the lift:
    R(lift_j(w)) = lift_(j/p)(R(w)) (zero when p does not divide j), and the
    image of lift_j lies in V^(r-val(j))."""
    for w in samples:
        p, L = w.p, w.L
        r = L - 1
        out = canonical_lift_orbit(D, j, w)
        a = p_valuation(j, p)
        if a <= r and out.v_order() < r - a:
            return False
        if L >= 2:
            lhs = out.restrict()
            if j % p:
                rhs = WittVec.zero(p, w.n, L - 1)
            else:
                rhs = canonical_lift_orbit(D, j // p, w.restrict())
            if lhs != rhs:
                return False
    return True
