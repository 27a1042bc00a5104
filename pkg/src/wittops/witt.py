"""Truncated p-typical Witt vectors over F_p[T_1..T_n].

Arithmetic goes through the top ghost component over an integral lift: the
map w -> sum p^i lift(w_i)^(p^(r-i)) into (Z/p^L)[T] is an injective ring
homomorphism whose image is decodable by peeling p-power roots, so sums and
products are computed there. Every power of a lifted coordinate is taken
through a Frobenius tower with precision growing one digit per p-th power,
which keeps the arithmetic exact and the term counts tame. The ghost vector
over Z and the universal sum/product polynomials are kept alongside as
independent oracles.
"""

from __future__ import annotations

from functools import lru_cache

from .poly import Fp, MultiPoly, Zmod, ZZ


class WittVec:
    """A length-L Witt vector: L coordinate polynomials over F_p."""

    __slots__ = ("p", "n", "coords")

    def __init__(self, p: int, n: int, coords):
        coords = tuple(coords)
        if not coords:
            raise ValueError("need at least one coordinate")
        ring = Fp(p)
        for c in coords:
            if c.ring != ring or c.n != n:
                raise ValueError("coordinate ring mismatch")
        self.p = p
        self.n = n
        self.coords = coords

    # -- construction -----------------------------------------------------
    @staticmethod
    def zero(p, n, L):
        z = MultiPoly.zero(Fp(p), n)
        return WittVec(p, n, [z] * L)

    @staticmethod
    def one(p, n, L):
        z = MultiPoly.zero(Fp(p), n)
        return WittVec(p, n, [MultiPoly.one(Fp(p), n)] + [z] * (L - 1))

    @staticmethod
    def teichmuller(f: MultiPoly, L: int):
        ring = f.ring
        z = MultiPoly.zero(ring, f.n)
        return WittVec(ring.p, f.n, [f] + [z] * (L - 1))

    @property
    def L(self):
        return len(self.coords)

    def is_zero(self):
        return all(c.is_zero() for c in self.coords)

    def _check(self, other):
        if (self.p, self.n, self.L) != (other.p, other.n, other.L):
            raise ValueError(
                f"context mismatch: (p,n,L)=({self.p},{self.n},{self.L}) vs "
                f"({other.p},{other.n},{other.L})"
            )

    def __eq__(self, other):
        return (
            isinstance(other, WittVec)
            and (self.p, self.n) == (other.p, other.n)
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((self.p, self.n, self.coords))

    def __repr__(self):
        return "[" + "; ".join(repr(c) for c in self.coords) + "]"

    # -- ring structure -----------------------------------------------------
    def __add__(self, other):
        self._check(other)
        g = _top_ghost(self.coords, self.p, self.L) + _top_ghost(other.coords, self.p, self.L)
        return WittVec(self.p, self.n, _from_top_ghost(g, self.p, self.L))

    def __mul__(self, other):
        if isinstance(other, int):
            return witt_scalar(other, self.p, self.n, self.L) * self
        self._check(other)
        if self.is_zero() or other.is_zero():
            return WittVec.zero(self.p, self.n, self.L)
        g = _top_ghost(self.coords, self.p, self.L) * _top_ghost(other.coords, self.p, self.L)
        return WittVec(self.p, self.n, _from_top_ghost(g, self.p, self.L))

    __rmul__ = __mul__

    def __neg__(self):
        return witt_scalar(-1, self.p, self.n, self.L) * self

    def __sub__(self, other):
        return self + (-other)

    # -- structure maps -----------------------------------------------------
    def frobenius(self):
        """Coordinatewise p-th power (Witt Frobenius on F_p-algebras)."""
        return WittVec(self.p, self.n, [c.frobenius_substitute(self.p) for c in self.coords])

    def verschiebung(self, times=1):
        """Shift coordinates down, dropping overflow past length L."""
        if times < 0:
            raise ValueError("negative shift")
        z = MultiPoly.zero(Fp(self.p), self.n)
        k = min(times, self.L)
        return WittVec(self.p, self.n, (z,) * k + self.coords[: self.L - k])

    def restrict(self, times=1):
        """Drop the top coordinate(s): W_L -> W_(L-times)."""
        if self.L - times < 1:
            raise ValueError(f"cannot restrict length {self.L} by {times}")
        return WittVec(self.p, self.n, self.coords[: self.L - times])

    def unshift(self, times):
        """Content of a V^times-element: coordinates shifted up, zero-padded.

        Only meaningful when the first `times` coordinates vanish.
        """
        if any(not self.coords[i].is_zero() for i in range(times)):
            raise ValueError("vector is not in the V-filtration step requested")
        z = MultiPoly.zero(Fp(self.p), self.n)
        return WittVec(self.p, self.n, self.coords[times:] + (z,) * times)

    def v_order(self):
        """Number of leading zero coordinates (L if the vector is zero)."""
        for i, c in enumerate(self.coords):
            if not c.is_zero():
                return i
        return self.L

    def ghost(self, style: str = "standard"):
        """Exact integer ghost components over the chosen coordinatewise lift."""
        lifted = [c.lift_to(ZZ, style) for c in self.coords]
        out = []
        for s in range(self.L):
            acc = MultiPoly.zero(ZZ, self.n)
            for i in range(s + 1):
                acc = acc + (lifted[i] ** (self.p ** (s - i))).scale(self.p**i)
            out.append(acc)
        return out

    def max_coord_degree(self):
        return max(c.total_degree() for c in self.coords)


# -- modular ghost and peel -------------------------------------------------


def _lift_power_mod(f: MultiPoly, k: int, e: int, style: str = "standard") -> MultiPoly:
    """lift(f)^(p^k) in Z/p^e for f over F_p, by a Frobenius tower.

    The j-th stage is only carried modulo p^max(1, e-k+j): enough, since each
    p-th power gains one digit of determinacy, and cheap, since coefficients
    die early. `style` picks the coordinatewise integer lift.
    """
    p = f.ring.p
    prec = max(1, e - k)
    y = f.lift_to(Zmod(p, prec), style)
    for _ in range(k):
        nxt = min(e, prec + 1)
        y = y.map_coefficients(lambda c: c, Zmod(p, nxt))
        acc = y
        for _ in range(p - 1):
            acc = acc * y
        y, prec = acc, nxt
    if prec < e:
        y = y.map_coefficients(lambda c: c, Zmod(p, e))
    return y


def _top_ghost(coords, p, L, style="standard"):
    """sum p^i lift(coords[i])^(p^(L-1-i)) in (Z/p^L)[T]."""
    acc = MultiPoly.zero(Zmod(p, L), coords[0].n)
    for i, f in enumerate(coords):
        if not f.is_zero():
            pw = _lift_power_mod(f, L - 1 - i, L - i, style)
            acc = acc + pw.map_coefficients(lambda c, q=p**i: c * q, Zmod(p, L))
    return acc


def _from_top_ghost(g: MultiPoly, p: int, L: int):
    """Peel a top ghost component back into Witt coordinates.

    The argument must lie in the image of the ghost embedding (sums and
    products of image elements always do); a failed root or division here
    means the input was not an image element.
    """
    coords = []
    current = g
    for step in range(L):
        e = L - step
        root = current.reduce_to(Fp(p))
        for _ in range(e - 1):
            root = root.pth_root()
        coords.append(root)
        if e == 1:
            break
        current = (current - _lift_power_mod(root, e - 1, e)).divexact_p(1)
    return coords


def _ghost_mod(coords, p, L, style="standard"):
    """All ghost components with coefficients reduced mod p^L; component s is
    exact mod p^(s+1), which is all a Witt vector over F_p determines."""
    ring = Zmod(p, L)
    out = []
    for s in range(L):
        acc = MultiPoly.zero(ring, coords[0].n)
        for i in range(s + 1):
            if not coords[i].is_zero():
                pw = _lift_power_mod(coords[i], s - i, L - i, style)
                acc = acc + pw.map_coefficients(lambda c, q=p**i: c * q, ring)
        out.append(acc)
    return out


def _peel(ghost, p, L):
    """Solve ghost components back into Witt coordinates.

    ghost[s] must be the s-th ghost component (mod p^L) of an actual Witt
    vector over the integral lift; every division below is then exact, and a
    failed division signals a corrupted ghost vector rather than roundoff.
    """
    coords = []
    partial = []  # partial[i] holds the lifted i-th solution mod p^(L-i)
    for s in range(L):
        acc = ghost[s]
        for i in range(s):
            pw = partial[i] ** (p ** (s - i))  # mod p^(L-i), enough after scaling
            acc = acc - pw.map_coefficients(lambda c, q=p**i: c * q, Zmod(p, L))
        stilde = acc.divexact_p(s) if s else acc
        partial.append(stilde)
        coords.append(stilde.reduce_to(Fp(p)))
    return coords


def from_ghost_mod(ghost, p, L, n):
    """Public peel entry point: ghost components (mod p^L) to a WittVec."""
    return WittVec(p, n, _peel(ghost, p, L))


def from_top_ghost(g: MultiPoly, p: int, L: int, n: int) -> WittVec:
    """Recover a Witt vector from its top ghost component alone."""
    return WittVec(p, n, _from_top_ghost(g, p, L))


@lru_cache(maxsize=None)
def witt_scalar(c: int, p: int, n: int, L: int) -> WittVec:
    """The image of the integer c in W_L(F_p) embedded as constants."""
    ring = Zmod(p, L)
    const = MultiPoly.constant(ring, n, c)
    return WittVec(p, n, _peel([const] * L, p, L))


def witt_add(a: WittVec, b: WittVec) -> WittVec:
    return a + b


def witt_mul(a: WittVec, b: WittVec) -> WittVec:
    return a * b


def frobenius(w: WittVec) -> WittVec:
    return w.frobenius()


def verschiebung(w: WittVec) -> WittVec:
    return w.verschiebung()


def restrict(w: WittVec) -> WittVec:
    return w.restrict()


def teichmuller(f: MultiPoly, L: int) -> WittVec:
    return WittVec.teichmuller(f, L)


def vmul(a: WittVec, j: int, b: WittVec) -> WittVec:
    """The semilinear product sending (a, V^j(b)) to V^j(a*b).

    b is passed as the unshifted content of the V^j-element; only its bottom
    L-j coordinates matter.
    """
    a._check(b)
    if j == 0:
        return a * b
    if j >= a.L:
        return WittVec.zero(a.p, a.n, a.L)
    prod = a.restrict(j) * b.restrict(j)
    z = MultiPoly.zero(Fp(a.p), a.n)
    return WittVec(a.p, a.n, (z,) * j + prod.coords)


def map_along(images, w: WittVec) -> WittVec:
    """Functoriality along a polynomial ring map given by variable images."""
    return WittVec(w.p, images[0].n, [c.substitute(images) for c in w.coords])


# -- universal polynomial oracle ---------------------------------------------


@lru_cache(maxsize=None)
def universal_witt_polynomials(p: int, L: int):
    """Universal sum and product coordinate polynomials over F_p.

    Returned as two lists of polynomials in 2L variables (x_0..x_(L-1),
    y_0..y_(L-1)); computed by running the ghost peel on generic vectors.
    Exactness mod p of coordinate k needs precision p^(L-k) >= p, which the
    precision-tracked peel provides.
    """
    ring = Zmod(p, L)
    nv = 2 * L
    xs = [MultiPoly.variable(ring, nv, i) for i in range(L)]
    ys = [MultiPoly.variable(ring, nv, L + i) for i in range(L)]

    def generic_ghost(vec):
        out = []
        for s in range(L):
            acc = MultiPoly.zero(ring, nv)
            for i in range(s + 1):
                acc = acc + (vec[i] ** (p ** (s - i))).scale(p**i)
            out.append(acc)
        return out

    gx, gy = generic_ghost(xs), generic_ghost(ys)
    sums = _peel([a + b for a, b in zip(gx, gy)], p, L)
    prods = _peel([a * b for a, b in zip(gx, gy)], p, L)
    return sums, prods


def witt_op_universal(a: WittVec, b: WittVec, which: str) -> WittVec:
    """Witt sum/product evaluated through the universal polynomials."""
    a._check(b)
    sums, prods = universal_witt_polynomials(a.p, a.L)
    polys = sums if which == "add" else prods
    images = list(a.coords) + list(b.coords)
    return WittVec(a.p, a.n, [q.substitute(images) for q in polys])


# -- text format ----------------------------------------------------------------
# witt vector := '[' poly (';' poly)* ']'


def format_witt(w: WittVec) -> str:
    from .poly import format_poly

    return "[" + "; ".join(format_poly(c) for c in w.coords) + "]"


def parse_witt(text: str, p: int, n: int, L: int = None) -> WittVec:
    from .poly import parse_poly

    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("witt vector syntax is [f1; f2; ...]")
    parts = text[1:-1].split(";")
    if L is not None and len(parts) != L:
        raise ValueError(f"expected {L} coordinates, got {len(parts)}")
    return WittVec(p, n, [parse_poly(s.strip() or "0", Fp(p), n) for s in parts])
