"""Sparse multivariate polynomials over Z and Z/p^e with lex monomial order.

Coefficient rings are runtime parameters of values; mixing rings in one
operation is an error, never a coercion. Lex order (leftmost variable most
significant) is the one canonical order used everywhere.
"""

from __future__ import annotations

import math
import re
from functools import lru_cache

from .exactnum import p_valuation


class NotAPthPower(ValueError):
    """Raised when a polynomial has no p-th root."""


class IntRing:
    """The ring of exact integers."""

    char = 0

    def normalize(self, c: int) -> int:
        return c

    def __repr__(self):
        return "ZZ"

    def __eq__(self, other):
        return isinstance(other, IntRing)

    def __hash__(self):
        return hash("IntRing")


class ModRing:
    """The ring Z/p^e, coefficients stored as ints in [0, p^e)."""

    def __init__(self, p: int, e: int):
        if e < 1:
            raise ValueError("need e >= 1")
        self.p = p
        self.e = e
        self.modulus = p**e

    def normalize(self, c: int) -> int:
        return c % self.modulus

    def __repr__(self):
        return f"Z/{self.p}^{self.e}" if self.e > 1 else f"F{self.p}"

    def __eq__(self, other):
        return isinstance(other, ModRing) and (self.p, self.e) == (other.p, other.e)

    def __hash__(self):
        return hash(("ModRing", self.p, self.e))


ZZ = IntRing()


@lru_cache(maxsize=None)
def Zmod(p: int, e: int) -> ModRing:
    return ModRing(p, e)


def Fp(p: int) -> ModRing:
    return Zmod(p, 1)


class MultiPoly:
    """Immutable sparse polynomial: a map from exponent tuples to nonzero
    coefficients, tagged with its coefficient ring and variable count."""

    __slots__ = ("ring", "n", "terms")

    def __init__(self, ring, n: int, terms=None):
        self.ring = ring
        self.n = n
        clean = {}
        if terms:
            for expv, c in terms.items():
                c = ring.normalize(c)
                if c:
                    if len(expv) != n:
                        raise ValueError(f"exponent vector {expv} has wrong length")
                    clean[expv] = c
        self.terms = clean

    @classmethod
    def _make(cls, ring, n, terms):
        """Trusted constructor: terms must already be normalized and clean."""
        self = object.__new__(cls)
        self.ring = ring
        self.n = n
        self.terms = terms
        return self

    # -- construction -----------------------------------------------------
    @staticmethod
    def zero(ring, n):
        return MultiPoly(ring, n)

    @staticmethod
    def constant(ring, n, c):
        return MultiPoly(ring, n, {(0,) * n: c})

    @staticmethod
    def one(ring, n):
        return MultiPoly.constant(ring, n, 1)

    @staticmethod
    def variable(ring, n, i, exponent=1):
        ev = [0] * n
        ev[i] = exponent
        return MultiPoly(ring, n, {tuple(ev): 1})

    @staticmethod
    def monomial(ring, n, expv, c=1):
        return MultiPoly(ring, n, {tuple(expv): c})

    # -- basic queries ----------------------------------------------------
    def is_zero(self):
        return not self.terms

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def sorted_terms(self):
        """Terms in descending lex order of exponent vectors."""
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def constant_term(self):
        return self.terms.get((0,) * self.n, 0)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.ring == other.ring
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, self.n, frozenset(self.terms.items())))

    def _check(self, other):
        if not isinstance(other, MultiPoly):
            raise TypeError(f"expected MultiPoly, got {type(other)!r}")
        if self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
        if self.n != other.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        self._check(other)
        norm = self.ring.normalize
        terms = dict(self.terms)
        get = terms.get
        for ev, c in other.terms.items():
            v = norm(get(ev, 0) + c)
            if v:
                terms[ev] = v
            elif ev in terms:
                del terms[ev]
        return MultiPoly._make(self.ring, self.n, terms)

    def __neg__(self):
        norm = self.ring.normalize
        return MultiPoly._make(
            self.ring, self.n, {ev: norm(-c) for ev, c in self.terms.items()}
        )

    def __sub__(self, other):
        self._check(other)
        norm = self.ring.normalize
        terms = dict(self.terms)
        get = terms.get
        for ev, c in other.terms.items():
            v = norm(get(ev, 0) - c)
            if v:
                terms[ev] = v
            elif ev in terms:
                del terms[ev]
        return MultiPoly._make(self.ring, self.n, terms)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        n = self.n
        terms = {}
        get = terms.get
        if n == 1:
            for (e1,), c1 in a.items():
                for (e2,), c2 in b.items():
                    ev = (e1 + e2,)
                    terms[ev] = get(ev, 0) + c1 * c2
        elif n == 2:
            for (e1, f1), c1 in a.items():
                for (e2, f2), c2 in b.items():
                    ev = (e1 + e2, f1 + f2)
                    terms[ev] = get(ev, 0) + c1 * c2
        else:
            for ev1, c1 in a.items():
                for ev2, c2 in b.items():
                    ev = tuple(x + y for x, y in zip(ev1, ev2))
                    terms[ev] = get(ev, 0) + c1 * c2
        norm = self.ring.normalize
        out = {}
        for ev, c in terms.items():
            c = norm(c)
            if c:
                out[ev] = c
        return MultiPoly._make(self.ring, self.n, out)

    __rmul__ = __mul__

    def scale(self, c: int):
        norm = self.ring.normalize
        out = {}
        for ev, v in self.terms.items():
            v = norm(v * c)
            if v:
                out[ev] = v
        return MultiPoly._make(self.ring, self.n, out)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.one(self.ring, self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- ring moves -------------------------------------------------------
    def map_coefficients(self, fn, ring=None):
        ring = ring or self.ring
        norm = ring.normalize
        out = {}
        for ev, c in self.terms.items():
            c = norm(fn(c))
            if c:
                out[ev] = c
        return MultiPoly._make(ring, self.n, out)

    def reduce_to(self, ring: ModRing):
        """Reduce coefficients into a smaller modulus (or from ZZ)."""
        return self.map_coefficients(lambda c: c, ring)

    def lift_to(self, ring, style: str = "standard"):
        """Lift coefficients to ZZ or to a larger modulus.

        'standard' lifts Z/p^e residues to {0, ..., p^e - 1}; 'balanced'
        recenters them into (-p^e/2, p^e/2].
        """
        if not isinstance(self.ring, ModRing):
            raise ValueError("lift_to expects a modular source ring")
        m = self.ring.modulus

        def lift(c):
            if style == "balanced" and c > m // 2:
                return c - m
            return c

        return self.map_coefficients(lift, ring)

    def divexact_p(self, s: int):
        """Exact division by p^s. Over Z/p^e the result lives in Z/p^(e-s)."""
        if s == 0:
            return self
        if not isinstance(self.ring, ModRing):
            raise ValueError("divexact_p is only defined over modular rings")
        p, e = self.ring.p, self.ring.e
        if s >= e:
            raise ValueError("cannot divide away the whole modulus")
        q = p**s
        terms = {}
        for ev, c in self.terms.items():
            if c % q:
                raise ValueError(f"coefficient {c} not divisible by {p}^{s}")
            terms[ev] = c // q
        return MultiPoly(Zmod(p, e - s), self.n, terms)

    # -- structure maps ---------------------------------------------------
    def frobenius_substitute(self, p: int):
        """Substitute T_i -> T_i^p; coefficients unchanged."""
        return MultiPoly(
            self.ring, self.n, {tuple(e * p for e in ev): c for ev, c in self.terms.items()}
        )

    def pth_root(self):
        """Over F_p: the unique g with g^p = self, if it exists."""
        ring = self.ring
        if not (isinstance(ring, ModRing) and ring.e == 1):
            raise ValueError("pth_root is defined over F_p only")
        p = ring.p
        terms = {}
        for ev, c in self.terms.items():
            if any(e % p for e in ev):
                raise NotAPthPower(f"exponent vector {ev} not divisible by {p}")
            # Frobenius fixes F_p, so coefficients are unchanged.
            terms[tuple(e // p for e in ev)] = c
        return MultiPoly(ring, self.n, terms)

    def divided_power(self, l: int, m: int):
        """Apply the divided-power operator of order m in variable l:
        T_l^j -> C(j, m) T_l^(j-m), other variables untouched."""
        if m == 0:
            return self
        if not (0 <= l < self.n):
            raise ValueError(f"variable index {l} out of range")
        terms = {}
        for ev, c in self.terms.items():
            j = ev[l]
            if j < m:
                continue
            new_ev = list(ev)
            new_ev[l] = j - m
            new_ev = tuple(new_ev)
            terms[new_ev] = terms.get(new_ev, 0) + c * math.comb(j, m)
        return MultiPoly(self.ring, self.n, terms)

    def substitute(self, images):
        """Evaluate at images[i] in place of T_i (all in one common ring)."""
        if len(images) != self.n:
            raise ValueError("wrong number of images")
        if self.is_zero():
            target = images[0] if images else None
            if target is not None:
                return MultiPoly.zero(target.ring, target.n)
            return self
        target_ring = images[0].ring if images else self.ring
        target_n = images[0].n if images else self.n
        out = MultiPoly.zero(target_ring, target_n)
        cache = {}
        for ev, c in self.terms.items():
            term = MultiPoly.constant(target_ring, target_n, c)
            for i, e in enumerate(ev):
                if e:
                    key = (i, e)
                    if key not in cache:
                        cache[key] = images[i] ** e
                    term = term * cache[key]
            out = out + term
        return out

    def eval_ints(self, point):
        """Evaluate at an integer point (for small cross-checks)."""
        total = 0
        for ev, c in self.terms.items():
            v = c
            for x, e in zip(point, ev):
                v *= x**e
            total += v
        return self.ring.normalize(total)

    def min_coeff_valuation(self):
        """Smallest p-adic valuation among coefficients (modular rings)."""
        ring = self.ring
        if not isinstance(ring, ModRing):
            raise ValueError("valuation needs a modular ring")
        if self.is_zero():
            return ring.e
        return min(min(p_valuation(c, ring.p), ring.e) for c in self.terms.values())

    def __repr__(self):
        return format_poly(self)


class DiffOpOnA:
    """A differential operator sum(a_I * d^[I]) with polynomial coefficients
    and divided-power monomials d^[I] = d_1^[i_1] ... d_n^[i_n]."""

    __slots__ = ("ring", "n", "parts")

    def __init__(self, ring, n, parts):
        self.ring = ring
        self.n = n
        merged = {}
        for coeff, index in parts:
            if coeff.ring != ring or coeff.n != n:
                raise ValueError("coefficient ring/vars mismatch in operator")
            index = tuple(index)
            merged[index] = merged[index] + coeff if index in merged else coeff
        self.parts = tuple((c, i) for i, c in sorted(merged.items()) if not c.is_zero())

    @staticmethod
    def identity(ring, n):
        return DiffOpOnA(ring, n, [(MultiPoly.one(ring, n), (0,) * n)])

    @staticmethod
    def zero(ring, n):
        return DiffOpOnA(ring, n, [])

    def is_zero(self):
        return not self.parts

    def __add__(self, other):
        return DiffOpOnA(self.ring, self.n, list(self.parts) + list(other.parts))

    def apply(self, f: MultiPoly) -> MultiPoly:
        if f.ring != self.ring or f.n != self.n:
            raise ValueError("operator/operand ring mismatch")
        out = MultiPoly.zero(self.ring, self.n)
        for coeff, index in self.parts:
            g = f
            for l, m in enumerate(index):
                if m:
                    g = g.divided_power(l, m)
                if g.is_zero():
                    break
            if not g.is_zero():
                out = out + coeff * g
        return out

    def __eq__(self, other):
        return (
            isinstance(other, DiffOpOnA)
            and self.ring == other.ring
            and self.n == other.n
            and self.parts == other.parts
        )

    def __repr__(self):
        if not self.parts:
            return "0"
        bits = []
        for coeff, index in self.parts:
            dp = "*".join(f"d{l+1}^[{m}]" for l, m in enumerate(index) if m)
            bits.append(f"({coeff}){'*' + dp if dp else ''}")
        return " + ".join(bits)


def divided_power_apply(l: int, m: int, f: MultiPoly) -> MultiPoly:
    return f.divided_power(l, m)


def diffop_apply(op: DiffOpOnA, f: MultiPoly) -> MultiPoly:
    return op.apply(f)


# -- text grammar ---------------------------------------------------------
# polynomial := term ('+'|'-' term)* ; term := coeff ('*' var '^' exp)* ;
# var := 'T' index (bare 'T' means T1). Example: 3*T1^2*T2 + 1


def format_poly(f: MultiPoly) -> str:
    if f.is_zero():
        return "0"
    bits = []
    for ev, c in f.sorted_terms():
        vars_part = "*".join(
            f"T{i+1}^{e}" if e > 1 else f"T{i+1}" for i, e in enumerate(ev) if e
        )
        if not vars_part:
            bits.append(str(c))
        elif c == 1:
            bits.append(vars_part)
        else:
            bits.append(f"{c}*{vars_part}")
    return " + ".join(bits)


class PolyParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN = re.compile(r"\s*(\d+|T\d*|\^|\*|\+|-)")


def parse_poly(text: str, ring, n: int) -> MultiPoly:
    """Parse the polynomial grammar above into a MultiPoly."""
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise PolyParseError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()

    result = MultiPoly.zero(ring, n)
    i = 0
    sign = 1
    if i < len(tokens) and tokens[i][0] in "+-":
        sign = -1 if tokens[i][0] == "-" else 1
        i += 1
    while i < len(tokens):
        coeff = 1
        expv = [0] * n
        saw_factor = False
        while True:
            tok, tpos = tokens[i] if i < len(tokens) else (None, len(text))
            if tok is None:
                break
            if tok.isdigit():
                coeff *= int(tok)
                saw_factor = True
                i += 1
            elif tok.startswith("T"):
                idx = int(tok[1:]) - 1 if len(tok) > 1 else 0
                if not (0 <= idx < n):
                    raise PolyParseError(f"variable {tok} out of range for {n} vars", tpos)
                exp = 1
                i += 1
                if i < len(tokens) and tokens[i][0] == "^":
                    i += 1
                    if i >= len(tokens) or not tokens[i][0].isdigit():
                        raise PolyParseError("expected exponent after '^'", tpos)
                    exp = int(tokens[i][0])
                    i += 1
                expv[idx] += exp
                saw_factor = True
            else:
                break
            if i < len(tokens) and tokens[i][0] == "*":
                i += 1
                continue
            break
        if not saw_factor:
            raise PolyParseError("expected a term", tokens[i][1] if i < len(tokens) else len(text))
        result = result + MultiPoly.monomial(ring, n, tuple(expv), sign * coeff)
        if i < len(tokens):
            tok, tpos = tokens[i]
            if tok == "+":
                sign = 1
            elif tok == "-":
                sign = -1
            else:
                raise PolyParseError(f"expected '+' or '-', got {tok!r}", tpos)
            i += 1
            if i >= len(tokens):
                raise PolyParseError("dangling sign", tpos)
    return result
