"""Deterministic property-suite runner over parameter grids.

Each suite is a list of named checks; a check returns (passed, payload)
where a failing payload always carries the inputs in the text grammars plus
a command line that replays the enclosing suite deterministically. Reports
serialize to versioned JSON and are byte-stable for a fixed config.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field

from . import exactnum
from .embed import check_filtration_inclusions, decode, embed, in_image
from .frobphi import (
    ConvergenceFailure,
    FrobLift,
    PhiMap,
    bimodule_factorization_check,
    gamma_approx,
    lift_difference_order_check,
    projector_normal_form,
    projector_semantic,
    residue_class_projector,
    stress_perturbation,
)
from .hslift import (
    HSDerivation,
    canonical_lift_embed,
    canonical_lift_orbit,
    check_frobenius_intertwine,
    check_restriction_descent,
)
from .poly import Fp, MultiPoly, Zmod, format_poly
from .wdo import (
    WDONormalForm,
    WDOTerm,
    WorkingContext,
    basic_operator,
    check_leibniz_mod_p,
    commutator_expansion,
    compose,
    evaluate,
    frobenius_conjugate,
    iterate_factorial_unit,
    reconstruct,
    _probe_embed,
)
from .witt import WittVec, format_witt, witt_op_universal, witt_scalar


SUITE_NAMES = ("ghost-oracle", "canonical-lift", "identities", "operators", "projectors", "delta")


@dataclass(frozen=True)
class SuiteConfig:
    primes: tuple = (2, 3)
    max_len: int = 3
    max_deg: int = 3
    max_vars: int = 2
    samples: int = 25
    seed: int = 0

    def __post_init__(self):
        if min(self.max_len, self.max_deg, self.max_vars, self.samples) < 1:
            raise ValueError("all suite bounds must be positive")

    def as_dict(self):
        return {
            "primes": list(self.primes),
            "max_len": self.max_len,
            "max_deg": self.max_deg,
            "max_vars": self.max_vars,
            "samples": self.samples,
            "seed": self.seed,
        }

    def replay_command(self, suite):
        return (
            f"wittops verify {suite} --p {','.join(map(str, self.primes))} "
            f"--max-len {self.max_len} --max-deg {self.max_deg} "
            f"--max-vars {self.max_vars} --samples {self.samples} --seed {self.seed}"
        )


@dataclass
class CheckResult:
    name: str
    params: dict
    passed: bool
    seconds: float
    counterexample: dict | None = None

    def as_dict(self):
        return {
            "name": self.name,
            "params": self.params,
            "pass": self.passed,
            "seconds": round(self.seconds, 4),
            "counterexample": self.counterexample,
        }


@dataclass
class SuiteReport:
    suite: str
    config: SuiteConfig
    results: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def as_dict(self):
        return {
            "schema": 1,
            "suite": self.suite,
            "config": self.config.as_dict(),
            "pass": self.passed,
            "results": [r.as_dict() for r in sorted(self.results, key=lambda r: (r.name, sorted(r.params.items())))],
        }

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def summary_lines(self):
        for r in sorted(self.results, key=lambda r: (r.name, sorted(r.params.items()))):
            status = "pass" if r.passed else "FAIL"
            yield f"[{status}] {r.name} {r.params} ({r.seconds:.2f}s)"


# -- samplers -----------------------------------------------------------------


def sample_shape(p, L, n):
    """Degree/term budget per grid point, keeping the exact arithmetic fast
    where coordinate blowup is worst. Degrees never exceed 4."""
    if p >= 5 and L >= 4:
        return (1 if n >= 2 else 4, 1)
    if p >= 5 and L == 3:
        return (2 if n >= 2 else 4, 2)
    if p == 3 and L >= 4:
        return (2 if n >= 2 else 3, 2)
    return (4, 3)


def random_poly(rng, p, n, deg, terms, allow_zero=True):
    d = {}
    for _ in range(terms):
        ev = [0] * n
        left = deg
        for v in range(n):
            e = rng.randrange(left + 1)
            ev[v] = e
            left -= e
        d[tuple(ev)] = rng.randrange(1, p)
    f = MultiPoly(Fp(p), n, d)
    if not allow_zero and f.is_zero():
        return MultiPoly.one(Fp(p), n)
    return f


def random_witt(rng, p, n, L, deg, terms, zero_prob=0.2):
    coords = []
    for _ in range(L):
        if rng.random() < zero_prob:
            coords.append(MultiPoly.zero(Fp(p), n))
        else:
            coords.append(random_poly(rng, p, n, deg, terms))
    return WittVec(p, n, coords)


def _rng_for(config, tag):
    return random.Random(f"{config.seed}:{tag}")


def _ce(config, suite, **payload):
    payload["replay"] = config.replay_command(suite)
    return payload


# -- ghost oracle ---------------------------------------------------------------


def _ghost_matches(out, parts, op):
    from .witt import _ghost_mod

    p, L = out.p, out.L
    ga = _ghost_mod(parts[0].coords, p, L)
    gb = _ghost_mod(parts[1].coords, p, L)
    go = _ghost_mod(out.coords, p, L)
    for s in range(L):
        want = ga[s] + gb[s] if op == "add" else ga[s] * gb[s]
        diff = go[s] - want
        if any(c % p ** (s + 1) for c in diff.terms.values()):
            return False
    return True


def check_ghost_oracle(config, suite="ghost-oracle"):
    results = []
    for p in config.primes:
        for L in range(1, config.max_len + 1):
            for n in range(1, config.max_vars + 1):
                tag = f"ghost:{p}:{L}:{n}"
                rng = _rng_for(config, tag)
                deg, terms = sample_shape(p, L, n)
                deg = min(deg, config.max_deg)
                t0 = time.time()
                bad = None
                for k in range(config.samples):
                    a = random_witt(rng, p, n, L, deg, terms)
                    b = random_witt(rng, p, n, L, deg, terms)
                    s, m = a + b, a * b
                    if not (_ghost_matches(s, (a, b), "add") and _ghost_matches(m, (a, b), "mul")):
                        bad = (a, b, "ghost mismatch")
                        break
                    if L <= 3:
                        if witt_op_universal(a, b, "add") != s or witt_op_universal(a, b, "mul") != m:
                            bad = (a, b, "universal oracle mismatch")
                            break
                    if k < 5:
                        if a.verschiebung().frobenius() != witt_scalar(p, p, n, L) * a:
                            bad = (a, b, "FV != p")
                            break
                        if (a + b) + m != a + (b + m) or a * (b + m) != a * b + a * m:
                            bad = (a, b, "ring axiom failure")
                            break
                ce = None
                if bad:
                    ce = _ce(config, suite, p=p, L=L, n=n, kind=bad[2],
                             a=format_witt(bad[0]), b=format_witt(bad[1]),
                             cli=f'wittops witt add --p {p} --len {L} --vars {n} "{format_witt(bad[0])}" "{format_witt(bad[1])}"')
                results.append(CheckResult("ghost-oracle", {"p": p, "L": L, "n": n},
                                           bad is None, time.time() - t0, ce))
    return results


# -- canonical lift ---------------------------------------------------------------


def check_canonical_lift(config, suite="canonical-lift", max_level=1):
    results = []
    for p in config.primes:
        if p > 3:
            continue
        for L in range(2, min(config.max_len, 3) + 1):
            for n in range(1, min(config.max_vars, 2) + 1):
                tag = f"canon:{p}:{L}:{n}"
                rng = _rng_for(config, tag)
                t0 = time.time()
                bad = None
                D = HSDerivation.coordinate(p, n, 0)
                js = list(range(1, p ** (L - 1 + max_level) + 1))
                per_j = max(1, config.samples // len(js))
                for j in js:
                    for _ in range(per_j):
                        w = random_witt(rng, p, n, L, min(3, config.max_deg), 2)
                        a = canonical_lift_orbit(D, j, w)
                        b = canonical_lift_embed(D, j, w)
                        c = canonical_lift_embed(D, j, w, style="balanced")
                        if not (a == b == c):
                            bad = (j, w)
                            break
                    if bad:
                        break
                ce = None
                if bad:
                    ce = _ce(config, suite, p=p, L=L, n=n, j=bad[0], w=format_witt(bad[1]),
                             cli=f'wittops hs lift --p {p} --len {L} --vars {n} --j {bad[0]} --method orbit "{format_witt(bad[1])}"')
                results.append(CheckResult("canonical-lift-dual-oracle", {"p": p, "L": L, "n": n},
                                           bad is None, time.time() - t0, ce))
    # pinned instances
    t0 = time.time()
    F2 = Fp(2)
    T = MultiPoly.variable(F2, 1, 0)
    zero = MultiPoly.zero(F2, 1)
    f = T**3 + T
    D1 = HSDerivation.coordinate(2, 1, 0, length=1)
    ok1 = canonical_lift_orbit(D1, 1, WittVec(2, 1, [f, zero])) == WittVec(2, 1, [zero, f * f.divided_power(0, 1)])
    D2 = HSDerivation.coordinate(2, 1, 0, length=2)
    ok2 = canonical_lift_orbit(D2, 2, WittVec(2, 1, [T**2, zero])) == WittVec(2, 1, [zero, T**2])
    results.append(CheckResult("canonical-lift-pinned", {"p": 2}, ok1 and ok2, time.time() - t0,
                               None if ok1 and ok2 else _ce(config, suite, kind="pinned instance failed")))
    # structural identities ride along with the same grid
    for p in config.primes:
        if p > 3:
            continue
        for L in range(2, min(config.max_len, 3) + 1):
            tag = f"struct:{p}:{L}"
            rng = _rng_for(config, tag)
            t0 = time.time()
            D = HSDerivation.coordinate(p, 1, 0)
            samples = [random_witt(rng, p, 1, L, min(3, config.max_deg), 2) for _ in range(max(5, config.samples // 4))]
            ok = True
            js = [1, p, p * p, p + 1]
            for j in js:
                ok = ok and check_frobenius_intertwine(D, j, samples)
                ok = ok and check_restriction_descent(D, j, samples)
                if not ok:
                    break
            ce = None if ok else _ce(config, suite, p=p, L=L, kind="structural identity failed", j=j)
            results.append(CheckResult("hs-structural-identities", {"p": p, "L": L}, ok, time.time() - t0, ce))
    return results


# -- congruence identities ----------------------------------------------------


def _partitions_div_p(total, p, max_part):
    """Partitions of `total` into parts divisible by p (weakly decreasing)."""
    if total == 0:
        yield ()
        return
    for part in range(min(total, max_part) - min(total, max_part) % p, 0, -p):
        for rest in _partitions_div_p(total - part, p, part):
            yield (part,) + rest


def check_identities(config, suite="identities", l_max=8, r_max=6, mult_r_max=4):
    results = []
    t0 = time.time()
    bad = None
    for p in config.primes:
        for r in range(1, r_max + 1):
            for j in range(1, r + 1):
                for l in range(0, l_max + 1):
                    if not exactnum.binomial_shift_congruence(l, r, j, p):
                        bad = {"p": p, "l": l, "r": r, "j": j}
                        break
    results.append(CheckResult("binomial-shift-congruence", {"l_max": l_max, "r_max": r_max},
                               bad is None, time.time() - t0,
                               None if bad is None else _ce(config, suite, **bad)))
    t0 = time.time()
    bad = None
    for p in config.primes:
        if p > 3:
            continue
        for r in range(1, mult_r_max + 1):
            for l in range(0, r):
                for counts in _partitions_div_p(p ** (r - l), p, p ** (r - l)):
                    if not exactnum.multinomial_reduction_congruence(l, r, counts, p):
                        bad = {"p": p, "l": l, "r": r, "counts": list(counts)}
                        break
    results.append(CheckResult("multinomial-reduction", {"r_max": mult_r_max},
                               bad is None, time.time() - t0,
                               None if bad is None else _ce(config, suite, **bad)))
    # filtration comparison and the mod-p derivation property
    for p in config.primes:
        tag = f"filt:{p}"
        rng = _rng_for(config, tag)
        t0 = time.time()
        ok, ce_data = True, None
        for m in range(1, 4):
            for k in range(1, 4):
                res, witness = check_filtration_inclusions(
                    p, 1, m, k, max(5, config.samples // 5), rng, L=min(m + k, 5)
                )
                if not res:
                    ok, ce_data = False, {"m": m, "k": k, "witness": repr(witness)}
                    break
        results.append(CheckResult("two-filtrations", {"p": p}, ok, time.time() - t0,
                                   None if ok else _ce(config, suite, p=p, **ce_data)))
    for p in config.primes:
        if p > 3:
            continue
        tag = f"leibniz:{p}"
        rng = _rng_for(config, tag)
        t0 = time.time()
        L = min(config.max_len, 3)
        # the Leibniz probe multiplies two samples, so give the context the
        # doubled degree headroom
        ctx = WorkingContext(p, 1, L, 4, 0)
        Q = basic_operator(ctx, 0, 1, 1)
        pairs = [
            (random_witt(rng, p, 1, L, 2, 2), random_witt(rng, p, 1, L, 2, 2))
            for _ in range(max(10, config.samples // 2))
        ]
        ok = check_leibniz_mod_p(Q, pairs)
        results.append(CheckResult("derivation-mod-p", {"p": p, "L": L}, ok, time.time() - t0,
                                   None if ok else _ce(config, suite, p=p, L=L)))
    return results


# -- operator algebra -----------------------------------------------------------


def random_normal_form(rng, ctx, nterms=3, alpha_deg=1, alpha_terms=1):
    p = ctx.p
    terms = {}
    tries = 0
    while len(terms) < nterms and tries < 60:
        tries += 1
        r = rng.randrange(0, ctx.L)
        if r == 0:
            J = tuple(rng.randrange(0, p**ctx.m) for _ in range(ctx.n))
            I = tuple(rng.randrange(0, 3) for _ in range(ctx.n))
        else:
            J = [0] * ctx.n
            J[rng.randrange(ctx.n)] = rng.choice([x for x in range(1, p**r) if x % p])
            for v in range(ctx.n):
                if J[v] == 0 and rng.random() < 0.3:
                    J[v] = rng.randrange(0, p**r)
            if not any(j % p for j in J if j):
                continue
            J = tuple(J)
            I = tuple(rng.randrange(0, 2) for _ in range(ctx.n))
        f_I = sum(exactnum.factorial_valuation(i, p) for i in I)
        if r + f_I > ctx.r_top:
            continue
        shift = p ** (ctx.r_top - r) if r else p**ctx.r_top
        if sum(j * shift + i * p ** (ctx.r_top + ctx.m) for j, i in zip(J, I)) > ctx.ambient_cap:
            continue
        alpha = random_witt(rng, p, ctx.n, ctx.L, alpha_deg, alpha_terms, zero_prob=0.3)
        if alpha.is_zero():
            continue
        terms[(r, J, I)] = WDOTerm(r, J, I, alpha)
    return WDONormalForm(ctx, list(terms.values()))


def check_operators(config, suite="operators"):
    results = []
    contexts = []
    for p in config.primes:
        if p > 3:
            continue
        for L in range(2, min(config.max_len, 3) + 1):
            contexts.append(WorkingContext(p, 1, L, min(config.max_deg, 6), 0))
        contexts.append(WorkingContext(p, 2, 2, min(config.max_deg, 3), 0))
        contexts.append(WorkingContext(p, 1, min(config.max_len, 3), min(config.max_deg, 4), 1))
    for ctx in contexts:
        tag = f"op:{ctx.p}:{ctx.n}:{ctx.L}:{ctx.m}"
        rng = _rng_for(config, tag)
        t0 = time.time()
        bad = None
        for _ in range(max(5, config.samples // 3)):
            Q = random_normal_form(rng, ctx)
            if reconstruct(ctx, evaluate(Q)) != Q:
                bad = {"kind": "reconstruct round trip", "terms": repr(Q.terms)}
                break
        results.append(CheckResult("reconstruct-roundtrip",
                                   {"p": ctx.p, "n": ctx.n, "L": ctx.L, "m": ctx.m},
                                   bad is None, time.time() - t0,
                                   None if bad is None else _ce(config, suite, **bad)))
    for p in config.primes:
        if p > 3:
            continue
        t0 = time.time()
        bad = None
        for r in range(1, 3):
            for i in range(1, p * p + 1):
                # resolving u mod p needs one digit past the operator's
                # V-depth plus the factorial valuation
                depth = max(0, r - exactnum.p_valuation(i, p))
                L_need = max(2, depth + exactnum.factorial_valuation(i, p) + 1)
                D_need = max(1, -(-i // p**r))
                ctx = WorkingContext(p, 1, L_need, D_need, 0)
                u, ok = iterate_factorial_unit(ctx, 0, i, r)
                if not ok:
                    bad = {"i": i, "r": r, "u": u.value}
                    break
            if bad:
                break
        results.append(CheckResult("iterate-factorial-unit", {"p": p}, bad is None,
                                   time.time() - t0, None if bad is None else _ce(config, suite, p=p, **bad)))
        # commutator symbolic path vs probe path; conjugation index shift
        t0 = time.time()
        ctx = WorkingContext(p, 1, min(config.max_len, 3), min(config.max_deg, 4), 0)
        rng = _rng_for(config, f"comm:{p}")
        bad = None
        for j, r in [(1, 1), (1, ctx.r_top), (p, ctx.r_top)] if ctx.r_top >= 2 else [(1, 1)]:
            alpha = random_witt(rng, p, 1, ctx.L, 1, 1, zero_prob=0.0)
            mult = WDONormalForm.multiplication(ctx, alpha)
            dop = basic_operator(ctx, 0, j, r)
            table = {
                X: (dop.apply_embedded(mult.apply_embedded(_probe_embed(ctx, X)))
                    - mult.apply_embedded(dop.apply_embedded(_probe_embed(ctx, X))))
                for X in ctx.probe_exponents()
            }
            if reconstruct(ctx, table) != commutator_expansion(ctx, 0, j, r, alpha):
                bad = {"kind": "commutator dual path", "j": j, "r": r, "alpha": format_witt(alpha)}
                break
        if bad is None:
            rng2 = _rng_for(config, f"conj:{p}")
            samples = [random_witt(rng2, p, 1, ctx.L, 1, 1) for _ in range(4)]
            for r in range(1, ctx.r_top + 1):
                # indices whose conjugate stays representable at this
                # truncation: j below p^(r-1), or integer-index results
                js = [x for x in range(1, max(2, p ** (r - 1))) if x % p][:2]
                for j in js:
                    conj = frobenius_conjugate(basic_operator(ctx, 0, j, r), samples)
                    want = basic_operator(ctx.at_level(1), 0, j, r - 1)
                    if conj != want:
                        bad = {"kind": "conjugation index shift", "j": j, "r": r}
                        break
        results.append(CheckResult("commutator-and-conjugation", {"p": p}, bad is None,
                                   time.time() - t0, None if bad is None else _ce(config, suite, p=p, **bad)))
    return results


# -- projectors -----------------------------------------------------------------


def check_projectors(config, suite="projectors"):
    results = []
    for p in config.primes:
        if p > 3:
            continue
        for n in range(1, min(config.max_vars, 2) + 1):
            for L in range(2, min(config.max_len, 3) + 1):
                if n == 2 and L == 3 and p == 3:
                    continue  # probe grid too large for a quick suite pass
                t0 = time.time()
                ctx = WorkingContext(p, n, L, min(config.max_deg, 4 if n == 1 else 2), 0)
                bad = None
                sem = projector_semantic(ctx)
                nf = projector_normal_form(ctx, "reconstruct")
                try:
                    nf2 = projector_normal_form(ctx, "recursion")
                    if nf2 != nf:
                        bad = {"kind": "mode disagreement"}
                except Exception as exc:
                    bad = {"kind": f"recursion mode failed: {exc}"}
                if bad is None:
                    table = nf.probe_table()
                    if table != sem.probe_table():
                        bad = {"kind": "normal form differs from semantic"}
                if bad is None and compose(nf, nf) != nf:
                    bad = {"kind": "not idempotent"}
                if bad is None:
                    from .embed import exponent_level

                    rng = _rng_for(config, f"proj:{p}:{n}:{L}")
                    phi = PhiMap(FrobLift.standard(p, L, n))
                    for _ in range(max(5, config.samples // 5)):
                        a = MultiPoly(
                            Zmod(p, L), n,
                            {tuple(rng.randrange(0, 2) for _ in range(n)): rng.randrange(1, p**L)},
                        )
                        img = phi(a)
                        if sem.apply(img) != img:
                            bad = {"kind": "image not fixed", "a": format_poly(a)}
                            break
                        w = random_witt(rng, p, n, L, 2, 2)
                        out = sem.apply(w)
                        g = embed(out)
                        if any(exponent_level(ev, p, L - 1) for ev in g.terms):
                            bad = {"kind": "projector output left the section image", "w": format_witt(w)}
                            break
                        back = MultiPoly(Zmod(p, L), n,
                                         {tuple(e // p ** (L - 1) for e in ev): c for ev, c in g.terms.items()})
                        if phi(back) != out:
                            bad = {"kind": "projector output is not a section value", "w": format_witt(w)}
                            break
                results.append(CheckResult("projector", {"p": p, "n": n, "L": L},
                                           bad is None, time.time() - t0,
                                           None if bad is None else _ce(config, suite, p=p, n=n, L=L, **bad)))
    # residue-class projectors: closed form vs expansion, partition of unity
    t0 = time.time()
    bad = None
    for p in config.primes:
        for r in (1, 2):
            f = MultiPoly(Fp(p), 1, {(k,): 1 + k % (p - 1) if p > 2 else 1 for k in range(p**r + 2)})
            total = MultiPoly.zero(Fp(p), 1)
            for i in range(p**r):
                closed, expanded = residue_class_projector(i, r, p, 1)
                if closed(f) != expanded.apply(f):
                    bad = {"kind": "closed vs expanded", "p": p, "r": r, "i": i}
                    break
                total = total + expanded.apply(f)
            if bad is None and total != f:
                bad = {"kind": "classes do not partition", "p": p, "r": r}
            if bad:
                break
    results.append(CheckResult("residue-class-projector", {}, bad is None, time.time() - t0,
                               None if bad is None else _ce(config, suite, **bad)))
    # q-polynomial factorization through the section
    for p in config.primes:
        if p > 3:
            continue
        t0 = time.time()
        bad = None
        for (n, L, J, r) in [(1, 2, (1,), 1), (1, 3, (1,), 1), (1, 3, (1,), 2), (2, 2, (1, 1), 1)]:
            if L > config.max_len + 1:
                continue
            ctx = WorkingContext(p, n, L, min(config.max_deg, 4), 0)
            ok, _ = bimodule_factorization_check(ctx, J, r)
            if not ok:
                bad = {"n": n, "L": L, "J": list(J), "r": r}
                break
        results.append(CheckResult("bimodule-factorization", {"p": p}, bad is None,
                                   time.time() - t0, None if bad is None else _ce(config, suite, p=p, **bad)))
    return results


# -- two-lift comparison ----------------------------------------------------------


def _lift_pairs(p, L, n, rng, count=3):
    ring = Zmod(p, L)
    pairs = [(FrobLift.standard(p, L, n), FrobLift(p, L, n, [MultiPoly.variable(ring, n, v % n) for v in range(n)]))]
    while len(pairs) < count:
        gs1 = [random_poly(rng, p, n, 2, 1).lift_to(ring) for _ in range(n)]
        gs2 = [random_poly(rng, p, n, 2, 1).lift_to(ring) for _ in range(n)]
        pairs.append((FrobLift(p, L, n, gs1), FrobLift(p, L, n, gs2)))
    return pairs


def check_delta(config, suite="delta"):
    results = []
    for p in config.primes:
        tag = f"delta:{p}"
        rng = _rng_for(config, tag)
        t0 = time.time()
        L = min(config.max_len, 3)
        ctx = WorkingContext(p, 1, L, min(config.max_deg, 3), 0)
        bad = None
        for idx, (l1, l2) in enumerate(_lift_pairs(p, L, 1, rng)):
            ok, witness = lift_difference_order_check(l1, l2, L - 1, ctx, rng)
            if not ok:
                bad = {"pair": idx, "witness": repr(witness), "lift1": repr(l1), "lift2": repr(l2)}
                break
        results.append(CheckResult("lift-difference-order", {"p": p, "L": L}, bad is None,
                                   time.time() - t0, None if bad is None else _ce(config, suite, p=p, **bad)))
    # approximants: convergent at p = 3, stress case at p = 2
    if 3 in config.primes:
        t0 = time.time()
        bad = None
        ctx = WorkingContext(3, 1, 3, min(config.max_deg, 3), 0)
        l1 = FrobLift.standard(3, 3, 1)
        l2 = FrobLift(3, 3, 1, [MultiPoly.variable(Zmod(3, 3), 1, 0)])
        try:
            rep = gamma_approx(l1, l2, 2, ctx)
            if not rep.converged or any(g <= 0 for gains in rep.step_gains for g in gains):
                bad = {"kind": "nonpositive gain at p=3", "gains": rep.step_gains}
        except ConvergenceFailure as exc:
            bad = {"kind": f"unexpected stagnation: {exc}"}
        results.append(CheckResult("gamma-approximants", {"p": 3, "N": 2}, bad is None,
                                   time.time() - t0, None if bad is None else _ce(config, suite, **bad)))
    if 2 in config.primes:
        t0 = time.time()
        bad = None
        ctx = WorkingContext(2, 1, 3, min(config.max_deg, 3), 0)
        l1 = FrobLift.standard(2, 3, 1)
        l2 = FrobLift(2, 3, 1, [MultiPoly.variable(Zmod(2, 3), 1, 0)])
        pert = stress_perturbation(ctx)
        try:
            gamma_approx(l1, l2, 2, ctx, level=0, perturbation=pert)
            bad = {"kind": "level-0 stress case did not stagnate"}
        except ConvergenceFailure:
            pass
        if bad is None:
            try:
                rep = gamma_approx(l1, l2, 2, ctx, level=1, perturbation=pert)
                if not rep.converged:
                    bad = {"kind": "level-1 run did not converge"}
            except ConvergenceFailure as exc:
                bad = {"kind": f"level-1 run stagnated: {exc}"}
        results.append(CheckResult("gamma-stress-p2", {"levels": [0, 1]}, bad is None,
                                   time.time() - t0, None if bad is None else _ce(config, suite, **bad)))
    return results


_SUITES = {
    "ghost-oracle": check_ghost_oracle,
    "canonical-lift": check_canonical_lift,
    "identities": check_identities,
    "operators": check_operators,
    "projectors": check_projectors,
    "delta": check_delta,
}


def run_suite(config: SuiteConfig, name: str) -> SuiteReport:
    """Execute a named suite (or 'all') deterministically."""
    if name == "all":
        report = SuiteReport("all", config)
        for sub in SUITE_NAMES:
            report.results.extend(_SUITES[sub](config, suite=sub))
        return report
    if name not in _SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)} or 'all'")
    report = SuiteReport(name, config)
    report.results.extend(_SUITES[name](config, suite=name))
    return report
