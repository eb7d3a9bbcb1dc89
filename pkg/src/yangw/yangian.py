"""Affine Yangian of sl(n): defining relations and the homomorphisms built
from them (evaluation, coproduct, the two embeddings Psi1/Psi2, the folded
coproduct Delta_l and the W-algebra map Phi).

Every map ends in operators on a tensor product of vacuum modules.  A
:class:`Realization` of Y(sl(M)) records two things: where the loop elements
E_ij t^m go (a list of ``(coeff, slot, label)``; the exponent is carried
along) and the image of each H_{i,1}.  Compositions only ever need these.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .liealg import PartitionData, gl_slot
from .modact import (
    ZERO, Mode, ModuleSpace, Node, Series, WeakResult, commutator_expr, lin,
    prod, weak_equal, weak_zero,
)
from .vertex import mode_operator
from .walgebra import build_W2, miura_space

HALF = Fraction(1, 2)


# ---------------------------------------------------------------- formal words

def _p(**kw) -> dict:
    """Polynomial in (hbar, eps): _p(c=1, h=0, e=0)."""
    return {(kw.get("h", 0), kw.get("e", 0)): Fraction(kw.get("c", 1))}


ONE = _p()


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (h1, e1), c1 in a.items():
        for (h2, e2), c2 in b.items():
            k = (h1 + h2, e1 + e2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _padd(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


def _ptext(p: dict) -> str:
    if not p:
        return "0"
    parts = []
    for (h, e), c in sorted(p.items(), reverse=True):
        mono = "*".join(x for x in (
            "hbar" if h == 1 else (f"hbar^{h}" if h else ""),
            "eps" if e == 1 else (f"eps^{e}" if e else "")) if x)
        parts.append(f"{c}" + (f"*{mono}" if mono else ""))
    return " + ".join(parts)


class F:
    """Formal noncommutative polynomial in Yangian generators with
    coefficients polynomial in hbar and eps."""

    def __init__(self, terms=None):
        self.terms: dict = dict(terms or {})

    @staticmethod
    def g(kind: str, i: int, r: int = 0) -> "F":
        return F({((kind, i, r),): dict(ONE)})

    def __add__(self, o: "F") -> "F":
        out = dict(self.terms)
        for w, p in o.terms.items():
            out[w] = _padd(out.get(w, {}), p)
        return F({w: p for w, p in out.items() if p})

    def __sub__(self, o: "F") -> "F":
        return self + o.scale(_p(c=-1))

    def __mul__(self, o: "F") -> "F":
        out: dict = {}
        for w1, p1 in self.terms.items():
            for w2, p2 in o.terms.items():
                w = w1 + w2
                out[w] = _padd(out.get(w, {}), _pmul(p1, p2))
        return F({w: p for w, p in out.items() if p})

    def scale(self, p: dict) -> "F":
        return F({w: _pmul(q, p) for w, q in self.terms.items() if _pmul(q, p)})

    def text(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for w, p in sorted(self.terms.items()):
            word = " ".join(f"{k}_{{{i},{r}}}" for k, i, r in w) or "1"
            out.append(f"({_ptext(p)}) {word}")
        return " + ".join(out)


def comm(a: F, b: F) -> F:
    return a * b - b * a


def acomm(a: F, b: F) -> F:
    return a * b + b * a


def cartan(n: int, i: int, j: int) -> int:
    i, j = i % n, j % n
    if i == j:
        return 2
    if (i - j) % n in (1, n - 1):
        return -1
    return 0


@dataclass
class RelationInstance:
    rid: str          # family, e.g. "R5"
    label: str        # instance, e.g. "(1,2,+)"
    expr: F

    @property
    def name(self) -> str:
        return f"{self.rid}{self.label}"


def relations(n: int) -> list[RelationInstance]:
    """All defining relations of Y(sl^(n)), instantiated, as expressions that
    must vanish.  Order is deterministic."""
    if n < 3:
        raise ValueError(f"the affine Yangian presentation needs n >= 3, got {n}")
    X = lambda s, i, r=0: F.g("X" + s, i, r)
    H = lambda i, r: F.g("H", i, r)
    Ht = lambda i: F.g("Ht", i, 1)
    hb = _p(h=1)
    sh = _padd(_p(e=1), _p(c=Fraction(n, 2), h=1))      # eps + n hbar / 2
    wrap = {(0, n - 1), (n - 1, 0)}
    out: list[RelationInstance] = []
    add = lambda rid, lab, e: out.append(RelationInstance(rid, lab, e))
    # R1
    hs = [(i, r) for i in range(n) for r in (0, 1)]
    for x, y in itertools.combinations(hs, 2):
        add("R1", f"({x[0]},{x[1]};{y[0]},{y[1]})", comm(H(*x), H(*y)))
    # R2, R3
    for i in range(n):
        for j in range(n):
            e = comm(X("+", i), X("-", j))
            if i == j:
                e = e - H(i, 0)
            add("R2", f"({i},{j})", e)
    for i in range(n):
        for j in range(n):
            for side in (0, 1):
                e = comm(X("+", i, 1), X("-", j)) if side == 0 else comm(X("+", i), X("-", j, 1))
                if i == j:
                    e = e - H(i, 1)
                add("R3", f"({i},{j};{side})", e)
    # R4
    for i in range(n):
        for j in range(n):
            for s in "+-":
                for r in (0, 1):
                    sg = 1 if s == "+" else -1
                    e = comm(H(i, 0), X(s, j, r)) - X(s, j, r).scale(_p(c=sg * cartan(n, i, j)))
                    add("R4", f"({i},{j},{s},{r})", e)
    # R5 to R7
    for i in range(n):
        for j in range(n):
            if (i, j) in wrap:
                continue
            for s in "+-":
                sg = 1 if s == "+" else -1
                e = comm(Ht(i), X(s, j)) - X(s, j, 1).scale(_p(c=sg * cartan(n, i, j)))
                add("R5", f"({i},{j},{s})", e)
    for s in "+-":
        sg = 1 if s == "+" else -1
        e = comm(Ht(0), X(s, n - 1)) + (X(s, n - 1, 1) + X(s, n - 1).scale(sh)).scale(_p(c=sg))
        add("R6", f"({s})", e)
    for s in "+-":
        sg = 1 if s == "+" else -1
        e = comm(Ht(n - 1), X(s, 0)) + (X(s, 0, 1) - X(s, 0).scale(sh)).scale(_p(c=sg))
        add("R7", f"({s})", e)
    # R8, R9
    for i in range(n):
        for j in range(n):
            if (i, j) in wrap:
                continue
            for s in "+-":
                sg = 1 if s == "+" else -1
                lhs = comm(X(s, i, 1), X(s, j)) - comm(X(s, i), X(s, j, 1))
                rhs = acomm(X(s, i), X(s, j)).scale(_pmul(hb, _p(c=Fraction(sg * cartan(n, i, j), 2))))
                add("R8", f"({i},{j},{s})", lhs - rhs)
    for s in "+-":
        sg = 1 if s == "+" else -1
        lhs = comm(X(s, 0, 1), X(s, n - 1)) - comm(X(s, 0), X(s, n - 1, 1))
        rhs = (acomm(X(s, 0), X(s, n - 1)).scale(_pmul(hb, _p(c=Fraction(-sg, 2))))
               + comm(X(s, 0), X(s, n - 1)).scale(sh))
        add("R9", f"({s})", lhs - rhs)
    # R10
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for s in "+-":
                e = X(s, j)
                for _ in range(1 + abs(cartan(n, i, j))):
                    e = comm(X(s, i), e)
                add("R10", f"({i},{j},{s})", e)
    return out


# ---------------------------------------------------------------- realizations

def _dpoly(dom, p: dict, eps):
    out = dom.zero
    for (h, e), c in p.items():
        out = out + dom.const(c) * dom.hbar ** h * eps ** e
    return out


def quad_series(coeff, left: list, right: list, shift: int) -> Node:
    """coeff * sum_{s>=0} L t^{-s-shift} R t^{s+shift} for mode lists L, R."""
    terms = []
    for c1, s1, l1 in left:
        for c2, s2, l2 in right:
            terms.append((coeff * c1 * c2,
                          Series(1, [(s1, l1, -1, -shift), (s2, l2, 1, shift)], 0, None)))
    return lin(terms)


def zero_prod(coeff, left: list, right: list) -> Node:
    terms = []
    for c1, s1, l1 in left:
        for c2, s2, l2 in right:
            terms.append((coeff * c1 * c2, prod(Mode(s1, l1, 0), Mode(s2, l2, 0))))
    return lin(terms)


def modes(elist: list, m: int) -> Node:
    return lin((c, Mode(s, l, m)) for c, s, l in elist)


class Realization:
    """Y(sl(M)) at parameter eps - d*hbar, realised on a module space."""

    def __init__(self, M: int, d: int, dom, emap: Callable, h1: Callable, name: str = ""):
        self.M, self.d, self.dom, self.name = M, d, dom, name
        self._emap, self._h1 = emap, h1
        self._ecache: dict = {}
        self._hcache: dict = {}

    def e(self, i: int, j: int) -> list:
        key = (i, j)
        if key not in self._ecache:
            self._ecache[key] = self._emap(i, j)
        return self._ecache[key]

    def h0(self, i: int) -> list:
        return self.e(i, i) + [(-c, s, l) for c, s, l in self.e(i + 1, i + 1)]

    def h1(self, i: int) -> Node:
        if not 1 <= i <= self.M - 1:
            raise ValueError(f"H_{{{i},1}} undefined for sl({self.M})")
        if i not in self._hcache:
            self._hcache[i] = self._h1(i)
        return self._hcache[i]

    def eps(self):
        return self.dom.eps - self.d * self.dom.hbar

    def image(self) -> "YImage":
        M = self.M
        base = {("X+", 0, 0): modes(self.e(M, 1), 1), ("X-", 0, 0): modes(self.e(1, M), -1)}
        for i in range(1, M):
            base[("X+", i, 0)] = modes(self.e(i, i + 1), 0)
            base[("X-", i, 0)] = modes(self.e(i + 1, i), 0)
            base[("H", i, 1)] = self.h1(i)
        return YImage(M, self.eps(), base, self.dom, self.name)


def ev(slot: int, M: int, dom, a, d: int = 0) -> Realization:
    """Evaluation map into one gl(M) slot with parameter a."""
    hb = dom.hbar

    def emap(i, j):
        return [(1, slot, (0, i, j))] if 1 <= i <= M and 1 <= j <= M else []

    def h1(i):
        E = lambda p, q: emap(p, q)
        terms = [(a - dom.const(Fraction(i, 2)) * hb, modes(E(i, i), 0)),
                 (-(a - dom.const(Fraction(i, 2)) * hb), modes(E(i + 1, i + 1), 0)),
                 (-hb, zero_prod(1, E(i, i), E(i + 1, i + 1)))]
        for k in range(1, M + 1):
            sh = 0 if k <= i else 1
            terms.append((hb, quad_series(1, E(i, k), E(k, i), sh)))
            terms.append((-hb, quad_series(1, E(i + 1, k), E(k, i + 1), sh)))
        return lin(terms)

    return Realization(M, d, dom, emap, h1, f"ev[{slot}]")


def coproduct_tail(i: int, r1: Realization, r2: Realization, hb, cross: int = 0) -> Node:
    """A_i for the pair (r1 first, r2 second); ``cross`` adds cross*hbar*h0 x h0."""
    M = r1.M
    E1, E2 = r1.e, r2.e
    t = [(-hb, zero_prod(1, E1(i, i), E2(i + 1, i + 1))),
         (-hb, zero_prod(1, E1(i + 1, i + 1), E2(i, i)))]
    for x, sg in ((i, 1), (i + 1, -1)):
        for u in range(1, M + 1):
            if u <= i:
                t.append((-sg * hb, quad_series(1, E1(u, x), E2(x, u), 1)))
                t.append((sg * hb, quad_series(1, E1(x, u), E2(u, x), 0)))
            else:
                t.append((-sg * hb, quad_series(1, E1(u, x), E2(x, u), 0)))
                t.append((sg * hb, quad_series(1, E1(x, u), E2(u, x), 1)))
    if cross:
        t.append((cross * hb, zero_prod(1, r1.h0(i), r2.h0(i))))
    return lin(t)


def coproduct(r1: Realization, r2: Realization, tail: bool = True, cross: int = 0) -> Realization:
    if r1.M != r2.M or r1.d != r2.d:
        raise ValueError("coproduct factors must realise the same Yangian")
    hb = r1.dom.hbar

    def emap(i, j):
        return r1.e(i, j) + r2.e(i, j)

    def h1(i):
        terms = [(1, r1.h1(i)), (1, r2.h1(i))]
        if tail:
            terms.append((1, coproduct_tail(i, r1, r2, hb, cross)))
        elif cross:
            terms.append((cross * hb, zero_prod(1, r1.h0(i), r2.h0(i))))
        return lin(terms)

    return Realization(r1.M, r1.d, r1.dom, emap, h1, f"D({r1.name},{r2.name})")


def psi1(rho: Realization, n: int, tail: bool = True) -> Realization:
    """Y(sl(n)) into Y(sl(M)), upper-left corner."""
    M, hb = rho.M, rho.dom.hbar
    if not 1 <= n <= M:
        raise ValueError("psi1 needs n <= M")

    def emap(i, j):
        return rho.e(i, j) if 1 <= i <= n and 1 <= j <= n else []

    def h1(i):
        terms = [(1, rho.h1(i))]
        if tail:
            for k in range(n + 1, M + 1):
                terms.append((-hb, quad_series(1, rho.e(i, k), rho.e(k, i), 1)))
                terms.append((hb, quad_series(1, rho.e(i + 1, k), rho.e(k, i + 1), 1)))
        return lin(terms)

    return Realization(n, rho.d, rho.dom, emap, h1, f"P1({rho.name})")


def psi2(rho: Realization, m: int, tail: bool = True) -> Realization:
    """Y(sl(m)) at eps + n*hbar into Y(sl(m+n)) at eps, lower-right corner."""
    M, hb = rho.M, rho.dom.hbar
    n = M - m
    if n < 0:
        raise ValueError("psi2 needs m <= M")

    def emap(i, j):
        return rho.e(n + i, n + j) if 1 <= i <= m and 1 <= j <= m else []

    def h1(i):
        terms = [(1, rho.h1(i + n))]
        if tail:
            for k in range(1, n + 1):
                terms.append((hb, quad_series(1, rho.e(k, n + i), rho.e(n + i, k), 1)))
                terms.append((-hb, quad_series(1, rho.e(k, n + i + 1), rho.e(n + i + 1, k), 1)))
        return lin(terms)

    return Realization(m, rho.d - n, rho.dom, emap, h1, f"P2({rho.name})")


# ---------------------------------------------------------------- images

@dataclass
class YImage:
    n: int
    eps: object
    base: dict
    dom: object
    name: str = ""
    _full: dict = field(default=None, repr=False)

    def full(self) -> dict:
        if self._full is None:
            self._full = derive_full_image(self)
        return self._full


def derive_full_image(im: YImage) -> dict:
    """Extend images of X^{+-}_{i,0} and H_{j,1} (j != 0) to all generators."""
    n, dom = im.n, im.dom
    hb, half = dom.hbar, dom.const(HALF)
    g = dict(im.base)
    for i in range(n):
        g[("H", i, 0)] = commutator_expr(g[("X+", i, 0)], g[("X-", i, 0)])
    for i in range(1, n):
        h0 = g[("H", i, 0)]
        g[("Ht", i, 1)] = lin([(1, g[("H", i, 1)]), (-half * hb, prod(h0, h0))])
        for s, sg in (("+", 1), ("-", -1)):
            g[("X" + s, i, 1)] = lin([(sg * half, commutator_expr(g[("Ht", i, 1)], g[("X" + s, i, 0)]))])
    shift = im.eps + dom.const(Fraction(n, 2)) * hb
    for s, sg in (("+", 1), ("-", -1)):
        g[("X" + s, 0, 1)] = lin([(-sg, commutator_expr(g[("Ht", n - 1, 1)], g[("X" + s, 0, 0)])),
                                   (shift, g[("X" + s, 0, 0)])])
    g[("H", 0, 1)] = commutator_expr(g[("X+", 0, 1)], g[("X-", 0, 0)])
    h00 = g[("H", 0, 0)]
    g[("Ht", 0, 1)] = lin([(1, g[("H", 0, 1)]), (-half * hb, prod(h00, h00))])
    return g


def relation_node(rel: RelationInstance, im: YImage) -> Node:
    g = im.full()
    terms = []
    for word, p in rel.expr.terms.items():
        terms.append((_dpoly(im.dom, p, im.eps), prod(*(g[w] for w in word))))
    return lin(terms)


@dataclass
class CheckResult:
    name: str
    ok: bool
    tested: int = 0
    witness: str | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    check: str
    ok: bool
    results: list
    info: dict = field(default_factory=dict)

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r.ok]


def _result(name: str, res: WeakResult, space) -> CheckResult:
    from .modact import mono_text, vec_text
    if res.ok:
        return CheckResult(name, True, res.tested)
    diff = dict(res.image1)
    from .modact import add_scaled
    add_scaled(diff, res.image2, -1)
    return CheckResult(name, False, res.tested, mono_text(res.witness),
                       {"difference": vec_text(diff, space.dom)})


def check_homomorphism(im: YImage, space: ModuleSpace, W: int, families=None,
                       stop_early: bool = False) -> SuiteReport:
    results = []
    for rel in relations(im.n):
        if families and rel.rid not in families:
            continue
        res = weak_zero(relation_node(rel, im), space, W)
        results.append(_result(rel.name, res, space))
        if stop_early and not res.ok:
            break
    ok = all(r.ok for r in results)
    return SuiteReport(f"relations[{im.name}]", ok, results, {"cutoff": W, "n": im.n})


# ---------------------------------------------------------------- concrete targets

def gl_space(ns: list, dom, shifts: list | None = None) -> ModuleSpace:
    """Tensor product of gl(n_s) vacuum modules with central charge c - shift_s."""
    shifts = shifts or [0] * len(ns)
    return ModuleSpace([gl_slot(n, dom.ctilde(d), dom) for n, d in zip(ns, shifts)], dom)


def ev_param(dom, which: int = 0):
    """Default evaluation parameters used by the relation checks: 0 and k*hbar."""
    return dom.zero if which == 0 else dom.k * dom.hbar


def ev_image(n: int, dom, a=None) -> tuple[YImage, ModuleSpace]:
    sp = gl_space([n], dom)
    rho = ev(0, n, dom, ev_param(dom, 1) if a is None else a)
    return rho.image(), sp


def delta_ev_image(n: int, dom, tail: bool = True, cross: int = 0) -> tuple[YImage, ModuleSpace]:
    sp = gl_space([n, n], dom)
    rho = coproduct(ev(0, n, dom, ev_param(dom, 0)), ev(1, n, dom, ev_param(dom, 1)), tail, cross)
    return rho.image(), sp


def psi1_image(n: int, m: int, dom, tail: bool = True) -> tuple[YImage, ModuleSpace]:
    sp = gl_space([m + n], dom)
    rho = psi1(ev(0, m + n, dom, ev_param(dom, 1)), n, tail)
    return rho.image(), sp


def psi2_image(m: int, n: int, dom, tail: bool = True) -> tuple[YImage, ModuleSpace]:
    sp = gl_space([m + n], dom)
    rho = psi2(ev(0, m + n, dom, ev_param(dom, 1)), m, tail)
    return rho.image(), sp


def psi_cross_commutators(n: int, m: int, dom, W: int, tail: bool = True) -> SuiteReport:
    """Images of Psi1 (sl(n)) and Psi2 (sl(m)) inside gl(m+n) commute."""
    sp = gl_space([m + n], dom)
    rho = ev(0, m + n, dom, ev_param(dom, 1))
    a = psi1(rho, n, tail).image()
    b = psi2(rho, m, tail).image()
    return _cross_commute(a, b, sp, W, "psi1 x psi2")


def _cross_commute(a: YImage, b: YImage, sp, W, label, extra=None) -> SuiteReport:
    results = []
    for ka, na in sorted(a.base.items()):
        for kb, nb in sorted(b.base.items()):
            res = weak_zero(commutator_expr(na, nb), sp, W)
            results.append(_result(f"[{_gname(ka)}, {_gname(kb)}]", res, sp))
    return SuiteReport(label, all(r.ok for r in results), results, {"cutoff": W})


def _gname(k) -> str:
    return f"{k[0]}_{{{k[1]},{k[2]}}}"


# ---------------------------------------------------------------- Delta_l

# theorem: gamma_s hbar; proof: (gamma_s - (q_s - n_a)/2) hbar; the
# "negated" forms flip the overall sign.
A_CONVENTIONS = ("theorem", "proof", "negated-theorem", "negated")


def slot_params(P: PartitionData, dom, a: int, convention: str) -> dict:
    """Evaluation parameter of every slot, for the factor a."""
    if convention not in A_CONVENTIONS:
        raise ValueError(f"unknown a-convention {convention!r}")
    out = {}
    for s in range(1, P.l + 1):
        g = P.gamma_in(dom, s)
        if convention in ("proof", "negated"):
            g = g - dom.const(Fraction(P.qs(s) - P.na(a), 2))
        if convention.startswith("negated"):
            g = -g
        out[s] = g * dom.hbar
    return out


def check_block_sizes(P: PartitionData) -> None:
    for s in range(1, P.l):
        d = P.qs(s) - P.qs(s + 1)
        if d not in (0,) and d < 3:
            raise ValueError(f"column sizes {P.qs(s)} and {P.qs(s + 1)} differ by {d}; "
                             "need 0 or at least 3")


def delta_l_compositional(P: PartitionData, dom, params: dict, coproduct_tail_on: bool = True,
                          cross: int = 0) -> dict:
    """{a: Realization of factor a} obtained by folding coproducts and Psi maps
    column by column, composed with evaluation maps on each slot."""
    ql = P.qs(P.l)
    factors = {1: ev(0, P.qs(1), dom, params[1], P.qs(1) - ql)}
    last = 1
    for s in range(2, P.l + 1):
        evs = ev(s - 1, P.qs(s), dom, params[s], P.qs(s) - ql)
        prev = factors[last]
        if P.qs(s - 1) == P.qs(s):
            factors[last] = coproduct(prev, evs, coproduct_tail_on, cross)
        else:
            factors[last] = psi1(prev, P.qs(s - 1) - P.qs(s))
            factors[last + 1] = coproduct(psi2(prev, P.qs(s)), evs, coproduct_tail_on, cross)
            last += 1
    return factors


@dataclass
class DeltaTerm:
    family: str          # H, B, C, D
    sign: int            # coefficient is sign * hbar
    kind: str            # "zero" (product of zero modes) or "S0"/"S1" series
    left: tuple          # (slot, i, j), 1-based slot
    right: tuple

    def text(self) -> str:
        l, r = self.left, self.right
        lt = f"E^({l[0]})_{{{l[1]},{l[2]}}}"
        rt = f"E^({r[0]})_{{{r[1]},{r[2]}}}"
        if self.kind == "zero":
            body = f"{lt} {rt}"
        else:
            sh = "" if self.kind == "S0" else "-1"
            sh2 = "" if self.kind == "S0" else "+1"
            body = f"sum_s {lt} t^(-s{sh}) {rt} t^(s{sh2})"
        return f"{'+' if self.sign > 0 else '-'}hbar {body}"


def closed_form_terms(P: PartitionData, a: int, i: int, b_literal: bool = False,
                      families: str = "BCD") -> list[DeltaTerm]:
    """The B_i, C_i, D_i correction terms of Delta_l(H_{i,1}) for the factor a."""
    ba, na, nb, ql = P.b[a - 1], P.na(a), P.na(a + 1), P.qs(P.l)
    q = P.qs
    I = lambda r: q(r) - na + i
    J = lambda r: q(r) - na + i + 1
    sh = lambda r1, r2, u: q(r1) - q(r2) + u
    T: list[DeltaTerm] = []
    add = lambda fam, sg, kind, l, r: T.append(DeltaTerm(fam, sg, kind, l, r))
    pairs = [(r1, r2) for r1 in range(1, ba + 1) for r2 in range(r1 + 1, ba + 1)]
    if "B" in families:
        for r1, r2 in pairs:
            add("B", -1, "zero", (r1, I(r1), I(r1)), (r2, J(r2), J(r2)))
            add("B", -1, "zero", (r1, J(r1), J(r1)), (r2, I(r2), I(r2)))
            for u in range(1, I(r2) + 1):
                add("B", -1, "S1", (r1, sh(r1, r2, u), I(r1)), (r2, I(r2), u))
                add("B", 1, "S0", (r1, I(r1), sh(r1, r2, u)), (r2, u, I(r2)))
            for u in range(I(r2) + 1, q(r2) + 1):
                add("B", -1, "S0", (r1, sh(r1, r2, u), I(r1)), (r2, I(r2), u))
                add("B", 1, "S1", (r1, I(r1), sh(r1, r2, u)), (r2, u, I(r2)))
            for u in range(1, I(r2) + 1):
                add("B", 1, "S1", (r1, sh(r1, r2, u), J(r1)), (r2, J(r2), u))
                add("B", -1, "S0", (r1, J(r1), sh(r1, r2, u)), (r2, u, J(r2)))
            for u in range(I(r2) + 1, q(r2) + 1):
                col = q(r1) - ql + i + 1 if b_literal else J(r1)
                add("B", 1, "S0", (r1, sh(r1, r2, u), col), (r2, J(r2), u))
                add("B", -1, "S1", (r1, J(r1), sh(r1, r2, u)), (r2, u, J(r2)))
    if "C" in families:
        for r in range(1, ba + 1):
            for u in range(1, q(r) - na + 1):
                add("C", 1, "S1", (r, u, I(r)), (r, I(r), u))
                add("C", -1, "S1", (r, u, J(r)), (r, J(r), u))
        for r1, r2 in pairs:
            for u in range(1, q(r2) - na + 1):
                add("C", 1, "S1", (r1, sh(r1, r2, u), I(r1)), (r2, I(r2), u))
                add("C", -1, "S1", (r1, sh(r1, r2, u), J(r1)), (r2, J(r2), u))
                add("C", 1, "S1", (r2, u, I(r2)), (r1, I(r1), sh(r1, r2, u)))
                add("C", -1, "S1", (r2, u, J(r2)), (r1, J(r1), sh(r1, r2, u)))
    if "D" in families:
        for r in range(1, ba + 1):
            for u in range(q(r) - nb + 1, q(r) + 1):
                add("D", -1, "S1", (r, I(r), u), (r, u, I(r)))
                add("D", 1, "S1", (r, J(r), u), (r, u, J(r)))
        for r1, r2 in pairs:
            for u in range(q(r2) - nb + 1, q(r2) + 1):
                add("D", -1, "S1", (r1, I(r1), sh(r1, r2, u)), (r2, u, I(r2)))
                add("D", 1, "S1", (r1, J(r1), sh(r1, r2, u)), (r2, u, J(r2)))
                add("D", -1, "S1", (r2, I(r2), u), (r1, sh(r1, r2, u), I(r1)))
                add("D", 1, "S1", (r2, J(r2), u), (r1, sh(r1, r2, u), J(r1)))
    return T


def _term_node(t: DeltaTerm, P: PartitionData, hb) -> Node:
    def el(x):
        s, p, q = x
        if not (1 <= p <= P.qs(s) and 1 <= q <= P.qs(s)):
            return []
        return [(1, s - 1, (0, p, q))]
    if t.kind == "zero":
        return zero_prod(t.sign * hb, el(t.left), el(t.right))
    return quad_series(t.sign * hb, el(t.left), el(t.right), 0 if t.kind == "S0" else 1)


def delta_l_closed(P: PartitionData, dom, a: int, params: dict, b_literal: bool = False,
                   families: str = "BCD") -> Realization:
    ba, na, ql = P.b[a - 1], P.na(a), P.qs(P.l)
    evs = {s: ev(s - 1, P.qs(s), dom, params[s], P.qs(s) - ql) for s in range(1, ba + 1)}
    off = lambda s: P.qs(s) - na

    def emap(i, j):
        out = []
        for s in range(1, ba + 1):
            out += evs[s].e(i + off(s), j + off(s))
        return out

    def h1(i):
        terms = [(1, evs[s].h1(i + off(s))) for s in range(1, ba + 1)]
        for t in closed_form_terms(P, a, i, b_literal, families):
            terms.append((1, _term_node(t, P, dom.hbar)))
        return lin(terms)

    return Realization(P.factor_size(a), na - ql, dom, emap, h1, f"closed[{a}]")


# ---------------------------------------------------------------- Phi

def phi(P: PartitionData, dom, a: int, space: ModuleSpace | None = None,
        h_sign: int = -1, gamma_term: bool = True, index_shift: int = 0) -> Realization:
    """Phi restricted to the factor a, read in the Miura frame.

    ``h_sign`` is the sign of the hbar W1 W1 zero-mode product in Phi(H_{i,1}).
    """
    sp = space or miura_space(P, dom)
    n = P.factor_size(a)
    off = P.q[0] - P.na(a) + index_shift
    hb = dom.hbar
    w2cache: dict = {}

    def w1(p, q):
        out = []
        for r in range(1, P.l + 1):
            lp, lq = P.to_local(r, p), P.to_local(r, q)
            if lp is not None and lq is not None:
                out.append((1, r - 1, (0, lp, lq)))
        return out

    def emap(i, j):
        return w1(off + i, off + j)

    def w2_mode(p):
        if p not in w2cache:
            st = build_W2(P, p, p, sp, gamma_term).state
            w2cache[p] = mode_operator(st, 1)
        return w2cache[p]

    def h1(i):
        I, J = off + i, off + i + 1
        terms = [(-hb, w2_mode(I)), (hb, w2_mode(J)),
                 (-dom.const(Fraction(i, 2)) * hb, modes(w1(I, I), 0)),
                 (dom.const(Fraction(i, 2)) * hb, modes(w1(J, J), 0)),
                 (h_sign * hb, zero_prod(1, w1(I, I), w1(J, J)))]
        for u in range(1, n + 1):
            shf = 0 if u <= i else 1
            terms.append((hb, quad_series(1, w1(I, off + u), w1(off + u, I), shf)))
            terms.append((-hb, quad_series(1, w1(J, off + u), w1(off + u, J), shf)))
        return lin(terms)

    return Realization(n, P.na(a) - P.qs(P.l), dom, emap, h1, f"Phi[{a}]")


def compare_realizations(r1: Realization, r2: Realization, space, W: int, label: str,
                         generators=None) -> SuiteReport:
    i1, i2 = r1.image(), r2.image()
    keys = generators or sorted(i1.base)
    results = []
    for k in keys:
        res = weak_equal(i1.base[k], i2.base[k], space, W)
        results.append(_result(_gname(k), res, space))
    return SuiteReport(label, all(r.ok for r in results), results, {"cutoff": W})


def _require_active(P: PartitionData) -> list:
    act = P.active_factors()
    if not act:
        raise ValueError(f"partition {P} has no Yangian factor of rank >= 3")
    check_block_sizes(P)
    return act


def main_identity_check(P: PartitionData, dom, W: int, convention: str = "theorem",
                        h_sign: int = -1, gamma_term: bool = True,
                        construction: str = "compositional") -> SuiteReport:
    act = _require_active(P)
    sp = miura_space(P, dom)
    results = []
    for a in act:
        params = slot_params(P, dom, a, convention)
        if construction == "compositional":
            lhs = delta_l_compositional(P, dom, params)[a]
        else:
            lhs = delta_l_closed(P, dom, a, params)
        rhs = phi(P, dom, a, sp, h_sign, gamma_term)
        rep = compare_realizations(lhs, rhs, sp, W, f"factor {a}")
        for r in rep.results:
            r.name = f"factor {a}: {r.name}"
        results += rep.results
    return SuiteReport("main-identity", all(r.ok for r in results), results,
                       {"cutoff": W, "a_convention": convention, "h_sign": h_sign,
                        "construction": construction})


def delta_l_consistency(P: PartitionData, dom, W: int, convention: str = "theorem",
                        b_literal: bool = False, families: str = "BCD") -> SuiteReport:
    act = _require_active(P)
    sp = miura_space(P, dom)
    results = []
    for a in act:
        params = slot_params(P, dom, a, convention)
        comp = delta_l_compositional(P, dom, params)[a]
        closed = delta_l_closed(P, dom, a, params, b_literal, families)
        rep = compare_realizations(comp, closed, sp, W, f"factor {a}")
        for r in rep.results:
            r.name = f"factor {a}: {r.name}"
        results += rep.results
    return SuiteReport("delta-l", all(r.ok for r in results), results, {"cutoff": W})


def commutativity_check(P: PartitionData, dom, W: int, index_shift: int = 0,
                        derived: bool = False) -> SuiteReport:
    act = _require_active(P)
    sp = miura_space(P, dom)
    imgs = {a: phi(P, dom, a, sp).image() for a in act}
    if index_shift:
        last = act[-1]
        imgs[last] = phi(P, dom, last, sp, index_shift=index_shift).image()
    results = []
    for a, b in itertools.combinations(act, 2):
        ga = imgs[a].full() if derived else imgs[a].base
        gb = imgs[b].full() if derived else imgs[b].base
        for ka in sorted(ga):
            for kb in sorted(gb):
                res = weak_zero(commutator_expr(ga[ka], gb[kb]), sp, W)
                results.append(_result(f"[{_gname(ka)}^({a}), {_gname(kb)}^({b})]", res, sp))
    return SuiteReport("commutativity", all(r.ok for r in results), results,
                       {"cutoff": W, "factors": act})


def centralizer_modes(P: PartitionData, dom, sp, W: int, mixing: bool = False) -> list:
    """Modes of the distinguished subalgebra on the leading block."""
    m = P.na(1) - P.na(2)
    out = []

    def w1(p, q):
        return lin((1, Mode(r - 1, (0, P.to_local(r, p), P.to_local(r, q)), 0))
                   for r in range(1, P.l + 1)
                   if P.to_local(r, p) is not None and P.to_local(r, q) is not None)

    def w1m(p, q, k):
        return lin((1, Mode(r - 1, (0, P.to_local(r, p), P.to_local(r, q)), k))
                   for r in range(1, P.l + 1)
                   if P.to_local(r, p) is not None and P.to_local(r, q) is not None)

    ks = range(-W, W + 1)
    if mixing:
        return [(f"W1[1,{m + 1}] t^{k}", w1m(1, m + 1, k)) for k in ks]
    for k in ks:
        for p in range(1, m + 1):
            for q in range(1, m + 1):
                if p != q:
                    out.append((f"W1[{p},{q}] t^{k}", w1m(p, q, k)))
        for p in range(1, m):
            out.append((f"(W1[{p},{p}]-W1[{p + 1},{p + 1}]) t^{k}",
                        lin([(1, w1m(p, p, k)), (-1, w1m(p + 1, p + 1, k))])))
    if P.b[0] == 2:
        from .walgebra import build_W2_shifted
        for k in ks:
            for p in range(1, m + 1):
                for q in range(1, m + 1):
                    st = build_W2_shifted(P, p, q, sp).state
                    out.append((f"W2'[{p},{q}] t^{k}", mode_operator(st, k)))
    return out


def centralizer_check(P: PartitionData, dom, W: int, mixing: bool = False) -> SuiteReport:
    if P.b[0] not in (1, 2):
        raise ValueError("centralizer check needs b_1 = 1 or 2")
    act = _require_active(P)
    sp = miura_space(P, dom)
    results = []
    mds = centralizer_modes(P, dom, sp, W, mixing)
    for a in act:
        if a < 2:
            continue
        im = phi(P, dom, a, sp).image()
        for kg, node in sorted(im.base.items()):
            for label, md in mds:
                res = weak_zero(commutator_expr(node, md), sp, W)
                results.append(_result(f"[{_gname(kg)}^({a}), {label}]", res, sp))
    info = {"cutoff": W, "b1": P.b[0], "vacuous": not results}
    return SuiteReport("centralizer", all(r.ok for r in results), results, info)


__all__ = [
    "F", "RelationInstance", "relations", "cartan", "Realization", "ev", "coproduct",
    "coproduct_tail", "psi1", "psi2", "YImage", "derive_full_image", "relation_node",
    "check_homomorphism", "gl_space", "ev_image", "delta_ev_image", "psi1_image",
    "psi2_image", "psi_cross_commutators", "slot_params", "delta_l_compositional",
    "delta_l_closed", "closed_form_terms", "DeltaTerm", "phi", "compare_realizations",
    "main_identity_check", "delta_l_consistency", "commutativity_check",
    "centralizer_check", "SuiteReport", "CheckResult", "A_CONVENTIONS",
    "check_block_sizes",
]
