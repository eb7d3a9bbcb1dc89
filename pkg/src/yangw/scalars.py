"""Exact coefficients.

Two layers live here.

* ``RatFunc``: elements of the field Q(hbar, eps, k), backed by sympy's sparse
  rational function field.  This is the public, canonical representation used
  for reports and golden files.
* Coefficient *domains* used inside the hot loops of the engine.  An
  ``ExactDomain`` computes in the polynomial subring Q[hbar, eps/hbar, k]
  (python-flint), which holds every coefficient the constructions produce.
  A ``PointDomain`` evaluates everything at one rational point (gmpy2).
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping

import flint
import gmpy2
from sympy import QQ, sympify
from sympy.polys.fields import field

FIELD, HBAR, EPS, K = field("hbar,eps,k", QQ)
RatFunc = type(HBAR)
PARAMS = ("hbar", "eps", "k")


class EvaluationPole(ZeroDivisionError):
    """Raised when a denominator vanishes at a sample point."""

    def __init__(self, msg: str = "evaluation pole"):
        super().__init__(msg)


def ratfunc(x) -> RatFunc:
    """Coerce ints, Fractions, strings (sympy syntax) and field elements."""
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Fraction):
        return FIELD(QQ(x.numerator, x.denominator))
    if isinstance(x, str):
        return FIELD.from_expr(sympify(x))
    return FIELD(x)


def add(a, b) -> RatFunc:
    return ratfunc(a) + ratfunc(b)


def mul(a, b) -> RatFunc:
    return ratfunc(a) * ratfunc(b)


def neg(a) -> RatFunc:
    return -ratfunc(a)


def inv(a) -> RatFunc:
    a = ratfunc(a)
    if not a:
        raise ZeroDivisionError("division by zero")
    return 1 / a


def substitute_eps(a, N: int, q_l: int) -> RatFunc:
    """Replace eps by hbar*(k+N-q_l)."""
    a = ratfunc(a)
    rule = HBAR * (K + (N - q_l))
    num = a.numer.compose(a.numer.ring.gens[1], rule.numer)
    den = a.denom.compose(a.denom.ring.gens[1], rule.numer)
    return FIELD(num) / FIELD(den)


def _poly_eval(p, point) -> Fraction:
    total = Fraction(0)
    for exps, c in p.terms():
        term = Fraction(int(c.numerator), int(c.denominator))
        for e, v in zip(exps, point):
            if e:
                term *= v ** e
        total += term
    return total


def random_eval(a, assignment: Mapping[str, object]) -> Fraction:
    """Exact value of ``a`` at a rational point; missing parameters raise KeyError
    only if they actually occur."""
    a = ratfunc(a)
    point = []
    for name in PARAMS:
        v = assignment.get(name)
        point.append(Fraction(v) if v is not None else None)

    def ev(p):
        used = [any(e[i] for e, _ in p.terms()) for i in range(3)]
        for i, u in enumerate(used):
            if u and point[i] is None:
                raise KeyError(PARAMS[i])
        return _poly_eval(p, [x if x is not None else Fraction(0) for x in point])

    den = ev(a.denom)
    if den == 0:
        raise EvaluationPole()
    return ev(a.numer) / den


# ---------------------------------------------------------------- text form

def _mono_key(exps):
    # graded lex with hbar < eps < k, leading term first
    h, e, k = exps
    return (h + e + k, k, e, h)


def _frac_text(q) -> str:
    q = Fraction(int(q.numerator), int(q.denominator))
    return f"{q.numerator}/{q.denominator}"


def poly_text(p) -> str:
    terms = sorted(p.terms(), key=lambda t: _mono_key(t[0]), reverse=True)
    if not terms:
        return "0"
    out = ""
    for exps, c in terms:
        mono = "*".join(
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(PARAMS, exps) if e
        )
        text = _frac_text(abs(c)) + ("*" + mono if mono else "")
        if not out:
            out = text if c > 0 else "-" + text
        else:
            out += (" + " if c > 0 else " - ") + text
    return out


def canonical(a) -> tuple:
    """(numerator, denominator) with the denominator's leading coefficient 1."""
    a = ratfunc(a)
    num, den = a.numer, a.denom
    lead = max(den.terms(), key=lambda t: _mono_key(t[0]))[1]
    return num.quo_ground(lead), den.quo_ground(lead)


def to_text(a) -> str:
    num, den = canonical(a)
    if den == den.ring.one:
        return poly_text(num)
    return f"({poly_text(num)})/({poly_text(den)})"


# ---------------------------------------------------------------- domains

_CTX = flint.fmpq_mpoly_ctx.get(("hbar", "c", "k"), "deglex")
_GH, _GC, _GK = _CTX.gens()


class NotInSubring(ValueError):
    pass


class ExactDomain:
    """Symbolic coefficients in Q[hbar, c, k] where c stands for eps/hbar.

    With ``eps_offset`` set, eps is specialised to hbar*(k + eps_offset), i.e.
    c becomes k + eps_offset.
    """

    exact = True

    def __init__(self, eps_offset: int | None = None):
        self.eps_offset = eps_offset
        self.hbar = _GH
        self.k = _GK
        self.c = _GC if eps_offset is None else _GK + eps_offset
        self.eps = self.hbar * self.c
        self.one = _CTX.constant(1)
        self.zero = _CTX.constant(0)
        self.label = "symbolic"

    def const(self, q) -> object:
        q = Fraction(q)
        return _CTX.constant(flint.fmpq(q.numerator, q.denominator))

    def ctilde(self, shift: int = 0):
        """(eps - shift*hbar)/hbar."""
        return self.c - shift

    def is_zero(self, x) -> bool:
        return x == 0

    def unit_inverse(self, x):
        """Inverse of a nonzero constant; None for anything else."""
        x = self.one * x
        if x != 0 and x.is_constant():
            return self.one / x
        return None

    def shifted(self, dk: int) -> "ExactDomain":
        """Same ring, with the level parameter read as k + dk."""
        other = ExactDomain(self.eps_offset)
        other.k = self.k + dk
        other.level_shift = getattr(self, "level_shift", 0) + dk
        return other

    def to_ratfunc(self, x) -> RatFunc:
        if isinstance(x, (int, Fraction)):
            return ratfunc(x)
        c = EPS / HBAR if self.eps_offset is None else K + self.eps_offset
        out = FIELD(0)
        for exps, q in x.to_dict().items():
            eh, ec, ek = (int(e) for e in exps)
            out += ratfunc(Fraction(int(q.p), int(q.q))) * HBAR ** eh * c ** ec * K ** ek
        return out

    def from_ratfunc(self, r):
        """Embed a field element; fails unless it lies in Q[hbar, eps/hbar, k]."""
        r = ratfunc(r)
        if self.eps_offset is not None:
            r = substitute_eps(r, self.eps_offset, 0)
        den_terms = r.denom.terms()
        if len(den_terms) != 1:
            raise NotInSubring(to_text(r))
        (dh, de, dk), dc = den_terms[0]
        if de or dk:
            raise NotInSubring(to_text(r))
        out = self.zero
        dcf = Fraction(int(dc.numerator), int(dc.denominator))
        for (h, e, k), q in r.numer.terms():
            # hbar^h eps^e k^k / hbar^dh = hbar^(h+e-dh) c^e k^k
            p = h + e - dh
            if p < 0:
                raise NotInSubring(to_text(r))
            coeff = Fraction(int(q.numerator), int(q.denominator)) / dcf
            out += self.const(coeff) * self.hbar ** p * self.c ** e * self.k ** k
        return out

    def text(self, x) -> str:
        return to_text(self.to_ratfunc(x))

    def __repr__(self):
        return f"ExactDomain(eps_offset={self.eps_offset})"


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def _mpq(x):
    x = Fraction(x)
    return gmpy2.mpq(x.numerator, x.denominator)


class PointDomain:
    """All coefficients evaluated at one rational point (hbar, eps, k)."""

    exact = False

    def __init__(self, hbar, eps, k, eps_offset: int | None = None, seed=None):
        self.eps_offset = eps_offset
        self.seed = seed
        self.hbar = _mpq(_frac(hbar) if not isinstance(hbar, (int, Fraction)) else hbar)
        self.k = _mpq(_frac(k) if not isinstance(k, (int, Fraction)) else k)
        if eps_offset is not None:
            self.eps = self.hbar * (self.k + eps_offset)
        else:
            self.eps = _mpq(_frac(eps) if not isinstance(eps, (int, Fraction)) else eps)
        if self.hbar == 0:
            raise EvaluationPole()
        self.c = self.eps / self.hbar
        self.one = gmpy2.mpq(1)
        self.zero = gmpy2.mpq(0)
        self.label = "random"

    def const(self, q):
        return _mpq(q)

    def ctilde(self, shift: int = 0):
        return self.c - shift

    def is_zero(self, x) -> bool:
        return x == 0

    def unit_inverse(self, x):
        return None if x == 0 else self.one / x

    def shifted(self, dk: int) -> "PointDomain":
        other = PointDomain(self.hbar, self.eps, self.k + dk, None, self.seed)
        other.eps_offset = self.eps_offset
        return other

    def point(self) -> dict:
        return {"hbar": _frac(self.hbar), "eps": _frac(self.eps), "k": _frac(self.k)}

    def from_ratfunc(self, r):
        return _mpq(random_eval(r, self.point()))

    def text(self, x) -> str:
        return _frac_text(_frac(x))

    def __repr__(self):
        p = self.point()
        return f"PointDomain(hbar={p['hbar']}, eps={p['eps']}, k={p['k']})"


def random_points(seed: int, count: int, eps_offset: int | None = None,
                  bound: int = 10 ** 6) -> list[PointDomain]:
    """Deterministic random rational sample points."""
    rng = random.Random(seed)

    def draw():
        while True:
            v = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
            if v != 0:
                return v

    return [PointDomain(draw(), draw(), draw(), eps_offset, seed=(seed, i))
            for i in range(count)]


def domains_for(mode: str, seed: int = 0, points: int = 3,
                eps_offset: int | None = None) -> list:
    if mode == "symbolic":
        return [ExactDomain(eps_offset)]
    if mode == "random":
        if points < 2:
            raise ValueError("random mode needs at least 2 points")
        return random_points(seed, points, eps_offset)
    raise ValueError(f"unknown mode {mode!r}")
