"""Universal affine vertex (super)algebras: n-th products, translation, OPEs
and compilation of states into mode operators.

A state is a vector (dict) of a :class:`~yangw.modact.ModuleSpace`.  All
products are computed by letting modes of one state act on another, so the
Borcherds identities hold by construction.
"""
from __future__ import annotations

import math

from .modact import (
    IDENTITY, ZERO, ModuleSpace, Mode, Series, StateMode, add_scaled, lin,
    mono_weight, vec_json, vec_text,
)


def binom(a: int, k: int) -> int:
    """Generalised binomial coefficient for integer a and k >= 0."""
    if k < 0:
        return 0
    num = 1
    for t in range(k):
        num *= a - t
    return num // math.factorial(k)


def gen_state(space: ModuleSpace, slot: int, label, m: int = 1) -> dict:
    """label[-m]|0> in the given slot."""
    mono = [()] * space.nslots
    mono[slot] = ((m, label),)
    return {tuple(mono): space.dom.one}


def vacuum(space: ModuleSpace) -> dict:
    return space.vacuum()


def state_weight(u: dict) -> int:
    return max((mono_weight(m) for m in u), default=0)


def nth_product(space: ModuleSpace, u: dict, n: int, v: dict) -> dict:
    out: dict = {}
    for mu, cu in u.items():
        for mv, cv in v.items():
            r = space.state_mode(mu, n, mv)
            if r:
                add_scaled(out, r, cu * cv)
    return out


def normal_product(space: ModuleSpace, u: dict, v: dict) -> dict:
    return nth_product(space, u, -1, v)


def translation(space: ModuleSpace, u: dict) -> dict:
    out: dict = {}
    for mono, c in u.items():
        add_scaled(out, _translate_mono(space, mono), c)
    return out


def _translate_mono(space: ModuleSpace, mono) -> dict:
    first = next((i for i, sm in enumerate(mono) if sm), None)
    if first is None:
        return {}
    (m, lab) = mono[first][0]
    rest = mono[:first] + (mono[first][1:],) + mono[first + 1:]
    out = space.apply_mode(first, lab, -m - 1, {rest: 1})
    out = {k: m * v for k, v in out.items()}
    d_rest = _translate_mono(space, rest)
    if d_rest:
        add_scaled(out, space.apply_mode(first, lab, -m, d_rest), 1)
    return out


def ope(space: ModuleSpace, u: dict, v: dict) -> list:
    """[(s, u_(s) v)] for all nonzero singular products."""
    top = state_weight(u) + state_weight(v)
    out = []
    for s in range(0, top):
        r = nth_product(space, u, s, v)
        if r:
            out.append((s, r))
    return out


def ope_json(space: ModuleSpace, table: list) -> list:
    return [{"pole": s + 1, "product": s, "state": vec_json(r, space.dom)} for s, r in table]


def ope_latex(space: ModuleSpace, table: list, left: str = "u", right: str = "v") -> str:
    if not table:
        return f"{left}(z){right}(w) \\sim 0"
    parts = []
    for s, r in table:
        body = vec_text(r, space.dom).replace("|0>", "").strip()
        parts.append(f"\\frac{{{body}}}{{(z-w)^{{{s + 1}}}}}")
    return f"{left}(z){right}(w) \\sim " + " + ".join(parts)


# ---------------------------------------------------------------- modes

def _single_mode(slot, lab, m: int, a: int):
    """(x[-m]|0>)_(a) = (-1)^(m-1) C(a, m-1) x_(a-m+1)."""
    c = (-1) ** (m - 1) * binom(a, m - 1)
    return c, Mode(slot, lab, a - m + 1)


def _pair_series(mono, a: int):
    """Two series realising (x[-m] y[-p]|0>)_(a)."""
    facs = [(s, m, lab) for s, sm in enumerate(mono) for m, lab in sm]
    (sx, m, x), (sy, p, y) = facs
    sign = -((-1) ** m) * (-1 if (x[0] and y[0]) else 1)

    def w1(i, m=m, p=p, a=a):
        return math.comb(m + i - 1, i) * (-1) ** (p - 1) * binom(a + i, p - 1)

    def w2(i, m=m, p=p, a=a, sign=sign):
        return sign * math.comb(m + i - 1, i) * (-1) ** (p - 1) * binom(a - m - i, p - 1)

    s1 = Series(1, [(sx, x, -1, -m), (sy, y, 1, a - p + 1)], 0, None, w1)
    s2 = Series(1, [(sy, y, -1, a - m - p + 1), (sx, x, 1, 0)], 0, None, w2)
    return [(1, s1), (1, s2)]


def mode_operator(u: dict, a: int, expand: bool = True):
    """The operator u_(a) = u t^a as an operator tree."""
    terms = []
    for mono, c in u.items():
        facs = [(s, m, lab) for s, sm in enumerate(mono) for m, lab in sm]
        if not facs:
            if a == -1:
                terms.append((c, IDENTITY))
        elif len(facs) == 1:
            s, m, lab = facs[0]
            cc, node = _single_mode(s, lab, m, a)
            if cc:
                terms.append((c * cc, node))
        elif len(facs) == 2 and expand:
            terms.extend((c * cc, node) for cc, node in _pair_series(mono, a))
        else:
            terms.append((c, StateMode({mono: 1}, a)))
    return lin(terms) if terms else ZERO
