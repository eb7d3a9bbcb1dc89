"""Completed enveloping algebras acting on truncated vacuum modules.

A vector is a dict ``{monomial: coefficient}``.  A monomial is a tuple with one
entry per tensor slot; each entry is a sorted tuple of factors ``(m, label)``
standing for ``label t^{-m}`` with ``m >= 1``.  Factors are applied to the
vacuum from right to left, so ``((1, x), (2, y))`` is ``x[-1] y[-2] |0>``.

Operators are trees of :class:`Node` objects.  Nodes compare by identity so
they can key the application cache of a :class:`ModuleSpace`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .liealg import SlotAlgebra, label_text

INF = math.inf


class NonSummableSeries(ValueError):
    def __init__(self, msg: str = "non-summable series"):
        super().__init__(msg)


def acc(vec: dict, key, c) -> None:
    old = vec.get(key)
    if old is None:
        if c != 0:
            vec[key] = c
        return
    new = old + c
    if new == 0:
        del vec[key]
    else:
        vec[key] = new


def add_scaled(dst: dict, src: dict, c) -> None:
    if c == 1:
        for k, v in src.items():
            acc(dst, k, v)
    else:
        for k, v in src.items():
            acc(dst, k, c * v)


def scale_vec(vec: dict, c) -> dict:
    if c == 1:
        return dict(vec)
    out = {}
    for k, v in vec.items():
        x = c * v
        if x != 0:
            out[k] = x
    return out


def mono_weight(mono) -> int:
    return sum(m for sm in mono for m, _ in sm)


def vec_weight(vec: dict) -> int:
    return max((mono_weight(m) for m in vec), default=0)


# ---------------------------------------------------------------- operators

class Node:
    """Base class.  ``lo``/``hi`` bound the weight change output - input."""

    __slots__ = ("lo", "hi", "slots", "parity", "__weakref__")

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    @property
    def abstract(self) -> bool:
        return False


class Mode(Node):
    __slots__ = ("slot", "label", "n")

    def __init__(self, slot, label, n: int):
        self.slot, self.label, self.n = slot, label, n
        self.lo = self.hi = -n
        self.slots = frozenset([slot])
        self.parity = label[0]

    def __repr__(self):
        return f"Mode({self.slot},{label_text(self.label)},{self.n})"


class Series(Node):
    """coeff * sum_s weight(s) * prod_j X_j t^{a_j s + b_j}, s in [start, stop].

    ``factors`` are ``(slot, label, a, b)`` listed left to right; ``start`` or
    ``stop`` may be None for an unbounded direction.
    """

    __slots__ = ("coeff", "factors", "start", "stop", "weight", "_cons")

    def __init__(self, coeff, factors, start=0, stop=None, weight=None):
        self.coeff = coeff
        self.factors = tuple(factors)
        self.start, self.stop, self.weight = start, stop, weight
        A = sum(f[2] for f in self.factors)
        B = sum(f[3] for f in self.factors)
        if A == 0:
            self.lo = self.hi = -B
        else:
            self.lo, self.hi = -INF, INF
            if start is not None and stop is not None:
                vals = (-(A * start + B), -(A * stop + B))
                self.lo, self.hi = min(vals), max(vals)
        self.slots = frozenset(f[0] for f in self.factors)
        self.parity = sum(f[1][0] for f in self.factors) % 2
        # cumulative per-slot exponent constraints, right to left
        cons, cum = [], {}
        for slot, _, a, b in reversed(self.factors):
            ca, cb = cum.get(slot, (0, 0))
            cum[slot] = (ca + a, cb + b)
            cons.append((slot, ca + a, cb + b))
        self._cons = tuple(cons)
        if stop is None and not any(ca > 0 for _, ca, _ in cons):
            raise NonSummableSeries()
        if start is None and not any(ca < 0 for _, ca, _ in cons):
            raise NonSummableSeries()

    def s_range(self, slot_weights: dict, budget=None):
        lo = -INF if self.start is None else self.start
        hi = INF if self.stop is None else self.stop
        for slot, ca, cb in self._cons:
            w = slot_weights.get(slot, 0)
            if ca > 0:
                hi = min(hi, (w - cb) // ca)
            elif ca < 0:
                lo = max(lo, -((w - cb) // -ca))
            elif cb > w:
                return range(0)
        if budget is not None:
            A = sum(f[2] for f in self.factors)
            B = sum(f[3] for f in self.factors)
            # weight change -(A s + B) must stay <= budget
            if A > 0:
                lo = max(lo, -((budget + B) // A))
            elif A < 0:
                hi = min(hi, (budget + B) // -A)
            elif -B > budget:
                return range(0)
        if lo == -INF or hi == INF:
            raise NonSummableSeries()
        return range(int(lo), int(hi) + 1)

    def __repr__(self):
        fs = " ".join(f"{label_text(l)}@{s}t^({a}s+{b})" for s, l, a, b in self.factors)
        return f"Series[{self.start},{self.stop}]({fs})"


class StateMode(Node):
    """The mode u_(n) of a state u of the same module space."""

    __slots__ = ("state", "n")

    def __init__(self, state: dict, n: int):
        self.state = dict(state)
        self.n = n
        ws = [mono_weight(m) - n - 1 for m in self.state] or [0]
        self.lo, self.hi = min(ws), max(ws)
        self.slots = frozenset(i for m in self.state for i, sm in enumerate(m) if sm)
        pars = {sum(lab[0] for sm in m for _, lab in sm) % 2 for m in self.state}
        self.parity = pars.pop() if len(pars) == 1 else 0


class Product(Node):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.lo = sum(f.lo for f in self.factors)
        self.hi = sum(f.hi for f in self.factors)
        self.slots = frozenset().union(*(f.slots for f in self.factors))
        self.parity = sum(f.parity for f in self.factors) % 2

    @property
    def abstract(self):
        return any(f.abstract for f in self.factors)


class Sum(Node):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple((c, t) for c, t in terms if c != 0)
        if self.terms:
            self.lo = min(t.lo for _, t in self.terms)
            self.hi = max(t.hi for _, t in self.terms)
        else:
            self.lo = self.hi = 0
        self.slots = frozenset().union(*(t.slots for _, t in self.terms))
        self.parity = self.terms[0][1].parity if self.terms else 0

    @property
    def abstract(self):
        return any(t.abstract for _, t in self.terms)


class Atom(Node):
    """A named placeholder (e.g. a Yangian generator inside one tensor factor)
    that must be substituted before the operator can act."""

    __slots__ = ("slot", "key")

    def __init__(self, slot, key):
        self.slot, self.key = slot, key
        self.lo = self.hi = 0
        self.slots = frozenset([slot])
        self.parity = 0

    @property
    def abstract(self):
        return True

    def __repr__(self):
        return f"Atom({self.slot},{self.key})"


ZERO = Sum(())
IDENTITY = Product(())


def prod(*factors) -> Node:
    flat = []
    for f in factors:
        if isinstance(f, Sum) and not f.terms:
            return ZERO
        if isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    if len(flat) == 1:
        return flat[0]
    return Product(flat)


def lin(terms) -> Node:
    """Linear combination of nodes given as (coeff, node) pairs."""
    out = []
    for c, t in terms:
        if c == 0 or (isinstance(t, Sum) and not t.terms):
            continue
        if isinstance(t, Sum):
            out.extend((c * c2, t2) for c2, t2 in t.terms)
        else:
            out.append((c, t))
    if len(out) == 1 and out[0][0] == 1:
        return out[0][1]
    return Sum(out)


def add(*nodes) -> Node:
    return lin((1, n) for n in nodes)


def sub(a: Node, b: Node) -> Node:
    return lin([(1, a), (-1, b)])


def scale(c, node: Node) -> Node:
    return lin([(c, node)])


def commutator_expr(e1: Node, e2: Node) -> Node:
    sign = -1 if (e1.parity and e2.parity) else 1
    return lin([(1, prod(e1, e2)), (-sign, prod(e2, e1))])


def anticommutator_expr(e1: Node, e2: Node) -> Node:
    return lin([(1, prod(e1, e2)), (1, prod(e2, e1))])


def substitute(node: Node, mode_map, atom_map, memo=None) -> Node:
    """Rewrite a tree.  ``mode_map(slot, label)`` returns [(coeff, slot', label')]
    (exponent preserved); ``atom_map(atom)`` returns a node or None (keep)."""
    if memo is None:
        memo = {}
    hit = memo.get(id(node))
    if hit is not None:
        return hit[1]
    if isinstance(node, Mode):
        out = lin((c, Mode(s2, l2, node.n)) for c, s2, l2 in mode_map(node.slot, node.label))
    elif isinstance(node, Series):
        choices = [mode_map(s, l) for s, l, _, _ in node.factors]
        terms = []
        for combo in itertools.product(*choices):
            c = node.coeff
            fs = []
            for (cc, s2, l2), (_, _, a, b) in zip(combo, node.factors):
                c = c * cc
                fs.append((s2, l2, a, b))
            terms.append((c, Series(1, fs, node.start, node.stop, node.weight)))
        out = lin(terms)
    elif isinstance(node, Atom):
        out = atom_map(node)
        if out is None:
            out = node
    elif isinstance(node, Product):
        out = prod(*(substitute(f, mode_map, atom_map, memo) for f in node.factors))
    elif isinstance(node, Sum):
        out = lin((c, substitute(t, mode_map, atom_map, memo)) for c, t in node.terms)
    else:
        raise TypeError(f"cannot substitute into {type(node).__name__}")
    memo[id(node)] = (node, out)
    return out


# ---------------------------------------------------------------- modules

class ModuleSpace:
    """Tensor product of vacuum modules, one per slot, over a coefficient domain."""

    def __init__(self, slots: list, dom):
        self.slots: list[SlotAlgebra] = list(slots)
        self.dom = dom
        self._act: dict = {}
        self._cache: dict = {}
        self.discarded = 0

    @property
    def nslots(self) -> int:
        return len(self.slots)

    def vacuum(self) -> dict:
        return {tuple(() for _ in self.slots): self.dom.one}

    def clear(self):
        self._act.clear()
        self._cache.clear()

    # -- single slot -------------------------------------------------------

    def act_slot(self, s: int, lab, n: int, sm: tuple) -> dict:
        """lab t^n applied to one slot monomial."""
        key = (s, lab, n, sm)
        hit = self._act.get(key)
        if hit is not None:
            return hit
        alg = self.slots[s]
        res: dict = {}
        if n < 0:
            x = (-n, lab)
            if not sm or x < sm[0]:
                res = {(x,) + sm: 1}
            elif x == sm[0]:
                if lab[0] == 0:
                    res = {(x,) + sm: 1}
                # an odd factor squares to half its bracket, zero for our algebras
            else:
                res = self._commute_past(s, alg, lab, n, sm)
        elif sm:
            res = self._commute_past(s, alg, lab, n, sm)
        self._act[key] = res
        return res

    def _commute_past(self, s, alg, lab, n, sm) -> dict:
        (my, ylab), rest = sm[0], sm[1:]
        res: dict = {}
        sign = -1 if (lab[0] and ylab[0]) else 1
        inner = self.act_slot(s, lab, n, rest)
        for m2, c2 in inner.items():
            for m3, c3 in self.act_slot(s, ylab, -my, m2).items():
                acc(res, m3, sign * c2 * c3)
        for zlab, cz in alg.bracket.get((lab, ylab), ()):
            for m3, c3 in self.act_slot(s, zlab, n - my, rest).items():
                acc(res, m3, cz * c3)
        if n == my:
            kap = alg.form.get((lab, ylab))
            if kap is not None:
                acc(res, rest, n * kap)
        return res

    def _slot_parity(self, sm) -> int:
        return sum(lab[0] for _, lab in sm) & 1

    def apply_mode(self, s: int, lab, n: int, vec: dict, limit=INF) -> dict:
        out: dict = {}
        for mono, c in vec.items():
            sm = mono[s]
            if n > sum(m for m, _ in sm):
                continue
            if mono_weight(mono) - n > limit:
                continue
            sign = 1
            if lab[0]:
                for t in range(s):
                    if self._slot_parity(mono[t]):
                        sign = -sign
            for sm2, c2 in self.act_slot(s, lab, n, sm).items():
                acc(out, mono[:s] + (sm2,) + mono[s + 1:], sign * c * c2)
        return out

    # -- operators ---------------------------------------------------------

    def apply(self, node: Node, vec: dict, limit=INF) -> dict:
        out: dict = {}
        for mono, c in vec.items():
            r = self._apply_mono(node, mono, mono_weight(mono), limit)
            if r:
                add_scaled(out, r, c)
        return out

    def _apply_mono(self, node: Node, mono, wt: int, limit) -> dict:
        if wt + node.lo > limit:
            return {}
        lim = min(limit, wt + node.hi)
        key = (node, mono, lim)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        res = self._compute(node, mono, wt, lim)
        self._cache[key] = res
        return res

    def _compute(self, node, mono, wt, lim) -> dict:
        if isinstance(node, Mode):
            return self.apply_mode(node.slot, node.label, node.n, {mono: 1}, lim)
        if isinstance(node, Product):
            vec = {mono: 1}
            fs = node.factors
            # limit for the output of factor j: lim - sum of lo over factors left of j
            left_lo = [0] * (len(fs) + 1)
            for j in range(len(fs)):
                left_lo[j + 1] = left_lo[j] + fs[j].lo
            for j in range(len(fs) - 1, -1, -1):
                vec = self.apply(fs[j], vec, lim - left_lo[j])
                if not vec:
                    return {}
            return vec
        if isinstance(node, Sum):
            out: dict = {}
            for c, t in node.terms:
                r = self._apply_mono(t, mono, wt, lim)
                if r:
                    add_scaled(out, r, c)
            return out
        if isinstance(node, Series):
            return self._apply_series(node, mono, wt, lim)
        if isinstance(node, StateMode):
            out: dict = {}
            for smono, c in node.state.items():
                r = self.state_mode(smono, node.n, mono, lim)
                if r:
                    add_scaled(out, r, c)
            return out
        if isinstance(node, Atom):
            raise TypeError(f"abstract operator {node!r} cannot act on a module")
        raise TypeError(type(node).__name__)

    def _apply_series(self, node: Series, mono, wt, lim) -> dict:
        weights = {i: sum(m for m, _ in sm) for i, sm in enumerate(mono)}
        out: dict = {}
        for s in node.s_range(weights, lim - wt):
            w = node.weight(s) if node.weight is not None else 1
            if w == 0:
                continue
            vec = {mono: 1}
            for slot, lab, a, b in reversed(node.factors):
                vec = self.apply_mode(slot, lab, a * s + b, vec)
                if not vec:
                    break
            if vec:
                add_scaled(out, vec, node.coeff * w if w != 1 else node.coeff)
        return {k: v for k, v in out.items() if mono_weight(k) <= lim}

    # -- modes of states ----------------------------------------------------

    def state_mode(self, smono, n: int, mono, limit=INF) -> dict:
        """(state monomial)_(n) applied to one monomial."""
        wt = mono_weight(mono)
        dw = mono_weight(smono)
        if wt + dw - n - 1 > limit or wt + dw - n - 1 < 0:
            return {}
        key = ("sm", smono, n, mono)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        res = self._state_mode(smono, n, mono, wt)
        self._cache[key] = res
        return res

    def _state_mode(self, smono, n, mono, wt) -> dict:
        first = next((i for i, sm in enumerate(smono) if sm), None)
        if first is None:
            return {mono: 1} if n == -1 else {}
        (m, lab) = smono[first][0]
        rest = smono[:first] + (smono[first][1:],) + smono[first + 1:]
        rest_w = mono_weight(rest)
        rest_par = sum(l[0] for sm in rest for _, l in sm) & 1
        sign2 = -((-1) ** m) * (-1 if (lab[0] and rest_par) else 1)
        out: dict = {}
        # x_(-m-i) r_(n+i)
        for i in range(0, max(-1, wt + rest_w - n - 1) + 1):
            if not any(rest) and n + i != -1:
                continue
            inner = self.state_mode(rest, n + i, mono) if any(rest) else {mono: 1}
            if not inner:
                continue
            r = self.apply_mode(first, lab, -m - i, inner)
            add_scaled(out, r, math.comb(m + i - 1, i))
        # r_(n-m-i) x_(i)
        for i in range(0, sum(mm for mm, _ in mono[first]) + 1):
            inner = self.apply_mode(first, lab, i, {mono: 1})
            if not inner:
                continue
            if any(rest):
                r: dict = {}
                for m2, c2 in inner.items():
                    add_scaled(r, self.state_mode(rest, n - m - i, m2), c2)
            else:
                r = inner if n - m - i == -1 else {}
            if r:
                add_scaled(out, r, sign2 * math.comb(m + i - 1, i))
        return out


# ---------------------------------------------------------------- bases

def _slot_monomials(alg: SlotAlgebra, budget: int) -> list:
    """All PBW monomials of one slot with weight <= budget."""
    gens = [(m, lab) for m in range(1, budget + 1) for lab in alg.labels]
    gens.sort()
    out = []

    def rec(start, remaining, cur):
        out.append(tuple(cur))
        for idx in range(start, len(gens)):
            m, lab = gens[idx]
            if m > remaining:
                continue
            nxt = idx + 1 if lab[0] else idx
            cur.append(gens[idx])
            rec(nxt, remaining - m, cur)
            cur.pop()

    rec(0, budget, [])
    return out


def basis_monomials(space: ModuleSpace, W: int, slots=None) -> list:
    """PBW monomials of weight <= W; slots outside ``slots`` stay at vacuum."""
    if W < 0:
        return []
    active = range(space.nslots) if slots is None else sorted(slots)
    per = {s: _slot_monomials(space.slots[s], W) for s in active}
    out = []

    def rec(idx, remaining, cur):
        if idx == len(active):
            mono = [()] * space.nslots
            for s, sm in cur:
                mono[s] = sm
            out.append(tuple(mono))
            return
        s = active[idx]
        for sm in per[s]:
            w = sum(m for m, _ in sm)
            if w <= remaining:
                cur.append((s, sm))
                rec(idx + 1, remaining - w, cur)
                cur.pop()

    rec(0, W, [])
    out.sort(key=lambda m: (mono_weight(m), m))
    return out


def basis_vectors(space: ModuleSpace, W: int, slots=None) -> list:
    return [{m: space.dom.one} for m in basis_monomials(space, W, slots)]


# ---------------------------------------------------------------- comparison

@dataclass
class WeakResult:
    ok: bool
    cutoff: int
    tested: int
    witness: object = None
    image1: dict = field(default_factory=dict)
    image2: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def weak_equal(e1: Node, e2: Node, space: ModuleSpace, W: int) -> WeakResult:
    """Compare two operators on every basis vector of weight <= W - d."""
    d = max(0, e1.hi if e1.hi != -INF else 0, e2.hi if e2.hi != -INF else 0)
    if d == INF:
        raise NonSummableSeries("unbounded weight-raising degree")
    slots = e1.slots | e2.slots
    monos = basis_monomials(space, W - int(d), slots)
    for mono in monos:
        wt = mono_weight(mono)
        r1 = space._apply_mono(e1, mono, wt, W)
        r2 = space._apply_mono(e2, mono, wt, W)
        if r1 != r2 and not _same(r1, r2):
            return WeakResult(False, W, len(monos), mono, r1, r2)
    return WeakResult(True, W, len(monos))


def weak_zero(e: Node, space: ModuleSpace, W: int) -> WeakResult:
    return weak_equal(e, ZERO, space, W)


def _same(a: dict, b: dict) -> bool:
    diff = dict(a)
    add_scaled(diff, b, -1)
    return not diff


# ---------------------------------------------------------------- text

def factor_text(slot, m, lab, multi: bool) -> str:
    kind = "E" if lab[0] == 0 else "psi"
    sup = f"^({slot + 1})" if multi else ""
    return f"{kind}{sup}({lab[1]},{lab[2]})[-{m}]"


def mono_text(mono, multi=None) -> str:
    if multi is None:
        multi = len(mono) > 1
    parts = [factor_text(s, m, lab, multi) for s, sm in enumerate(mono) for m, lab in sm]
    return " ".join(parts + ["|0>"])


def vec_text(vec: dict, dom) -> str:
    if not vec:
        return "0"
    items = sorted(vec.items(), key=lambda kv: (mono_weight(kv[0]), kv[0]))
    return " + ".join(f"({dom.text(c)}) {mono_text(m)}" for m, c in items)


def vec_json(vec: dict, dom) -> list:
    items = sorted(vec.items(), key=lambda kv: (mono_weight(kv[0]), kv[0]))
    return [[mono_text(m), dom.text(c)] for m, c in items]
