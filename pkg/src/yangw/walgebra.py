"""W-algebra data: Miura-frame generators W1/W2, column-determinant generators
in V(b), the Miura projection, the odd differential d0 and the rectangular
embedding check via OPE tables.

Two index frames are used.

* Miura frame: a tensor product of V(gl(q_s)), one slot per column.  Global
  row index p of slot s is the local index p - (q_1 - q_s).
* Parabolic frame: one slot holding V(a) (or its even part V(b)) with global
  indices 1..N; ``psi`` labels are odd.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .liealg import PartitionData, gl_slot, parabolic_slot
from .modact import (
    ModuleSpace, add_scaled, mono_text, mono_weight, scale_vec, vec_json, vec_text,
)
from .vertex import gen_state, nth_product, ope, translation

E_, PSI = 0, 1


# ---------------------------------------------------------------- spaces

def miura_space(P: PartitionData, dom, slots=None) -> ModuleSpace:
    """Tensor product of V^{kappa_s}(gl(q_s)), level alpha_s = k + N - q_s."""
    slots = range(1, P.l + 1) if slots is None else slots
    return ModuleSpace([gl_slot(P.qs(s), P.alpha_in(dom, s), dom) for s in slots], dom)


def parabolic_space(P: PartitionData, dom, odd: bool = True) -> ModuleSpace:
    return ModuleSpace([parabolic_slot(P, dom, odd)], dom)


@dataclass
class WGen:
    label: str
    order: int
    p: int
    q: int
    frame: str          # "miura" or "parabolic"
    state: dict

    def to_json(self, space) -> dict:
        return {"label": self.label, "order": self.order, "p": self.p, "q": self.q,
                "frame": self.frame, "state": vec_json(self.state, space.dom)}


def block_of(P: PartitionData, p: int) -> int:
    """Block a with q_1 - n_a < p <= q_1 - n_{a+1}."""
    for a in range(1, P.v + 1):
        if P.q[0] - P.na(a) < p <= P.q[0] - P.na(a + 1):
            return a
    raise ValueError(f"row {p} out of range for partition {P}")


def _e(space, s, p, q, P, m=1):
    """E^{(s)}_{p,q}[-m] (global rows) as a state, or None if undefined."""
    lp, lq = P.to_local(s, p), P.to_local(s, q)
    if lp is None or lq is None:
        return None
    return gen_state(space, s - 1, (E_, lp, lq), m)


def _e_prod(space, s1, p1, q1, s2, p2, q2, P):
    a = _e(space, s1, p1, q1, P)
    b = _e(space, s2, p2, q2, P)
    if a is None or b is None:
        return None
    return nth_product(space, a, -1, b)


def build_W1(P: PartitionData, p: int, q: int, space: ModuleSpace) -> WGen:
    if not (1 <= p <= P.q[0] and 1 <= q <= P.q[0]):
        raise ValueError(f"W1 indices ({p},{q}) out of range")
    out: dict = {}
    for r in range(1, P.l + 1):
        st = _e(space, r, p, q, P)
        if st:
            add_scaled(out, st, 1)
    return WGen(f"W1[{p},{q}]", 1, p, q, "miura", out)


def build_W2(P: PartitionData, p: int, q: int, space: ModuleSpace,
             gamma_term: bool = True) -> WGen:
    """-sum gamma_r E^(r)[-2] + sum_{r1<r2, u>q1-n_a} E^(r1)_{u,q} E^(r2)_{p,u}
    - sum_{r1>=r2, q1-q_r2 < u <= q1-n_a} E^(r1)_{u,q} E^(r2)_{p,u}."""
    a = block_of(P, p)
    if block_of(P, q) != a:
        raise ValueError(f"W2 indices ({p},{q}) are not in one block")
    dom = space.dom
    q1, cut = P.q[0], P.q[0] - P.na(a)
    out: dict = {}
    if gamma_term:
        for r in range(1, P.l + 1):
            st = _e(space, r, p, q, P, 2)
            if st:
                add_scaled(out, st, -P.gamma_in(dom, r))
    for r1, r2 in itertools.product(range(1, P.l + 1), repeat=2):
        if r1 < r2:
            us, sign = range(cut + 1, q1 + 1), 1
        else:
            us, sign = range(q1 - P.qs(r2) + 1, cut + 1), -1
        for u in us:
            st = _e_prod(space, r1, u, q, r2, p, u, P)
            if st:
                add_scaled(out, st, sign)
    return WGen(f"W2[{p},{q}]", 2, p, q, "miura", out)


def build_W2_shifted(P, p, q, space, gamma=None) -> WGen:
    """W2 + gamma_1 dW1, the image of the rectangular W~2 under the embedding."""
    dom = space.dom
    g = P.gamma_in(dom, 1) if gamma is None else gamma
    w2 = build_W2(P, p, q, space).state
    add_scaled(w2, translation(space, build_W1(P, p, q, space).state), g)
    return WGen(f"W2'[{p},{q}]", 2, p, q, "miura", w2)


# ---------------------------------------------------------------- cdet

def _tp_mul(space, A: dict, B: dict, alpha) -> dict:
    """(sum a_p T^p)(sum b_q T^q) with T = alpha*tau and [T, b] = alpha * db."""
    out: dict = {}
    for p, a in A.items():
        for q, b in B.items():
            db = b
            for k in range(p + 1):
                if k:
                    db = translation(space, db)
                    if not db:
                        break
                c = math.comb(p, k) * alpha ** k
                prod = nth_product(space, a, -1, db)
                if prod:
                    tgt = out.setdefault(p + q - k, {})
                    add_scaled(tgt, prod, c)
    return {p: v for p, v in out.items() if v}


def _tp_add(A: dict, B: dict, c=1) -> dict:
    out = {p: dict(v) for p, v in A.items()}
    for p, v in B.items():
        add_scaled(out.setdefault(p, {}), v, c)
    return {p: v for p, v in out.items() if v}


def _b_entry(P: PartitionData, space, u: int, v: int, i: int, j: int) -> dict:
    """T_{i,j} of the (u, v) entry of B, as a polynomial in T = alpha_1 tau."""
    dom = space.dom
    vac = space.vacuum()
    out: dict = {}
    if u == v and i == j:
        out[1] = dict(vac)
    if v == u + 1:
        if i == j:
            out[0] = scale_vec(vac, -1)
        return out
    if u >= v:
        a, b = P.index(u, i), P.index(v, j)
        if a is not None and b is not None:
            st = gen_state(space, 0, (E_, a, b))
            out[0] = _tp_add(out, {0: st}).get(0, st)
    return out


def cdet_expansion(P: PartitionData, space: ModuleSpace, rule: str = "hom") -> dict:
    """T applied to cdet(B): {(a, b): {power of alpha_1 tau: state}}.

    ``rule`` selects how T splits a product: "paper" uses
    T_ij(xy) = sum_r T_ri(x) T_jr(y); "hom" uses T_ij(xy) = sum_r T_rj(x) T_ir(y).
    """
    l, q1 = P.l, P.q[0]
    alpha = P.alpha_in(space.dom, 1)
    idx = range(1, q1 + 1)
    ent = {(u, v): {(i, j): _b_entry(P, space, u, v, i, j) for i in idx for j in idx}
           for u in range(1, l + 1) for v in range(1, l + 1)}

    def mat_mul(X, Y):
        Z = {}
        for i in idx:
            for j in idx:
                acc_: dict = {}
                for r in idx:
                    if rule == "paper":
                        x, y = X[(r, i)], Y[(j, r)]
                    elif rule == "hom":
                        x, y = X[(r, j)], Y[(i, r)]
                    else:
                        raise ValueError(rule)
                    if x and y:
                        acc_ = _tp_add(acc_, _tp_mul(space, x, y, alpha))
                Z[(i, j)] = acc_
        return Z

    total = {(i, j): {} for i in idx for j in idx}
    for perm in itertools.permutations(range(1, l + 1)):
        sign = _perm_sign(perm)
        mats = [ent[(perm[c], c + 1)] for c in range(l)]
        if any(all(not e for e in M.values()) for M in mats):
            continue
        prod = mats[-1]
        for M in reversed(mats[:-1]):
            prod = mat_mul(M, prod)
        for key in total:
            total[key] = _tp_add(total[key], prod[key], sign)
    return total


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j] - 1
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cdet_generators(P: PartitionData, space: ModuleSpace, rule: str = "hom",
                    transpose: bool = False) -> dict:
    """{(r, i, j): WGen} for 1 <= r <= l and 1 <= i, j <= n_1 - n_2."""
    exp = cdet_expansion(P, space, rule)
    l, top = P.l, P.na(1) - P.na(2)
    out = {}
    for r in range(0, l + 1):
        for i in range(1, top + 1):
            for j in range(1, top + 1):
                key = (j, i) if transpose else (i, j)
                st = exp[key].get(l - r, {})
                out[(r, i, j)] = WGen(f"W~{r}[{i},{j}]", r, i, j, "parabolic", st)
    return out


# ---------------------------------------------------------------- Miura map

def miura_project(P: PartitionData, u: dict, target: ModuleSpace) -> dict:
    """Kill E_ij with col(i) != col(j) and all psi; move diagonal blocks to slots."""
    col = P.col
    out: dict = {}
    for mono, c in u.items():
        facs = mono[0]
        if any(lab[0] == PSI or col[lab[1]] != col[lab[2]] for _, lab in facs):
            continue
        vec = target.vacuum()
        for m, lab in reversed(facs):
            s = col[lab[1]]
            off = sum(P.q[: s - 1])
            vec = target.apply_mode(s - 1, (E_, lab[1] - off, lab[2] - off), -m, vec)
        add_scaled(out, vec, c)
    return out


def eq_W1(P: PartitionData, i: int, j: int, target: ModuleSpace) -> dict:
    """sum_{s <= b_1} e_{(s-1)q_1+i,(s-1)q_1+j}[-1] read in the Miura frame."""
    out: dict = {}
    for s in range(1, P.b[0] + 1):
        add_scaled(out, gen_state(target, s - 1, (E_, i, j)), 1)
    return out


def eq_W2_rectangular(P: PartitionData, i: int, j: int, target: ModuleSpace) -> dict:
    """alpha_1 sum (s-1) e^{(s)}_{ij}[-2] + sum_{r1<r2, t} e^{(r1)}_{t,i} e^{(r2)}_{j,t}
    (all parities even); only meaningful for rectangular partitions."""
    dom = target.dom
    out: dict = {}
    for s in range(1, P.l + 1):
        if s > 1:
            add_scaled(out, gen_state(target, s - 1, (E_, i, j), 2),
                       (s - 1) * P.alpha_in(dom, 1))
    for r1 in range(1, P.l + 1):
        for r2 in range(r1 + 1, P.l + 1):
            for t in range(1, P.q[0] + 1):
                a = gen_state(target, r1 - 1, (E_, t, i))
                b = gen_state(target, r2 - 1, (E_, j, t))
                add_scaled(out, nth_product(target, a, -1, b), 1)
    return out


# ---------------------------------------------------------------- d0

class D0:
    """The odd differential on V(a), fixed on generators by its action on
    E_ij[-1], commuting with translation, extended by the super Leibniz rule
    over PBW monomials.  d0(psi_ij) is the sum of psi_ir psi_rj over columns
    strictly between, scaled by ``psi_sign``."""

    def __init__(self, P: PartitionData, space: ModuleSpace, perturb=None,
                 psi_sign: int = 1):
        self.P, self.space = P, space
        self.psi_sign = psi_sign
        self.perturb = perturb or {}
        self._gen: dict = {}
        self._mono: dict = {}

    def generator_image(self, lab, m: int = 1) -> dict:
        key = (lab, m)
        if key in self._gen:
            return self._gen[key]
        if lab[0] == PSI and m == 1:
            res = self._psi1(lab[1], lab[2])
        elif m == 1:
            res = self._ee1(lab[1], lab[2])
        else:
            res = translation(self.space, self.generator_image(lab, m - 1))
            res = scale_vec(res, self.space.dom.one / (m - 1)) if res else res
        self._gen[key] = res
        return res

    def _ee1(self, i: int, j: int) -> dict:
        P, sp = self.P, self.space
        col, N = P.col, P.N
        out: dict = {}
        for r in range(1, N + 1):
            if col[i] > col[r] >= col[j]:
                psi = gen_state(sp, 0, (PSI, i, r))
                add_scaled(out, sp.apply_mode(0, (E_, r, j), -1, psi), 1)
            if col[j] < col[r] <= col[i]:
                e = gen_state(sp, 0, (E_, i, r))
                add_scaled(out, sp.apply_mode(0, (PSI, r, j), -1, e), -1)
        if col[i] > col[j]:
            coeff = P.alpha_in(sp.dom, col[i]) + self.perturb.get("alpha", 0)
            add_scaled(out, gen_state(sp, 0, (PSI, i, j), 2), coeff)
        ih = P.hat.get(i)
        if ih is not None and col[ih] > col[j]:
            add_scaled(out, gen_state(sp, 0, (PSI, ih, j)), 1)
        jt = P.tilde.get(j)
        if jt is not None and col[i] > col[jt]:
            add_scaled(out, gen_state(sp, 0, (PSI, i, jt)), -1)
        return out

    def _psi1(self, i: int, j: int) -> dict:
        out: dict = {}
        if not self.psi_sign:
            return out
        col, sp = self.P.col, self.space
        for r in col:
            if col[i] > col[r] > col[j]:
                st = sp.apply_mode(0, (PSI, i, r), -1, gen_state(sp, 0, (PSI, r, j)))
                add_scaled(out, st, self.psi_sign)
        return out

    def __call__(self, u: dict) -> dict:
        out: dict = {}
        for mono, c in u.items():
            r = self.apply_mono(mono)
            if r:
                add_scaled(out, r, c)
        return out

    def apply_mono(self, mono) -> dict:
        hit = self._mono.get(mono)
        if hit is not None:
            return hit
        sp = self.space
        facs = mono[0]
        if not facs:
            res: dict = {}
        else:
            (m, lab), rest = facs[0], ((facs[1:]),)
            res = {}
            dx = self.generator_image(lab, m)
            if dx:
                add_scaled(res, nth_product(sp, dx, -1, {rest: 1}), 1)
            dr = self.apply_mono(rest)
            if dr:
                sign = -1 if lab[0] == PSI else 1
                add_scaled(res, sp.apply_mode(0, lab, -m, dr), sign)
        self._mono[mono] = res
        return res


# ---------------------------------------------------------------- OPE bases

class NormalOrderedBasis:
    """Normally ordered monomials g1_(-m1) ... gr_(-mr)|0> in a set of strong
    generators, with exact elimination to express states in them."""

    def __init__(self, space: ModuleSpace, gens: dict, weights: dict):
        self.space, self.gens, self.weights = space, gens, weights
        self._levels: dict = {}
        self._states: dict = {}

    def candidates(self, wt: int) -> list:
        parts = []
        names = sorted(self.gens)
        items = [(g, m) for g in names for m in range(1, wt + 1)
                 if self.weights[g] + m - 1 <= wt]
        out = []

        def rec(start, remaining, cur):
            if remaining == 0:
                out.append(tuple(cur))
                return
            for idx in range(start, len(items)):
                g, m = items[idx]
                w = self.weights[g] + m - 1
                if w <= remaining:
                    cur.append((g, m))
                    rec(idx, remaining - w, cur)
                    cur.pop()

        rec(0, wt, [])
        del parts
        return out

    def state(self, cand: tuple) -> dict:
        hit = self._states.get(cand)
        if hit is not None:
            return hit
        if not cand:
            st = self.space.vacuum()
        else:
            (g, m), rest = cand[0], cand[1:]
            st = nth_product(self.space, self.gens[g], -m, self.state(rest))
        self._states[cand] = st
        return st

    def level(self, wt: int):
        if wt not in self._levels:
            self._levels[wt] = self._eliminate(self.candidates(wt))
        return self._levels[wt]

    def _eliminate(self, cands: list):
        dom = self.space.dom
        pivots = []          # (mono, row, track)
        dependent = []
        for idx, cand in enumerate(cands):
            row = dict(self.state(cand))
            track = {idx: dom.one}
            self._reduce(row, track, pivots)
            if not row:
                dependent.append(cand)
                continue
            choice = None
            for mono in sorted(row, key=lambda m: (mono_weight(m), m)):
                inv = dom.unit_inverse(row[mono])
                if inv is not None:
                    choice = (mono, inv)
                    break
            if choice is None:
                raise ArithmeticError("no invertible pivot available in this domain")
            mono, inv = choice
            pivots.append((mono, scale_vec(row, inv), scale_vec(track, inv)))
        return cands, pivots, dependent

    @staticmethod
    def _reduce(row: dict, track: dict, pivots, coeffs: dict | None = None):
        for mono, prow, ptrack in pivots:
            c = row.get(mono)
            if c is None:
                continue
            add_scaled(row, prow, -c)
            add_scaled(track, ptrack, -c)
            if coeffs is not None:
                add_scaled(coeffs, ptrack, c)

    def express(self, target: dict, wt: int):
        """Coefficients {candidate: c} with target = sum c * state, or None."""
        cands, pivots, _ = self.level(wt)
        row = dict(target)
        coeffs: dict = {}
        self._reduce(row, {}, pivots, coeffs)
        if row:
            return None
        return {cands[i]: c for i, c in coeffs.items() if c != 0}


def ope_coefficients(space: ModuleSpace, gens: dict, weights: dict, pairs=None):
    """For each ordered pair of generators, the singular products expressed in
    normally ordered monomials.  Returns ({(g, h, s): coeffs or None}, basis)."""
    basis = NormalOrderedBasis(space, gens, weights)
    table = {}
    names = sorted(gens)
    pairs = pairs or [(g, h) for g in names for h in names]
    for g, h in pairs:
        top = weights[g] + weights[h]
        for s in range(0, top):
            st = nth_product(space, gens[g], s, gens[h])
            wt = top - s - 1
            table[(g, h, s)] = basis.express(st, wt) if st else {}
    return table, basis


@dataclass
class EmbReport:
    ok: bool
    partition: str
    rectangular: str
    level_shift: int
    compared: int
    mismatches: list = field(default_factory=list)
    dependent: list = field(default_factory=list)


def emb_check(P: PartitionData, dom, gamma_perturb=0, max_pairs=None) -> EmbReport:
    """Compare OPE tables of {W1, W2 + gamma_1 dW1} (block 1..n1-n2) for P with
    those of the cdet generators of the rectangular partition at shifted level."""
    if len(P.b) == 0 or P.b[0] != 2:
        raise ValueError("emb_check needs b_1 = 2")
    m = P.na(1) - P.na(2)
    shift = P.na(2) + sum(P.q[2:])
    R = PartitionData((m, m))
    # frame A: Miura frame of P (columns beyond the first two never enter)
    spA = miura_space(P, dom)
    gamma = P.gamma_in(dom, 1) + gamma_perturb
    gensA, gensB, weights = {}, {}, {}
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            gensA[("W1", i, j)] = build_W1(P, i, j, spA).state
            gensA[("W2", i, j)] = build_W2_shifted(P, i, j, spA, gamma).state
            weights[("W1", i, j)] = 1
            weights[("W2", i, j)] = 2
    # frame B: rectangular partition at level k + shift, projected to its Miura frame
    domB = dom.shifted(shift)
    spR = parabolic_space(R, domB, odd=False)
    spB = miura_space(R, domB)
    tilde = cdet_generators(R, spR)
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            gensB[("W1", i, j)] = miura_project(R, tilde[(1, i, j)].state, spB)
            gensB[("W2", i, j)] = miura_project(R, tilde[(2, i, j)].state, spB)
    names = sorted(gensA)
    pairs = [(g, h) for g in names for h in names]
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    tabA, basA = ope_coefficients(spA, gensA, weights, pairs)
    tabB, basB = ope_coefficients(spB, gensB, weights, pairs)
    mism = []
    for key in tabA:
        a, b = tabA[key], tabB[key]
        if a is None or b is None or not _coeffs_equal(a, b):
            mism.append({"pair": [list(key[0]), list(key[1])], "product": key[2],
                         "left_in_span": a is not None, "right_in_span": b is not None})
    dep = [str(c) for lvl in basA._levels.values() for c in lvl[2]]
    return EmbReport(not mism, str(P), str(R), shift, len(tabA), mism, dep)


def _coeffs_equal(a: dict, b: dict) -> bool:
    keys = set(a) | set(b)
    return all((a.get(k, 0) - b.get(k, 0)) == 0 for k in keys)


# ---------------------------------------------------------------- d0 report

@dataclass
class DzeroReport:
    ok: bool
    partition: str
    closure: list = field(default_factory=list)   # (name, residue text) per W~
    square: list = field(default_factory=list)    # (generator text, residue text)
    checked_square: int = 0

    @property
    def failures(self) -> list:
        return [c for c in self.closure if c[1] != "0"] + [c for c in self.square if c[1] != "0"]


def dzero_check(P: PartitionData, dom, max_weight: int = 3, perturb=None,
                rule: str = "hom") -> DzeroReport:
    """d0 kills every W~(r)_{ij}; d0 o d0 kills every generator mode
    E[-m], psi[-m] with m <= max_weight."""
    sp = parabolic_space(P, dom, odd=True)
    d = D0(P, sp, perturb)
    closure = []
    for key, g in sorted(cdet_generators(P, sp, rule).items()):
        r = d(g.state)
        closure.append((g.label, vec_text(r, dom) if r else "0"))
    square = []
    labels = sp.slots[0].labels
    for lab in labels:
        for m in range(1, max_weight + 1):
            st = gen_state(sp, 0, lab, m)
            r = d(d(st))
            square.append((mono_text(next(iter(st))), vec_text(r, dom) if r else "0"))
    ok = all(t == "0" for _, t in closure) and all(t == "0" for _, t in square)
    return DzeroReport(ok, str(P), closure, square, len(square))


__all__ = [
    "WGen", "miura_space", "parabolic_space", "build_W1", "build_W2",
    "build_W2_shifted", "cdet_generators", "cdet_expansion", "miura_project",
    "eq_W1", "eq_W2_rectangular", "D0", "NormalOrderedBasis", "ope_coefficients",
    "emb_check", "EmbReport", "block_of", "ope", "dzero_check", "DzeroReport",
]
