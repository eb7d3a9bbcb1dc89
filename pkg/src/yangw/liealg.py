"""Structure constants, invariant forms and partition bookkeeping.

Generators carry global or slot-local matrix indices (1-based).  The engine
works with compact labels ``(kind, i, j)`` where kind 0 is an even ``E`` and
kind 1 is an odd ``psi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .scalars import K, RatFunc, ratfunc

EVEN, ODD = 0, 1


# ---------------------------------------------------------------- partitions

@dataclass(frozen=True)
class PartitionData:
    q: tuple

    def __post_init__(self):
        q = tuple(int(x) for x in self.q)
        if not q or any(x <= 0 for x in q):
            raise ValueError("partition parts must be positive")
        if any(a < b for a, b in zip(q, q[1:])):
            raise ValueError(f"partition {q} is not weakly decreasing")
        object.__setattr__(self, "q", q)

    @property
    def N(self) -> int:
        return sum(self.q)

    @property
    def l(self) -> int:
        return len(self.q)

    def qs(self, s: int) -> int:
        """q_s with q_{l+1} = 0."""
        return self.q[s - 1] if 1 <= s <= self.l else 0

    @cached_property
    def col(self) -> dict:
        out, i = {}, 0
        for s, qs in enumerate(self.q, start=1):
            for _ in range(qs):
                i += 1
                out[i] = s
        return out

    @cached_property
    def row(self) -> dict:
        out = {}
        for i, s in self.col.items():
            before = sum(self.q[: s - 1])
            out[i] = i - before + self.q[0] - self.q[s - 1]
        return out

    def index(self, s: int, row: int):
        """Global index in column s with the given row, or None."""
        if s < 1 or s > self.l:
            return None
        local = row - (self.q[0] - self.q[s - 1])
        if local < 1 or local > self.q[s - 1]:
            return None
        return sum(self.q[: s - 1]) + local

    @cached_property
    def hat(self) -> dict:
        return {j: h for j in self.col
                if (h := self.index(self.col[j] + 1, self.row[j])) is not None}

    @cached_property
    def tilde(self) -> dict:
        return {j: t for j in self.col
                if (t := self.index(self.col[j] - 1, self.row[j])) is not None}

    @property
    def f(self) -> list:
        return [(h, j) for j, h in sorted(self.hat.items())]

    @cached_property
    def blocks(self) -> tuple:
        """(n_1 > ... > n_v) and (b_1 < ... < b_v)."""
        n, b = [], []
        for s, qs in enumerate(self.q, start=1):
            if n and n[-1] == qs:
                b[-1] = s
            else:
                n.append(qs)
                b.append(s)
        return tuple(n), tuple(b)

    @property
    def n(self) -> tuple:
        return self.blocks[0]

    @property
    def b(self) -> tuple:
        return self.blocks[1]

    @property
    def v(self) -> int:
        return len(self.n)

    def na(self, a: int) -> int:
        """n_a with n_{v+1} = 0."""
        return self.n[a - 1] if 1 <= a <= self.v else 0

    def factor_size(self, a: int) -> int:
        return self.na(a) - self.na(a + 1)

    def active_factors(self) -> list:
        """Blocks whose affine Yangian factor sl(n_a - n_{a+1}) has rank >= 3."""
        return [a for a in range(1, self.v + 1) if self.factor_size(a) >= 3]

    # levels: alpha_s = k + N - q_s, gamma_a = sum_{u>a} alpha_u
    def alpha_offset(self, s: int) -> int:
        return self.N - self.q[s - 1]

    def alpha(self, s: int) -> RatFunc:
        return K + self.alpha_offset(s)

    def gamma(self, a: int) -> RatFunc:
        return sum((self.alpha(u) for u in range(a + 1, self.l + 1)), ratfunc(0))

    def alpha_in(self, dom, s: int):
        return dom.k + self.alpha_offset(s)

    def gamma_in(self, dom, a: int):
        out = dom.zero
        for u in range(a + 1, self.l + 1):
            out = out + dom.k + self.alpha_offset(u)
        return out

    def eps_offset(self) -> int:
        """eps = hbar*(k + N - q_l) is recorded as the offset N - q_l."""
        return self.N - self.q[-1]

    def slot_shift(self, s: int) -> int:
        """Global index p of slot s corresponds to local p - (q_1 - q_s)."""
        return self.q[0] - self.q[s - 1]

    def to_local(self, s: int, p: int):
        loc = p - self.slot_shift(s)
        return loc if 1 <= loc <= self.q[s - 1] else None

    def __str__(self):
        return ",".join(map(str, self.q))


def build_partition(q) -> PartitionData:
    if isinstance(q, str):
        q = [int(x) for x in q.replace(" ", "").split(",") if x]
    return PartitionData(tuple(q))


# ---------------------------------------------------------------- generators

@dataclass(frozen=True, order=True)
class Generator:
    kind: str            # "E", "psi", "ctilde", "z", "one"
    i: int = 0
    j: int = 0
    mode: int = 0

    @property
    def parity(self) -> int:
        return ODD if self.kind == "psi" else EVEN

    @property
    def central(self) -> bool:
        return self.kind in ("ctilde", "z", "one")

    def __str__(self):
        if self.central:
            return {"ctilde": "c~", "z": "z", "one": "1"}[self.kind]
        return f"{self.kind}({self.i},{self.j},{self.mode})"


def E(i, j, m=0) -> Generator:
    return Generator("E", i, j, m)


def Psi(i, j, m=0) -> Generator:
    return Generator("psi", i, j, m)


CTILDE = Generator("ctilde")
ZCENT = Generator("z")
ONE = Generator("one")


class GLAffine:
    """Affine gl(n) with formal central elements c~ and z."""

    def __init__(self, n: int):
        self.n = n

    def check(self, x: Generator):
        if x.central:
            return
        if x.kind != "E" or not (1 <= x.i <= self.n and 1 <= x.j <= self.n):
            raise ValueError(f"{x} is not a generator of affine gl({self.n})")

    def central_part(self, x, y) -> dict:
        u = x.mode
        out = {}
        if x.i == y.j and x.j == y.i:
            out[CTILDE] = ratfunc(u)
        if x.i == x.j and y.i == y.j:
            out[ZCENT] = ratfunc(u)
        return out


class SuperParabolic:
    """The superalgebra a = b + span(psi_ij, col(i) > col(j)), affinised with
    the form kappa_b~ (psi pairs to zero).  With ``odd=False`` it is b."""

    def __init__(self, P: PartitionData, odd: bool = True):
        self.P = P
        self.odd = odd

    def check(self, x: Generator):
        if x.central:
            return
        col = self.P.col
        if x.i not in col or x.j not in col:
            raise ValueError(f"{x}: index out of range")
        if x.kind == "E" and col[x.i] >= col[x.j]:
            return
        if x.kind == "psi" and self.odd and col[x.i] > col[x.j]:
            return
        raise ValueError(f"{x} is not in the algebra")

    def central_part(self, x, y) -> dict:
        if x.kind != "E" or y.kind != "E":
            return {}
        val = kappa_b(self.P, x, y)
        return {ONE: val * x.mode} if val else {}


def _finite_bracket(x: Generator, y: Generator) -> list:
    """[x, y] in gl(N) (+ psi); returns [(kind, i, j, coeff)]."""
    if x.kind == "psi" and y.kind == "psi":
        return []
    if x.kind == "E" and y.kind == "E":
        kind = "E"
    elif x.kind == "E":
        kind = "psi"
    else:
        # [psi, E] = -[E, psi]
        return [(k, i, j, -c) for k, i, j, c in _finite_bracket(y, x)]
    out = []
    if x.j == y.i:
        out.append((kind, x.i, y.j, 1))
    if x.i == y.j:
        out.append((kind, y.i, x.j, -1))
    return out


def bracket(x: Generator, y: Generator, ambient) -> dict:
    """Super-bracket of two generator modes (central elements included)."""
    ambient.check(x)
    ambient.check(y)
    if x.central or y.central:
        return {}
    out: dict = {}
    for kind, i, j, c in _finite_bracket(x, y):
        g = Generator(kind, i, j, x.mode + y.mode)
        out[g] = out.get(g, 0) + ratfunc(c)
    if x.mode + y.mode == 0 and x.mode != 0:
        for g, c in ambient.central_part(x, y).items():
            out[g] = out.get(g, 0) + c
    return {g: c for g, c in out.items() if c}


# ---------------------------------------------------------------- forms

@dataclass(frozen=True)
class InnerProduct:
    tag: str                       # gl_N, kappa_s, kappa_b, kappa_b_tilde
    P: PartitionData | None = None
    s: int = 0


def kappa_b(P: PartitionData, x: Generator, y: Generator) -> RatFunc:
    val = ratfunc(0)
    if x.i == y.j and y.i == x.j:
        val += P.alpha(P.col[x.i])
    if x.i == x.j and y.i == y.j:
        val += 1
    return val


def pairing(ip: InnerProduct, x: Generator, y: Generator) -> RatFunc:
    if x.central or y.central:
        raise ValueError("pairing is defined on non-central generators")
    if ip.tag == "kappa_b_tilde":
        if x.kind == "psi" or y.kind == "psi":
            return ratfunc(0)
    elif x.kind != "E" or y.kind != "E":
        raise ValueError(f"{ip.tag} does not pair odd generators")
    delta_cross = x.i == y.j and y.i == x.j
    delta_diag = x.i == x.j and y.i == y.j
    if ip.tag == "gl_N":
        return K * delta_cross + delta_diag
    if ip.tag == "kappa_s":
        return ip.P.alpha(ip.s) * delta_cross + delta_diag
    if ip.tag in ("kappa_b", "kappa_b_tilde"):
        col = ip.P.col
        for g in (x, y):
            if col[g.i] < col[g.j]:
                raise ValueError(f"{g} is not in b")
        return kappa_b(ip.P, x, y)
    raise ValueError(f"unknown inner product {ip.tag!r}")


# ---------------------------------------------------------------- engine tables

@dataclass
class SlotAlgebra:
    """Everything the module engine needs for one tensor slot: labels, parity,
    integer structure constants and the (domain-valued) central pairing."""

    name: str
    labels: list
    bracket: dict = field(default_factory=dict)   # (x, y) -> ((z, c), ...)
    form: dict = field(default_factory=dict)      # (x, y) -> coefficient
    size: int = 0

    def parity(self, lab) -> int:
        return lab[0]


def _tables(labels):
    br = {}
    for x in labels:
        gx = Generator("E" if x[0] == 0 else "psi", x[1], x[2])
        for y in labels:
            gy = Generator("E" if y[0] == 0 else "psi", y[1], y[2])
            terms = [((0 if kd == "E" else 1, i, j), c)
                     for kd, i, j, c in _finite_bracket(gx, gy)]
            if terms:
                br[(x, y)] = tuple(terms)
    return br


_GL_CACHE: dict = {}


def gl_slot(n: int, ctilde, dom) -> SlotAlgebra:
    """Affine gl(n) with z = 1 and c~ specialised to the given value."""
    if n not in _GL_CACHE:
        labels = [(0, i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
        _GL_CACHE[n] = (labels, _tables(labels))
    labels, br = _GL_CACHE[n]
    form = {}
    for x in labels:
        for y in labels:
            v = dom.zero
            hit = False
            if x[1] == y[2] and x[2] == y[1]:
                v = v + ctilde
                hit = True
            if x[1] == x[2] and y[1] == y[2]:
                v = v + 1
                hit = True
            if hit and not dom.is_zero(v):
                form[(x, y)] = v
    return SlotAlgebra(f"gl({n})", list(labels), br, form, n)


def parabolic_slot(P: PartitionData, dom, odd: bool = True) -> SlotAlgebra:
    """V(b) (``odd=False``) or V(a) with the form kappa_b~."""
    col = P.col
    labels = [(0, i, j) for i in col for j in col if col[i] >= col[j]]
    if odd:
        labels += [(1, i, j) for i in col for j in col if col[i] > col[j]]
    form = {}
    for x in labels:
        for y in labels:
            if x[0] or y[0]:
                continue
            v = dom.zero
            hit = False
            if x[1] == y[2] and x[2] == y[1]:
                v = v + P.alpha_in(dom, col[x[1]])
                hit = True
            if x[1] == x[2] and y[1] == y[2]:
                v = v + 1
                hit = True
            if hit and not dom.is_zero(v):
                form[(x, y)] = v
    name = ("a" if odd else "b") + f"[{P}]"
    return SlotAlgebra(name, labels, _tables(labels), form, P.N)


def label_text(lab) -> str:
    return ("E" if lab[0] == 0 else "psi") + f"({lab[1]},{lab[2]})"
