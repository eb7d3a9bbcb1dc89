"""The ten acceptance criteria.  Each test records one PASS/FAIL line, printed
at the end of the session (and immediately with ``-s``)."""
import pytest

from conftest import ACCEPTANCE
from yangw import cli
from yangw import yangian as ya
from yangw.liealg import build_partition
from yangw.scalars import ExactDomain, random_points
from yangw.vertex import gen_state
from yangw.walgebra import (
    D0, cdet_generators, dzero_check, emb_check, eq_W1, miura_project, miura_space,
    parabolic_space,
)

SEED = 20240601


def record(num, ok, text):
    line = f"CRITERION {num:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE[num] = line
    print(line)
    assert ok, line


def _fails(rep):
    return "; ".join(f"{r.name} @ {r.witness}" for r in rep.failures[:3])


def test_criterion_01_evaluation_map():
    im, sp = ya.ev_image(3, ExactDomain())
    rep = ya.check_homomorphism(im, sp, 3)
    record(1, rep.ok, f"ev(3), symbolic, W=3: {len(rep.results)} relation instances "
                      f"{_fails(rep)}")


def test_criterion_02_coproduct():
    im, sp = ya.delta_ev_image(3, ExactDomain())
    sym = ya.check_homomorphism(im, sp, 2)
    rnd = []
    for dom in random_points(SEED, 3):
        im, sp = ya.delta_ev_image(3, dom)
        rnd.append(ya.check_homomorphism(im, sp, 3))
    ok = sym.ok and all(r.ok for r in rnd)
    record(2, ok, f"delta_ev(3): W=2 symbolic {sym.ok}, W=3 random (seed {SEED}, 3 points) "
                  f"{[r.ok for r in rnd]}")


def test_criterion_03_psi_maps():
    dom = ExactDomain()
    im1, sp1 = ya.psi1_image(3, 1, dom)
    r1 = ya.check_homomorphism(im1, sp1, 2)
    im2, sp2 = ya.psi2_image(3, 1, dom)
    r2 = ya.check_homomorphism(im2, sp2, 2)
    cross = [ya.psi_cross_commutators(3, 3, d, 2) for d in random_points(SEED, 3)]
    ok = r1.ok and r2.ok and all(c.ok for c in cross)
    record(3, ok, f"psi1(3,1) {r1.ok}, psi2(3,1) {r2.ok} at W=2 symbolic; cross images "
                  f"for (3,3) commute at W=2 random: {[c.ok for c in cross]} "
                  f"({len(cross[0].results)} pairs)")


def test_criterion_04_delta_l_consistency():
    out = {}
    for q in ("3,3", "4,1"):
        P = build_partition(q)
        out[q] = ya.delta_l_consistency(P, ExactDomain(P.eps_offset()), 2, "negated")
    record(4, all(r.ok for r in out.values()),
           "compositional = closed form at W=2, symbolic: "
           + ", ".join(f"({q}) {r.ok}" for q, r in out.items()))


def test_criterion_05_main_identity():
    verdicts = {}
    for q, mode in (("3,3", "symbolic"), ("4,1", "random")):
        P = build_partition(q)
        doms = ([ExactDomain(P.eps_offset())] if mode == "symbolic"
                else random_points(SEED, 3, P.eps_offset()))
        verdicts[q] = {c: all(ya.main_identity_check(P, d, 2, c).ok for d in doms)
                       for c in ya.A_CONVENTIONS}
    verified = [c for c in ya.A_CONVENTIONS if all(v[c] for v in verdicts.values())]
    detail = "; ".join(f"({q}) " + ", ".join(f"{c}={'ok' if v[c] else 'fail'}" for c in v)
                       for q, v in verdicts.items())
    record(5, bool(verified), f"verified a-conventions {verified}; {detail}")


def test_criterion_06_commutativity():
    P = build_partition("7,4,1")
    reps = [ya.commutativity_check(P, d, 2, derived=True)
            for d in random_points(SEED, 3, P.eps_offset())]
    record(6, all(r.ok for r in reps),
           f"(7,4,1), W=2, random, 3 points, derived images included: "
           f"{[r.ok for r in reps]} ({len(reps[0].results)} commutators per point)")


def test_criterion_07_dzero():
    reps = {q: dzero_check(build_partition(q), ExactDomain(), max_weight=3)
            for q in ("1,1", "2,2", "2,1")}
    P = build_partition("1,1")
    dom = ExactDomain()
    sp = parabolic_space(P, dom)
    w2 = cdet_generators(P, sp)[(2, 1, 1)].state
    cancel = D0(P, sp)(w2) == {}
    residue = D0(P, sp, perturb={"alpha": 1})(w2) == gen_state(sp, 0, (1, 2, 1), 2)
    ok = all(r.ok for r in reps.values()) and cancel and residue
    record(7, ok, "closure and d0^2=0 up to weight 3: "
                  + ", ".join(f"({q}) {r.ok}" for q, r in reps.items())
                  + f"; (1,1) alpha cancellation {cancel}, residue psi21[-2] when broken {residue}")


def test_criterion_08_miura_cross_checks():
    dom = ExactDomain()
    bad = []
    parts = ("1,1", "2,2", "2,1", "3,3", "4,1", "3,2,1", "2,2,2", "4,4,1")
    for q in parts:
        P = build_partition(q)
        sp, spb = miura_space(P, dom), parabolic_space(P, dom, odd=False)
        g = cdet_generators(P, spb)
        m = P.na(1) - P.na(2) if len(P.b) > 1 else P.na(1)
        for i in range(1, m + 1):
            for j in range(1, m + 1):
                if miura_project(P, g[(1, i, j)].state, sp) != eq_W1(P, i, j, sp):
                    bad.append((q, i, j))
    emb = emb_check(build_partition("4,4,1"), dom)
    record(8, not bad and emb.ok,
           f"miura W~1 = W1 formula on {len(parts)} partitions (mismatches {bad}); "
           f"emb (4,4,1) vs ({emb.rectangular}) at level k+{emb.level_shift}: "
           f"{emb.compared} OPE coefficients, {len(emb.mismatches)} mismatches")


def test_criterion_09_centralizer():
    P = build_partition("7,4,1")
    reps = [ya.centralizer_check(P, d, 2) for d in random_points(SEED, 3, P.eps_offset())]
    record(9, all(r.ok and not r.info["vacuous"] for r in reps),
           f"(7,4,1), b1=1, W=2, random, 3 points: {[r.ok for r in reps]} "
           f"({len(reps[0].results)} commutators per point)")


CONTROLS = [
    ("relations", dict(partition="4,1", cutoff=1)),
    ("ev", dict(cutoff=1)),
    ("coproduct", dict(cutoff=1)),
    ("psi", dict(cutoff=1)),
    ("delta-l", dict(partition="4,1", cutoff=2)),
    ("main-identity", dict(partition="4,1", cutoff=2, a_convention="negated")),
    ("commutativity", dict(partition="7,4,1", cutoff=1, mode="random", points=2, seed=SEED)),
    ("centralizer", dict(partition="7,4,1", cutoff=1, mode="random", points=2, seed=SEED)),
    ("dzero", dict(partition="1,1", cutoff=3)),
    ("emb", dict(partition="2,2")),
]


def _witness(check):
    for s in check["suites"]:
        for key in ("failures", "mismatches"):
            if s.get(key):
                return s[key][0]
    return None


def test_criterion_10_negative_controls():
    caught, missed = [], []
    for name, kw in CONTROLS:
        clean = cli.run(cli.RunConfig(checks=[name], **kw))["checks"][0]
        bad = cli.run(cli.RunConfig(checks=[name], perturb=True, **kw))["checks"][0]
        if clean["ok"] and not bad["ok"] and _witness(bad) is not None:
            caught.append(name)
        else:
            missed.append(name)
    record(10, not missed, f"{len(caught)}/{len(CONTROLS)} suites fail with a witness under "
                           f"their perturbation; missed {missed}")
