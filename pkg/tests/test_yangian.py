from collections import Counter

import pytest
from hypothesis import given, strategies as st

from yangw.liealg import build_partition
from yangw.modact import IDENTITY, Mode, ZERO, lin, weak_equal, weak_zero
from yangw.scalars import ExactDomain, random_points
from yangw.walgebra import miura_space
from yangw import yangian as ya


def test_relation_count_and_families():
    rels = ya.relations(3)
    assert len(rels) == 124
    fam = Counter(r.rid for r in rels)
    assert fam == {"R1": 15, "R2": 9, "R3": 18, "R4": 36, "R5": 14, "R6": 2,
                   "R7": 2, "R8": 14, "R9": 2, "R10": 12}
    assert len(ya.relations(4)) == 226
    assert [r.name for r in rels] == [r.name for r in ya.relations(3)]
    with pytest.raises(ValueError):
        ya.relations(2)


def test_relation_instances():
    rels = {r.name: r for r in ya.relations(3)}
    x12 = rels["R2(1,2)"].expr.text()
    assert x12 == "(1) X+_{1,0} X-_{2,0} + (-1) X-_{2,0} X+_{1,0}"
    r24 = rels["R4(1,2,+,0)"].expr.text()
    assert "(1) X+_{2,0}" in r24 and "H_{1,0} X+_{2,0}" in r24


def test_ev_images(dom):
    im, sp = ya.ev_image(3, dom)
    assert weak_equal(im.base[("X+", 0, 0)], Mode(0, (0, 3, 1), 1), sp, 2).ok
    assert weak_equal(im.base[("X-", 2, 0)], Mode(0, (0, 3, 2), 0), sp, 2).ok
    assert sp.apply(im.base[("H", 1, 1)], sp.vacuum(), 2) == {}
    g = im.full()
    h00 = lin([(1, Mode(0, (0, 3, 3), 0)), (-1, Mode(0, (0, 1, 1), 0)), (dom.c, IDENTITY)])
    assert weak_equal(g[("H", 0, 0)], h00, sp, 2).ok
    h10 = lin([(1, Mode(0, (0, 1, 1), 0)), (-1, Mode(0, (0, 2, 2), 0))])
    assert weak_equal(g[("H", 1, 0)], h10, sp, 2).ok


def test_trivial_image_derives_zero(dom):
    sp = ya.gl_space([3], dom)
    base = {k: ZERO for k in ya.ev_image(3, dom)[0].base}
    im = ya.YImage(3, dom.eps, base, dom)
    assert all(weak_zero(v, sp, 1).ok for v in im.full().values())


def test_ev_perturbed_fails(dom):
    im, sp = ya.ev_image(3, dom)
    im.base[("X+", 0, 0)] = lin([(1, im.base[("X+", 0, 0)]), (1, Mode(0, (0, 1, 1), 1))])
    rep = ya.check_homomorphism(im, sp, 1, stop_early=True)
    assert not rep.ok and rep.failures[0].witness


def test_coproduct_images(dom):
    im, sp = ya.delta_ev_image(3, dom)
    prim = lin([(1, Mode(0, (0, 3, 1), 1)), (1, Mode(1, (0, 3, 1), 1))])
    assert weak_equal(im.base[("X+", 0, 0)], prim, sp, 2).ok
    e1, e2 = ya.ev(0, 3, dom, dom.zero), ya.ev(1, 3, dom, dom.zero)
    for i in (1, 2):
        assert sp.apply(ya.coproduct_tail(i, e1, e2, dom.hbar), sp.vacuum(), 2) == {}


def test_coproduct_tail_is_not_for_h_tilde(dom):
    """Reading the tail as Delta(H~) adds hbar h0 x h0 and breaks the H-H commutation family."""
    im, sp = ya.delta_ev_image(3, dom, cross=1)
    rep = ya.check_homomorphism(im, sp, 1, families={"R1"}, stop_early=True)
    assert not rep.ok


def test_psi_images(dom):
    im, sp = ya.psi2_image(3, 1, dom)
    assert weak_equal(im.base[("X+", 0, 0)], Mode(0, (0, 4, 2), 1), sp, 2).ok
    im, sp = ya.psi1_image(3, 1, dom)
    assert weak_equal(im.base[("X+", 1, 0)], Mode(0, (0, 1, 2), 0), sp, 2).ok
    assert weak_equal(im.base[("X+", 0, 0)], Mode(0, (0, 3, 1), 1), sp, 2).ok


@pytest.mark.parametrize("which", ["ev", "delta", "psi1", "psi2"])
def test_small_relation_suites(which, dom):
    im, sp = {"ev": lambda: ya.ev_image(4, dom), "delta": lambda: ya.delta_ev_image(3, dom),
              "psi1": lambda: ya.psi1_image(3, 2, dom),
              "psi2": lambda: ya.psi2_image(3, 2, dom)}[which]()
    assert ya.check_homomorphism(im, sp, 1).ok


REL3 = ya.relations(3)


@given(st.sampled_from(REL3), st.integers(0, 2**16))
def test_ev_relations_at_random_points(rel, seed):
    dom = random_points(seed, 1)[0]
    im, sp = ya.ev_image(3, dom)
    assert weak_zero(ya.relation_node(rel, im), sp, 2).ok


def test_delta_l_single_column_is_ev():
    P = build_partition("3")
    dom = ExactDomain(P.eps_offset())
    sp = miura_space(P, dom)
    params = ya.slot_params(P, dom, 1, "theorem")
    rho = ya.delta_l_compositional(P, dom, params)[1]
    ev = ya.ev(0, 3, dom, params[1])
    assert ya.compare_realizations(rho, ev, sp, 2, "l=1").ok


def test_delta_l_rectangular_is_primitive_on_x():
    P = build_partition("3,3")
    dom = ExactDomain(P.eps_offset())
    sp = miura_space(P, dom)
    rho = ya.delta_l_compositional(P, dom, ya.slot_params(P, dom, 1, "theorem"))[1]
    x = rho.image().base[("X+", 1, 0)]
    assert weak_equal(x, lin([(1, Mode(0, (0, 1, 2), 0)), (1, Mode(1, (0, 1, 2), 0))]), sp, 2).ok


@pytest.mark.parametrize("q", ["3,3", "4,1", "3,3,3"])
def test_delta_l_closed_form(q):
    P = build_partition(q)
    dom = ExactDomain(P.eps_offset())
    assert ya.delta_l_consistency(P, dom, 2).ok


def test_delta_l_needs_gaps_of_three():
    P = build_partition("3,1")
    with pytest.raises(ValueError):
        ya.delta_l_consistency(P, ExactDomain(P.eps_offset()), 1)


def test_closed_form_without_d_family_fails():
    P = build_partition("4,1")
    dom = ExactDomain(P.eps_offset())
    assert not ya.delta_l_consistency(P, dom, 2, families="BC").ok


def test_phi_images():
    P = build_partition("4,1")
    dom = ExactDomain(P.eps_offset())
    sp = miura_space(P, dom)
    im = ya.phi(P, dom, 1, sp).image()
    assert weak_equal(im.base[("X+", 1, 0)], Mode(0, (0, 1, 2), 0), sp, 2).ok
    assert weak_equal(im.base[("X+", 0, 0)], Mode(0, (0, 3, 1), 1), sp, 2).ok
    h10 = lin([(1, Mode(0, (0, 1, 1), 0)), (-1, Mode(0, (0, 2, 2), 0))])
    assert weak_equal(im.full()[("H", 1, 0)], h10, sp, 2).ok


def test_phi_single_column_is_ev():
    P = build_partition("3")
    dom = ExactDomain(P.eps_offset())
    sp = miura_space(P, dom)
    assert ya.compare_realizations(ya.phi(P, dom, 1, sp), ya.ev(0, 3, dom, dom.zero), sp, 2,
                                   "single column").ok


@pytest.mark.parametrize("q", ["3,3", "4,1"])
def test_phi_satisfies_relations(q):
    P = build_partition(q)
    dom = random_points(11, 1, P.eps_offset())[0]
    sp = miura_space(P, dom)
    assert ya.check_homomorphism(ya.phi(P, dom, 1, sp).image(), sp, 1).ok


def test_main_identity_conventions():
    P = build_partition("3,3")
    dom = ExactDomain(P.eps_offset())
    verdict = {c: ya.main_identity_check(P, dom, 2, c).ok for c in ya.A_CONVENTIONS}
    assert verdict == {"theorem": False, "proof": False, "negated-theorem": True, "negated": True}
    # the X generators agree under every convention
    rep = ya.main_identity_check(P, dom, 2, "theorem")
    assert {r.name for r in rep.failures} == {"factor 1: H_{1,1}", "factor 1: H_{2,1}"}


def test_main_identity_sign_of_w1w1_term():
    P = build_partition("4,1")
    dom = ExactDomain(P.eps_offset())
    assert not ya.main_identity_check(P, dom, 2, "negated", h_sign=1).ok
    assert not ya.main_identity_check(P, dom, 2, "negated", gamma_term=False).ok


def test_commutativity_instance():
    P = build_partition("7,4,1")
    dom = random_points(2, 1, P.eps_offset())[0]
    sp = miura_space(P, dom)
    from yangw.modact import commutator_expr
    a = ya.phi(P, dom, 1, sp).image().base[("X+", 1, 0)]
    b = ya.phi(P, dom, 2, sp).image().base[("X+", 1, 0)]
    assert weak_zero(commutator_expr(a, b), sp, 2).ok


def test_centralizer_vacuous_and_control():
    P = build_partition("4,1")
    rep = ya.centralizer_check(P, ExactDomain(P.eps_offset()), 1)
    assert rep.ok and rep.info["vacuous"]
    P = build_partition("7,4,1")
    dom = random_points(4, 1, P.eps_offset())[0]
    assert not ya.centralizer_check(P, dom, 1, mixing=True).ok


def test_closed_form_terms_shape():
    P = build_partition("4,1")
    terms = ya.closed_form_terms(P, 1, 1)
    assert {t.family for t in terms} == {"D"}
    assert len(terms) == 2
    P = build_partition("3,3")
    assert {t.family for t in ya.closed_form_terms(P, 1, 2)} == {"B"}
