import pytest
from hypothesis import given, strategies as st

from yangw.liealg import build_partition
from yangw.modact import add_scaled, vec_text
from yangw.scalars import ExactDomain
from yangw.vertex import gen_state, normal_product, translation
from yangw.walgebra import (
    D0, build_W1, build_W2, build_W2_shifted, cdet_generators, dzero_check, emb_check,
    eq_W1, eq_W2_rectangular, miura_project, miura_space, parabolic_space,
)


def _sum(*vecs):
    out = {}
    for c, v in vecs:
        add_scaled(out, v, c)
    return out


def test_w1_examples(dom):
    P = build_partition("1,1")
    sp = miura_space(P, dom)
    assert build_W1(P, 1, 1, sp).state == _sum((1, gen_state(sp, 0, (0, 1, 1))),
                                               (1, gen_state(sp, 1, (0, 1, 1))))
    P = build_partition("3")
    sp = miura_space(P, dom)
    assert build_W1(P, 1, 2, sp).state == gen_state(sp, 0, (0, 1, 2))
    P = build_partition("4,1")
    sp = miura_space(P, dom)
    # row 1 sits above the one-box second column
    assert build_W1(P, 1, 1, sp).state == gen_state(sp, 0, (0, 1, 1))
    assert build_W1(P, 4, 4, sp).state == _sum((1, gen_state(sp, 0, (0, 4, 4))),
                                               (1, gen_state(sp, 1, (0, 1, 1))))


def test_w2_examples(dom):
    P = build_partition("1,1")
    sp = miura_space(P, dom)
    e1, e2 = gen_state(sp, 0, (0, 1, 1)), gen_state(sp, 1, (0, 1, 1))
    want = _sum((-P.gamma_in(dom, 1), gen_state(sp, 0, (0, 1, 1), 2)),
                (1, normal_product(sp, e1, e2)))
    assert build_W2(P, 1, 1, sp).state == want
    P = build_partition("3")
    sp = miura_space(P, dom)
    # a single column has no r1 < r2 pairs and gamma_1 = 0
    w2 = build_W2(P, 1, 2, sp).state
    assert all(len(m[0]) == 2 for m in w2)


def test_cdet_11_oracle(dom):
    P = build_partition("1,1")
    spb = parabolic_space(P, dom, odd=False)
    g = cdet_generators(P, spb)
    e = lambda i, j, m=1: gen_state(spb, 0, (0, i, j), m)
    assert g[(0, 1, 1)].state == spb.vacuum()
    assert g[(1, 1, 1)].state == _sum((1, e(1, 1)), (1, e(2, 2)))
    want = _sum((P.alpha_in(dom, 1), e(2, 2, 2)), (1, normal_product(spb, e(1, 1), e(2, 2))),
                (1, e(2, 1)))
    assert g[(2, 1, 1)].state == want


def test_single_column_cdet(dom):
    P = build_partition("2")
    spb = parabolic_space(P, dom, odd=False)
    g = cdet_generators(P, spb)
    assert g[(1, 1, 2)].state == gen_state(spb, 0, (0, 1, 2))
    assert g[(0, 1, 1)].state == spb.vacuum() and g[(0, 1, 2)].state == {}


def test_miura_projection_11(dom):
    P = build_partition("1,1")
    spb = parabolic_space(P, dom, odd=False)
    sp = miura_space(P, dom)
    w2 = miura_project(P, cdet_generators(P, spb)[(2, 1, 1)].state, sp)
    e1, e2 = gen_state(sp, 0, (0, 1, 1)), gen_state(sp, 1, (0, 1, 1))
    assert w2 == _sum((P.alpha_in(dom, 1), gen_state(sp, 1, (0, 1, 1), 2)),
                      (1, normal_product(sp, e1, e2)))
    assert w2 == eq_W2_rectangular(P, 1, 1, sp)
    assert miura_project(P, gen_state(spb, 0, (0, 2, 1)), sp) == {}


@pytest.mark.parametrize("q", ["1,1", "2,2", "3,3", "2,1", "4,1", "2,2,1", "4,4,1", "2,2,2"])
def test_miura_of_w1_matches_display(q):
    dom = ExactDomain()
    P = build_partition(q)
    spb = parabolic_space(P, dom, odd=False)
    sp = miura_space(P, dom)
    g = cdet_generators(P, spb)
    top = P.na(1) - P.na(2)
    for i in range(1, top + 1):
        for j in range(1, top + 1):
            assert miura_project(P, g[(1, i, j)].state, sp) == eq_W1(P, i, j, sp)


@pytest.mark.parametrize("q", ["2,2", "3,3", "2,2,2"])
def test_miura_of_w2_is_shifted_w2(q):
    """mu(W~2_ij) = W2_ij + gamma_1 dW1_ij on the leading block."""
    dom = ExactDomain()
    P = build_partition(q)
    spb = parabolic_space(P, dom, odd=False)
    sp = miura_space(P, dom)
    g = cdet_generators(P, spb)
    top = P.na(1) - P.na(2)
    for i in range(1, top + 1):
        for j in range(1, top + 1):
            assert miura_project(P, g[(2, i, j)].state, sp) == build_W2_shifted(P, i, j, sp).state


def test_d0_examples(dom):
    P = build_partition("1,1")
    sp = parabolic_space(P, dom)
    d = D0(P, sp)
    psi = gen_state(sp, 0, (1, 2, 1))
    assert d(gen_state(sp, 0, (0, 1, 1))) == psi
    assert d(gen_state(sp, 0, (0, 2, 2))) == {k: -v for k, v in psi.items()}
    assert d(sp.vacuum()) == {}
    g = cdet_generators(P, sp)
    assert all(d(w.state) == {} for w in g.values())


def test_d0_cancellation_11(dom):
    """Shifting the alpha in d0(E_21[-1]) by delta leaves delta psi_21[-2]."""
    P = build_partition("1,1")
    sp = parabolic_space(P, dom)
    w2 = cdet_generators(P, sp)[(2, 1, 1)].state
    for delta in (1, 5, -3):
        d = D0(P, sp, perturb={"alpha": delta})
        assert d(w2) == {k: delta * v for k, v in gen_state(sp, 0, (1, 2, 1), 2).items()}


@pytest.mark.parametrize("q", ["1,1", "2,2", "2,1", "3,3", "3,2", "2,2,2"])
def test_dzero_closure(q):
    rep = dzero_check(build_partition(q), ExactDomain(), max_weight=2)
    assert rep.ok, rep.failures[:3]


@given(st.sampled_from(["2,1", "2,2", "3,2,1", "2,2,2"]), st.data())
def test_d0_squares_to_zero_on_generators(q, data):
    dom = ExactDomain()
    P = build_partition(q)
    sp = parabolic_space(P, dom)
    lab = data.draw(st.sampled_from(sp.slots[0].labels))
    m = data.draw(st.integers(1, 3))
    d = D0(P, sp)
    assert d(d(gen_state(sp, 0, lab, m))) == {}


def test_d0_commutes_with_translation(dom):
    P = build_partition("2,1")
    sp = parabolic_space(P, dom)
    d = D0(P, sp)
    for lab in sp.slots[0].labels:
        u = gen_state(sp, 0, lab)
        assert d(translation(sp, u)) == translation(sp, d(u))


def test_emb_trivial_and_control(dom):
    assert emb_check(build_partition("1,1"), dom).ok
    assert emb_check(build_partition("2,2"), dom).ok
    bad = emb_check(build_partition("2,2"), dom, gamma_perturb=1)
    assert not bad.ok and bad.mismatches


def test_emb_needs_two_leading_columns(dom):
    with pytest.raises(ValueError):
        emb_check(build_partition("4,1"), dom)


@pytest.mark.parametrize("sign", [0, -1])
def test_psi_term_needed_for_d0_squared(sign, dom):
    P = build_partition("3,2,1")
    sp = parabolic_space(P, dom)
    d = D0(P, sp, psi_sign=sign)
    assert any(d(d(gen_state(sp, 0, lab, 1))) for lab in sp.slots[0].labels)
