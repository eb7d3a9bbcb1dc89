import pytest

from yangw.liealg import (
    CTILDE, E, GLAffine, InnerProduct, Psi, SuperParabolic, bracket, build_partition,
    pairing,
)
from yangw.scalars import K, ratfunc


def test_loop_bracket_has_central_term():
    out = bracket(E(1, 2, 1), E(2, 1, -1), GLAffine(2))
    assert out == {E(1, 1, 0): 1, E(2, 2, 0): -1, CTILDE: 1}


def test_central_and_odd_brackets_vanish():
    P = build_partition("2,1")
    assert bracket(CTILDE, E(1, 2, 3), GLAffine(2)) == {}
    assert bracket(Psi(3, 1, -1), Psi(3, 1, -1), SuperParabolic(P)) == {}


def test_partition_21():
    P = build_partition([2, 1])
    assert P.N == 3
    assert [P.col[i] for i in (1, 2, 3)] == [1, 1, 2]
    assert [P.row[i] for i in (1, 2, 3)] == [1, 2, 2]
    assert P.hat == {2: 3}


def test_single_column_and_levels():
    P = build_partition("3")
    assert P.l == 1 and P.f == []
    P = build_partition("4,1")
    assert (P.n, P.b) == ((4, 1), (1, 2))
    assert P.alpha(1) == K + 1 and P.alpha(2) == K + 4
    assert P.gamma(1) == P.alpha(2)


def test_bad_partitions():
    with pytest.raises(ValueError):
        build_partition("1,2")
    with pytest.raises(ValueError):
        build_partition("0")


def test_pairings():
    P = build_partition("2,2")
    ks = InnerProduct("kappa_s", P, 1)
    assert pairing(ks, E(1, 2), E(2, 1)) == P.alpha(1)
    assert pairing(ks, E(1, 1), E(2, 2)) == ratfunc(1)
    kt = InnerProduct("kappa_b_tilde", build_partition("1,1"))
    assert pairing(kt, E(1, 1), Psi(2, 1)) == 0
