from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from masure_kit import _exact as ex
from masure_kit.root_system import (AsymmetricZero, CartanKind, DiagonalNotTwo, IndexOutOfRange, NotAffine,
                                    NotInTitsCone, PositiveOffDiagonal, RealizationError, RootGeneratingSystem,
                                    WeylElement, apply_weyl, classify_type, dominant_representative,
                                    enumerate_real_roots, is_finite_type, minimal_realization, null_root,
                                    validate_gcm)

from conftest import vectors

words = st.lists(st.integers(0, 2), max_size=6).map(tuple)


def test_validate_gcm():
    assert validate_gcm([[2]]).size == 1
    assert validate_gcm([[2, -1], [-1, 2]])[0, 1] == -1
    with pytest.raises(AsymmetricZero):
        validate_gcm([[2, 0], [-1, 2]])
    with pytest.raises(DiagonalNotTwo):
        validate_gcm([[1]])
    with pytest.raises(PositiveOffDiagonal):
        validate_gcm([[2, 1], [1, 2]])


@pytest.mark.parametrize("gcm, kinds", [
    ([[2]], [CartanKind.FINITE]),
    ([[2, -1], [-1, 2]], [CartanKind.FINITE]),
    ([[2, -2], [-2, 2]], [CartanKind.AFFINE]),
    ([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], [CartanKind.AFFINE]),
    ([[2, -3], [-3, 2]], [CartanKind.INDEFINITE]),
    ([[2, 0], [0, 2]], [CartanKind.FINITE, CartanKind.FINITE]),
    ([[2, -1], [-4, 2]], [CartanKind.AFFINE]),
    ([[2, -1], [-3, 2]], [CartanKind.FINITE]),
])
def test_classify(gcm, kinds):
    assert [b.kind for b in classify_type(validate_gcm(gcm))] == kinds


def test_marks():
    assert classify_type(validate_gcm([[2, -2], [-2, 2]]))[0].marks == (1, 1)
    assert classify_type(validate_gcm([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]))[0].marks == (1, 1, 1)
    # non-symmetric case: delta = sum c_i alpha_i vanishes on every coroot iff A c = 0
    a = validate_gcm([[2, -1], [-4, 2]])
    c = classify_type(a)[0].marks
    assert c == (1, 2)
    assert all(sum(a[i, j] * c[j] for j in range(2)) == 0 for i in range(2))


def test_realization_checks():
    with pytest.raises(RealizationError):
        RootGeneratingSystem.from_rows([[2]], [[1]], [[1]])
    s = minimal_realization([[2, -2], [-2, 2]])
    assert s.dim == 3


def test_apply_weyl_rank1(rank1):
    assert apply_weyl(rank1, WeylElement.make((0,)), (5,)) == (-5,)
    assert apply_weyl(rank1, WeylElement.make((), (2,)), ("0.5",)) == (Fraction(5, 2),)
    with pytest.raises(IndexOutOfRange):
        apply_weyl(rank1, WeylElement.make((1,)), (0,))


def test_apply_weyl_a2():
    s = RootGeneratingSystem.from_rows([[2, -1], [-1, 2]], [[2, -1], [-1, 2]], [[1, 0], [0, 1]])
    assert s.reflect(0, (0, 1)) == (1, 1)


def test_enumerate_real_roots(a2, rank1, at1):
    w = enumerate_real_roots(a2, 3)
    assert set(w.coeffs) == {(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)} and w.saturated
    w = enumerate_real_roots(rank1, 1)
    assert set(w.coeffs) == {(1,), (-1,)} and w.saturated
    w = enumerate_real_roots(at1, 2)
    assert not w.saturated
    assert {(1, 0), (0, 1), (1, 2), (2, 1)} <= set(w.coeffs)
    pos = {(1, 0), (0, 1), (1, 2), (2, 1), (3, 2), (2, 3)}
    assert set(w.coeffs) == pos | {(-a, -b) for a, b in pos}


@pytest.mark.parametrize("name", ["a2", "at1", "at2", "hyper"])
def test_window_monotone_and_symmetric(name, request):
    s = request.getfixturevalue(name)
    prev = set()
    for n in range(4):
        cur = set(enumerate_real_roots(s, n).coeffs)
        assert prev <= cur
        assert {tuple(-x for x in c) for c in cur} == cur
        assert all(s.is_real_root(c) for c in cur)
        prev = cur


def test_dominant_representative(rank1, at1):
    lam, w = dominant_representative(rank1, (-3,))
    assert lam == (3,) and w.word == (0,)
    lam, w = dominant_representative(at1, (0, 1, 1))
    assert lam == (1, 1, 1) and w.word == (0,)
    lam, w = dominant_representative(at1, (1, 1, 1))
    assert lam == (1, 1, 1) and w.word == ()
    with pytest.raises(NotInTitsCone) as err:
        dominant_representative(at1, (1, 0, 0), bound=50)
    assert err.value.bound == 50


def test_null_root(at1, at2, a2):
    d = null_root(at1)
    assert d.marks == (1, 1) and d.as_form == (0, 0, 1)
    assert null_root(at2).marks == (1, 1, 1)
    with pytest.raises(NotAffine):
        null_root(a2)


def test_finite_subsets(at1):
    assert is_finite_type(at1.gcm, (0,)) and is_finite_type(at1.gcm, ())
    assert not is_finite_type(at1.gcm, (0, 1))


@pytest.mark.parametrize("name", ["rank1", "a2", "at1", "at2", "hyper"])
def test_reflections_are_involutions(name, request):
    s = request.getfixturevalue(name)
    basis = [tuple(Fraction(int(i == j)) for j in range(s.dim)) for i in range(s.dim)]
    for i in range(s.rank):
        for v in basis:
            assert s.reflect(i, s.reflect(i, v)) == v


@given(words, vectors(4))
def test_delta_invariant_at2(word, v):
    from masure_kit.models import affine_a2
    s = affine_a2()
    d = null_root(s)
    assert d(s.apply_word(word, v)) == d(v)


@given(words.map(lambda w: tuple(i % 2 for i in w)), words.map(lambda w: tuple(i % 2 for i in w)),
       vectors(3), vectors(3), vectors(3))
def test_group_laws(w1, w2, t1, t2, v):
    from masure_kit.models import affine_a1
    s = affine_a1()
    a, b = WeylElement.make(w1, t1), WeylElement.make(w2, t2)
    assert s.apply(s.compose(a, b), v) == s.apply(a, s.apply(b, v))
    assert s.apply(s.inverse(a), s.apply(a, v)) == tuple(ex.vec(v))
    n = s.normalize(a)
    assert s.weyl_equal(n, a) and len(n.word) == s.length(a) <= len(w1)


@given(vectors(3, lo=-3, hi=3))
def test_dominance_idempotent(v):
    from masure_kit.models import affine_a1
    s = affine_a1()
    if null_root(s)(v) <= 0:
        return
    lam, w = dominant_representative(s, v)
    assert s.is_dominant(lam) and s.apply(w, v) == lam
    lam2, w2 = dominant_representative(s, lam)
    assert lam2 == lam and w2.word == ()
