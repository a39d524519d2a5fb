import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from masure_kit import models
from masure_kit.apartment import HalfSpace, HalfSpaceSet, WallFamily
from masure_kit.masure import MasurePoint, SectorGermRef
from masure_kit.root_system import WeylElement
from masure_kit.serialize import (FormatError, dumps, frac_str, germ_to_str, hset_from_json, hset_to_json,
                                  model_from_json, model_to_json, parse_frac, parse_germ, parse_point, parse_points,
                                  system_from_json, system_to_json, weyl_from_json, weyl_to_json)

from conftest import rationals, vectors


@given(rationals(lo=-100, hi=100, max_den=50))
def test_fraction_round_trip(x):
    assert parse_frac(frac_str(x)) == x
    assert "." not in frac_str(x)


def test_parse_frac():
    assert parse_frac("0.3") == Fraction(3, 10)
    assert parse_frac("-7/4") == Fraction(-7, 4)
    with pytest.raises(FormatError):
        parse_frac(0.5)
    with pytest.raises(FormatError):
        parse_frac("abc")


@pytest.mark.parametrize("name", list(models.SYSTEMS))
def test_system_round_trip(name):
    s = models.SYSTEMS[name]()
    d = system_to_json(s)
    s2, w = system_from_json(json.loads(json.dumps(d)))
    assert s2 == s and w == WallFamily.integers()


def test_explicit_lambda_round_trip():
    s = models.rank1()
    w = WallFamily.from_lists(s, {0: ["-1/2", 0, "1/2"]})
    s2, w2 = system_from_json(system_to_json(s, w))
    assert w2 == w


@given(st.lists(st.tuples(vectors(3), rationals()), max_size=4), st.lists(st.tuples(vectors(3), rationals()), max_size=2))
def test_hset_round_trip(closed, opened):
    h = HalfSpaceSet.of(3, [HalfSpace(f, k) for f, k in closed], [HalfSpace(f, k) for f, k in opened])
    assert hset_from_json(json.loads(json.dumps(hset_to_json(h)))) == h


def test_hset_spec_layout_without_dim():
    h = hset_from_json({"closed": [{"root": ["1"], "k": "0"}, {"root": ["-1"], "k": "2"}], "open": []})
    assert h.dim == 1 and h.contains((1,)) and not h.contains((3,))


@given(st.lists(st.integers(0, 1), max_size=5), st.one_of(st.none(), vectors(3)))
def test_weyl_round_trip(word, t):
    g = WeylElement.make(word, t)
    assert weyl_from_json(json.loads(json.dumps(weyl_to_json(g)))) == g


@pytest.mark.parametrize("name", ["tripod", "a1_twofold", "broken_tampered"])
def test_model_round_trip(name):
    m = models.load(name)
    d = model_to_json(m)
    m2 = model_from_json(json.loads(dumps(d)))
    assert m2.gluings == m.gluings and m2.n_charts == m.n_charts and m2.system == m.system
    assert dumps(model_to_json(m2)) == dumps(d)


def test_model_with_system_file(tmp_path):
    (tmp_path / "sys.json").write_text(dumps(system_to_json(models.rank1())))
    d = model_to_json(models.load("tripod"))
    d["system"] = "sys.json"
    m = model_from_json(d, str(tmp_path))
    assert m.n_charts == 3


def test_literals():
    assert parse_point("1:-1.5", 1) == MasurePoint(1, (Fraction(-3, 2),))
    assert parse_point("0:(0,0,1)", 3) == MasurePoint(0, (0, 0, 1))
    assert parse_points("0.3,1.7", 1) == [(Fraction(3, 10),), (Fraction(17, 10),)]
    assert parse_points("0,0,1;1,2,3", 3)[1] == (1, 2, 3)
    assert parse_germ("+inf@0") == SectorGermRef(0, 1, ())
    g = parse_germ("-inf@2/0.1")
    assert g == SectorGermRef(2, -1, (0, 1)) and parse_germ(germ_to_str(g)) == g
    for bad in ("1:(1,2)", "x:1", "1"):
        with pytest.raises(FormatError):
            parse_point(bad, 1)
    with pytest.raises(FormatError):
        parse_germ("inf@0")
