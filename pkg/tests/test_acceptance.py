"""Acceptance suite: eight desk-scale criteria, each with its own time budget.

Run ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from fractions import Fraction
from itertools import combinations, product

import pytest

from masure_kit import _exact as ex
from masure_kit import models
from masure_kit.affine_order import (ChainSearch, Relation, certify_order, chain_certificate, compare, delta_value,
                                     verify_certificate)
from masure_kit.apartment import (HalfSpace, HalfSpaceSet, conv_iterate, affine_dimension, enclosure_cl_sharp,
                                  frontier_point, gauge_value)
from masure_kit.masure import (MINUS_INF, PLUS_INF, EmptyIntersection, LevelNotInLambda, MasurePoint,
                               apartment_distance, build_catalog, check_axioms, common_chart, grid_points,
                               half_apartment_path, intersect_apartments, realize_intersection, retract_segment,
                               retraction)
from masure_kit.root_system import CartanKind, classify_type, null_root, validate_gcm
from masure_kit.serialize import model_from_json
from masure_kit.tits_order import (LambdaPath, check_lambda_path, leq, path_endpoint_bound, qvee_leq,
                                   search_folded_to_endpoint, unique_straight_path, vectorial_distance)

SEED = 20261018
RESULTS = {}


def rational(rng, lo=-5, hi=5, den=6):
    d = rng.randint(1, den)
    return Fraction(rng.randint(lo * d, hi * d), d)


def rvec(rng, n, **kw):
    return tuple(rational(rng, **kw) for _ in range(n))


def rword(rng, rank, max_len=6):
    return tuple(rng.randrange(rank) for _ in range(rng.randint(0, max_len)))


def random_dominant(rng, s):
    """lambda with alpha_i(lambda) random nonnegative, plus a random inessential part."""
    target = [Fraction(rng.randint(0, 4 * 3), rng.randint(1, 3)) for _ in range(s.rank)]
    lam = ex.solve(s.roots, target)
    for k in ex.nullspace(s.roots, s.dim):
        lam = ex.add(lam, ex.scale(rational(rng, -2, 2, 3), k))
    assert s.is_dominant(lam)
    return lam


# ---------------------------------------------------------------------------
# the criteria; each returns a list of failure descriptions


def criterion_1():
    cases = {
        "A1": ([[2]], [CartanKind.FINITE], None),
        "A2": ([[2, -1], [-1, 2]], [CartanKind.FINITE], None),
        "affine A1": ([[2, -2], [-2, 2]], [CartanKind.AFFINE], (1, 1)),
        "affine A2": ([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], [CartanKind.AFFINE], (1, 1, 1)),
        "hyperbolic": ([[2, -3], [-3, 2]], [CartanKind.INDEFINITE], None),
    }
    bad = []
    for name, (gcm, kinds, marks) in cases.items():
        blocks = classify_type(validate_gcm(gcm))
        if [b.kind for b in blocks] != kinds:
            bad.append(f"{name}: {[b.kind.value for b in blocks]}")
        if marks is not None and blocks[0].marks != marks:
            bad.append(f"{name}: marks {blocks[0].marks}")
    return bad


def criterion_2():
    rng = random.Random(SEED)
    systems = [models.affine_a1(), models.affine_a2()]
    deltas = [null_root(s) for s in systems]
    bad = []
    for n in range(1000):
        s, d = systems[n % 2], deltas[n % 2]
        v = rvec(rng, s.dim)
        i = rng.randrange(s.rank)
        w = rword(rng, s.rank)
        if s.reflect(i, s.reflect(i, v)) != v:
            bad.append(f"r_{i}^2 != id at {v}")
        if d(s.apply_word(w, v)) != d(v):
            bad.append(f"delta not invariant under {w} at {v}")
    return bad


def criterion_3():
    rng = random.Random(SEED + 3)
    systems = [models.a2(), models.affine_a1(), models.affine_a2()]
    bad = []
    for n in range(1000):
        s = systems[n % 3]
        lam = random_dominant(rng, s)
        w = rword(rng, s.rank)
        if not qvee_leq(s, s.apply_word(w, lam), lam):
            bad.append(f"w.lambda not below lambda: {w}, {lam}")
    r1 = models.rank1()
    for lam, den in [((2,), 4), ((1,), 5), ((Fraction(1, 2),), 6), ((3,), 4)]:
        for a in [(0,), (Fraction(-1, 3),)]:
            found = search_folded_to_endpoint(r1, a, lam, max_segments=4, denominator=den)
            if found:
                bad.append(f"folded path to a + lambda: {found[0]}")
            if not unique_straight_path(r1, a, lam, LambdaPath.straight(a, lam)):
                bad.append("straight path rejected")
    for n in range(1000):
        s = systems[n % 3] if n % 4 else r1
        lam = random_dominant(rng, s) if s is not r1 else (Fraction(rng.randint(1, 6), rng.randint(1, 3)),)
        k = rng.randint(1, 4)
        den = rng.randint(k, 8)
        cuts = sorted(rng.sample(range(1, den), k - 1)) if k > 1 else []
        bps = [0] + [Fraction(c, den) for c in cuts] + [1]
        vels = [s.apply_word(rword(rng, s.rank), lam) for _ in range(k)]
        path = LambdaPath.make(rvec(rng, s.dim), bps, vels)
        if not check_lambda_path(s, path, lam).valid:
            bad.append(f"generated path invalid: {path}")
        elif not path_endpoint_bound(s, path, lam):
            bad.append(f"endpoint bound fails: {path}")
    return bad


def _random_body(rng, n):
    hs = []
    for _ in range(rng.randint(1, 4)):
        f = tuple(Fraction(rng.randint(-3, 3)) for _ in range(n))
        if any(f):
            hs.append(HalfSpace(f, Fraction(rng.randint(1, 9), rng.randint(1, 3))))
    for i in range(n):
        e = tuple(Fraction(int(i == j)) for j in range(n))
        hs += [HalfSpace(e, Fraction(5)), HalfSpace(ex.neg(e), Fraction(5))]
    return HalfSpaceSet.of(n, hs)


def criterion_4():
    rng = random.Random(SEED + 4)
    z = models.INTEGERS
    bad = []
    for n, s in enumerate([models.rank1(), models.affine_a1()] * 250):
        u = [rvec(rng, s.dim, lo=-3, hi=3, den=4) for _ in range(rng.randint(1, 3))]
        v = [rvec(rng, s.dim, lo=-3, hi=3, den=4) for _ in range(rng.randint(1, 2))]
        e = enclosure_cl_sharp(s, z, u, window=3)
        if not all(e.contains(p) for p in u):
            bad.append(f"not extensive: {u}")
        if not enclosure_cl_sharp(s, z, e, window=3).same_set(e):
            bad.append(f"not idempotent: {u}")
        if not e.contained_in(enclosure_cl_sharp(s, z, u + v, window=3)):
            bad.append(f"not monotone: {u}, {v}")
    for n in range(200):
        dim = 1 + n % 3
        c = _random_body(rng, dim)
        for _ in range(3):
            x = rvec(rng, dim, lo=-8, hi=8, den=3)
            j = gauge_value(c, x)
            if (j <= 1) != c.contains(x):
                bad.append(f"gauge identity fails at {x}")
            if j != 0 and gauge_value(c, frontier_point(c, x)) != 1:
                bad.append(f"frontier gauge != 1 at {x}")
    for n in range(200):
        dim = 1 + n % 3
        pts = list(dict.fromkeys(tuple(Fraction(rng.randint(-3, 3)) for _ in range(dim))
                                 for _ in range(rng.randint(1, 5))))
        d = affine_dimension(pts)
        full = conv_iterate(pts, len(pts).bit_length())  # one cell holding every point: conv(P)
        cd = conv_iterate(pts, d)
        for _ in range(3):
            x = rvec(rng, dim, lo=-3, hi=3, den=3) if rng.random() < 0.5 else _mix(rng, pts)
            if cd.contains(x) != full.contains(x):
                bad.append(f"conv_{d} != conv at {x} for {pts}")
    return bad


def _mix(rng, pts):
    w = [Fraction(rng.randint(0, 4)) for _ in pts]
    tot = sum(w) or Fraction(1)
    if not any(w):
        w[0] = Fraction(1)
    return tuple(sum(wi * p[k] for wi, p in zip(w, pts)) / tot for k in range(len(pts[0])))


AFFINE = set(models.AFFINE_MODELS)
BOX = {True: 1, False: 2}  # catalog box for affine / rank-1 models


def _intersections(name, m, bad):
    for a, b in combinations(range(m.n_charts), 2):
        try:
            i = intersect_apartments(m, a, b)
        except EmptyIntersection:
            continue
        x = i.region.point()
        if m.coord_in(MasurePoint(a, x), b) != m.system.apply(i.map, x):
            bad.append(f"{name}: map of {a}->{b} does not fix the intersection")


def _standard_points(name, m, bad):
    step = Fraction(1) if m.dim > 1 else Fraction(1, 2)
    for c in range(m.n_charts):
        for x in grid_points(m.dim, Fraction(2), step):
            p = MasurePoint(c, x)
            equal = retraction(m, PLUS_INF, p) == retraction(m, MINUS_INF, p)
            if equal != (m.coord_in(p, 0) is not None):
                bad.append(f"{name}: rho+ == rho- is {equal} at chart {c} {x}")


def _segments(name, m, pts, bad):
    for p, q in product(pts, pts):
        try:
            c, x, y = common_chart(m, p, q)
        except ValueError:
            continue
        if leq(m.system, x, y) is not True:
            continue
        lam = vectorial_distance(m.system, x, y)
        for germ in (PLUS_INF, MINUS_INF):
            path = retract_segment(m, p, q, germ)
            if not check_lambda_path(m.system, path, lam).valid:
                bad.append(f"{name}: retracted segment {p} -> {q} is not a lambda-path")
            if path.start != retraction(m, germ, p) or path.end != retraction(m, germ, q):
                bad.append(f"{name}: retracted segment has wrong endpoints")


def _metric(name, m, bad):
    charts = sorted(m.germ_maps(PLUS_INF))
    d = {(a, b): apartment_distance(m, a, b, PLUS_INF) for a in charts for b in charts}
    for a, b in d:
        if (d[a, b] == 0) != (a == b) or d[a, b] != d[b, a]:
            bad.append(f"{name}: distance not definite or not symmetric at {a}, {b}")
    for a, b, c in product(charts, repeat=3):
        if d[a, c] > d[a, b] + d[b, c]:
            bad.append(f"{name}: triangle inequality fails at {a}, {b}, {c}")


def criterion_5():
    bad = []
    for name in models.MODELS:
        m = models.load(name)
        _intersections(name, m, bad)
        _standard_points(name, m, bad)
        box = BOX[name in AFFINE]
        pts = [p for p in build_catalog(m, box=box).points if all(abs(x) <= 1 for x in p.coord)]
        _segments(name, m, pts, bad)
        _metric(name, m, bad)
        r = check_axioms(m, ["MAafii", "MAO"], box=box)
        bad += [f"{name}: {x.name} {x.witness}" for x in r.results if not x.passed]
    return bad


def criterion_6():
    bad = []
    for name in models.AFFINE_MODELS:
        m = models.load(name)
        pts = build_catalog(m, box=1).points
        search = ChainSearch(m, pts)
        delta = {p: delta_value(m, p) for p in pts}
        multi = 0
        for p, q in product(pts, pts):
            if p == q:
                continue
            if delta[p] < delta[q]:
                # saturated models put p and q in a common chart, so also replay the
                # half-apartment chain from p's chart to q's chart
                path = half_apartment_path(m, p.chart, q.chart)
                for cert in (certify_order(m, p, q), chain_certificate(m, p, q, path)):
                    ok, why = verify_certificate(m, cert)
                    if not ok:
                        bad.append(f"{name}: certificate for {p} < {q} fails: {why}")
                multi += len(path) > 1
            elif delta[p] == delta[q]:
                c = compare(m, p, q)
                if c.same_class:
                    continue
                if c.relation is not Relation.NC:
                    bad.append(f"{name}: {p}, {q} not NC")
                depth = apartment_distance(m, p.chart, q.chart) + 1
                if search.find(p, q, depth) is not None:
                    bad.append(f"{name}: chain found between NC points {p}, {q}")
        if not multi:
            bad.append(f"{name}: no pair needed a multi-chart certificate")
    return bad


def criterion_7():
    bad = []
    cases = [(models.rank1(), HalfSpaceSet.of(1, [HalfSpace.make([1], 0), HalfSpace.make([-1], 2)])),
             (models.affine_a1(), models.a1_box_region())]
    for s, region in cases:
        r = realize_intersection(s, models.INTEGERS, region)
        back = intersect_apartments(r.model, r.chart, 0).region
        if not back.same_set(region):
            bad.append(f"round trip changed {region} into {back}")
    return bad


def criterion_8():
    bad = []
    for name in models.MODELS:
        box = BOX[name in AFFINE]
        r = check_axioms(models.load(name), box=box)
        if not r.passed:
            bad.append(f"{name} fails {[x.name for x in r.results if not x.passed]}")
    if models.load("tree7").gluings != models.tree7().gluings:
        bad.append("tree7 data differs from its recipe")
    for name in models.BROKEN:
        r = check_axioms(models.load(name))
        failed = [x for x in r.results if not x.passed]
        if not failed or any(not x.witness for x in failed):
            bad.append(f"{name} passes or fails without a witness")
    try:
        model_from_json(models.model_json("broken_nonwall"))
        bad.append("non-wall gluing accepted")
    except LevelNotInLambda as err:
        if not str(err):
            bad.append("non-wall rejection has no message")
    return bad


CRITERIA = [
    (1, "GCM classification and marks", criterion_1, 1),
    (2, "Weyl involutions and delta invariance", criterion_2, 10),
    (3, "order, straight paths, endpoint bound", criterion_3, 30),
    (4, "enclosure, gauge, Caratheodory", criterion_4, 60),
    (5, "masure invariants on shipped models", criterion_5, 120),
    (6, "affine order criterion", criterion_6, 120),
    (7, "constructive reciprocal", criterion_7, 10),
    (8, "axiom checker self-test", criterion_8, 60),
]


def run_criterion(num, label, fn, budget):
    t0 = time.perf_counter()
    bad = fn()
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < budget
    line = (f"{'PASS' if ok else 'FAIL'} criterion {num} ({label}): {len(bad)} failures, "
            f"{elapsed:.2f}s of {budget}s")
    RESULTS[num] = line
    return ok, bad, elapsed, line


@pytest.mark.parametrize("num, label, fn, budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, label, fn, budget):
    ok, bad, elapsed, line = run_criterion(num, label, fn, budget)
    print(line)
    assert not bad, bad[:5]
    assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"


if __name__ == "__main__":
    results = [run_criterion(*c) for c in CRITERIA]
    for ok, bad, _, line in results:
        print(line)
        for b in bad[:5]:
            print("   ", b)
    sys.exit(0 if all(r[0] for r in results) else 1)
