"""Finite masure models: copies of the standard apartment glued along half-apartments.

A model is a list of charts and gluings ``(a, b, D, tau)``: the points of
chart ``a`` over the half-apartment ``D`` are identified with their images
under the Weyl element ``tau`` in chart ``b``.  Building the model computes
the transitive closure of these identifications as *pieces*: for every
ordered chart pair, a list of (region in the source chart, Weyl map) whose
union is exactly the set of identified points.  Everything downstream
(point equality, retractions, intersections, axiom checks) reads the pieces.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import _exact as ex
from ._exact import Vector, ZERO
from .apartment import (FaceKind, HalfSpace, HalfSpaceSet, VectorialFace, WallFamily,
                        enclosure_cl_sharp, support_of_enclosed)
from .root_system import IDENTITY, RootGeneratingSystem, WeylElement, enumerate_real_roots
from .tits_order import (LambdaPath, Membership, check_lambda_path, leq, tits_cone_membership,
                         vectorial_distance)


# ---------------------------------------------------------------------------
# Errors


class ModelError(ValueError):
    """Base class for model construction failures; ``witness`` is JSON-friendly."""

    code = "ModelError"

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InconsistentGluing(ModelError):
    code = "InconsistentGluing"


class LevelNotInLambda(ModelError):
    code = "LevelNotInLambda"


class InvalidTransition(ModelError):
    code = "InvalidTransition"


class TheoremViolation(ModelError):
    code = "TheoremViolation"


class EmptyIntersection(ValueError):
    pass


class NoApartmentContainsBoth(ValueError):
    pass


class NoCommonChart(ValueError):
    pass


class NotConnected(ValueError):
    pass


class LineMissesIntersection(ValueError):
    pass


class CatalogTooLarge(ValueError):
    pass


class LevelNotReflectable(ValueError):
    pass


class NotMinimalWriting(ValueError):
    pass


# ---------------------------------------------------------------------------
# Small helpers


def pullback(system: RootGeneratingSystem, h: HalfSpace, g: WeylElement) -> HalfSpace:
    """{x : g(x) in D(h)} as a half-space."""
    m = system.word_matrix(g.word)
    return HalfSpace(ex.vec_mat(h.form, m), ex.dot(h.form, g.shift(system.dim)) + h.k)


def pullback_set(system: RootGeneratingSystem, s: HalfSpaceSet, g: WeylElement) -> HalfSpaceSet:
    return HalfSpaceSet.of(s.dim, [pullback(system, h, g) for h in s.closed],
                           [pullback(system, h, g) for h in s.open])


def agreement_witness(system: RootGeneratingSystem, g1: WeylElement, g2: WeylElement,
                      region: HalfSpaceSet) -> Optional[Vector]:
    """None when g1 = g2 on the nonempty region, else a point of the region where they differ.

    g1 and g2 agree exactly on {x : (M1 - M2) x = t2 - t1}; each row of that
    system must be constant on the region.
    """
    if system.weyl_equal(g1, g2):
        return None
    m1, m2 = system.word_matrix(g1.word), system.word_matrix(g2.word)
    t1, t2 = g1.shift(system.dim), g2.shift(system.dim)
    for i in range(system.dim):
        row = ex.sub(m1[i], m2[i])
        c = t2[i] - t1[i]
        if all(x == 0 for x in row):
            if c != 0:
                return region.point()
            continue
        for maximize in (False, True):
            status, val, pt = region.extreme(row, maximize)
            if status == "unbounded":
                # some far point of the region leaves the hyperplane; walk along the LP ray
                return _unbounded_witness(region, row, c, maximize)
            if status == "optimal" and val != c:
                return pt
    return None


def _unbounded_witness(region: HalfSpaceSet, row: Vector, c: Fraction, maximize: bool) -> Vector:
    bound = c + 1 if maximize else c - 1
    h = HalfSpace(row, -bound) if maximize else HalfSpace(ex.neg(row), bound)
    return region.with_closed(h).point()


def segment_interval(region: HalfSpaceSet, x: Vector, y: Vector) -> Optional[Tuple[Fraction, Fraction]]:
    """{t in [0, 1] : x + t (y - x) in region} as a closed interval, or None."""
    d = ex.sub(y, x)
    lo, hi = Fraction(0), Fraction(1)
    for h in region.closed:
        a = ex.dot(h.form, d)
        b = ex.dot(h.form, x) + h.k
        if a == 0:
            if b < 0:
                return None
        elif a > 0:
            lo = max(lo, -b / a)
        else:
            hi = min(hi, -b / a)
    return (lo, hi) if lo <= hi else None


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vec_str(v: Sequence[Fraction]) -> List[str]:
    return [_fmt(x) for x in v]


# ---------------------------------------------------------------------------
# Model types


@dataclass(frozen=True)
class Gluing:
    a: int
    b: int
    halfspace: HalfSpace
    tau: WeylElement = IDENTITY


@dataclass(frozen=True)
class Piece:
    region: HalfSpaceSet
    map: WeylElement
    walk: Tuple[int, ...] = ()
    """gluing indices traversed (i forward, ~i backwards)"""


@dataclass(frozen=True)
class MasurePoint:
    chart: int
    coord: Vector

    @staticmethod
    def make(chart: int, coord) -> "MasurePoint":
        return MasurePoint(int(chart), ex.vec(coord))


@dataclass(frozen=True)
class SectorGermRef:
    """Germ at infinity of the sector x + sign * w.C^v_f in a chart."""

    chart: int = 0
    sign: int = 1
    word: Tuple[int, ...] = ()

    @property
    def direction(self) -> VectorialFace:
        return VectorialFace(self.sign, tuple(self.word), ())


PLUS_INF = SectorGermRef(0, 1, ())
MINUS_INF = SectorGermRef(0, -1, ())


class GluedMasure:
    def __init__(self, system: RootGeneratingSystem, walls: WallFamily, n_charts: int,
                 gluings: Sequence[Gluing], max_steps: int = 20_000):
        if n_charts < 1:
            raise ModelError("a model needs at least one chart")
        self.system = system
        self.walls = walls
        self.n_charts = n_charts
        self.gluings = tuple(gluings)
        self.max_steps = max_steps
        self.truncated = False
        self._memo: Dict = {}
        for idx, g in enumerate(self.gluings):
            self._validate_gluing(idx, g)
        self._edges: List[List[Tuple[int, HalfSpace, WeylElement, int]]] = [[] for _ in range(n_charts)]
        for idx, g in enumerate(self.gluings):
            inv = system.inverse(g.tau)
            self._edges[g.a].append((g.b, g.halfspace, system.normalize(g.tau), idx))
            back = pullback(system, g.halfspace, inv)
            self._edges[g.b].append((g.a, back, inv, ~idx))
        self.pieces: Dict[Tuple[int, int], Tuple[Piece, ...]] = {}
        for src in range(n_charts):
            self._explore(src)

    # construction ------------------------------------------------------

    def _validate_gluing(self, idx: int, g: Gluing):
        s = self.system
        for c in (g.a, g.b):
            if not 0 <= c < self.n_charts:
                raise ModelError(f"gluing {idx} refers to missing chart {c}", {"gluing": idx})
        if g.a == g.b:
            raise ModelError(f"gluing {idx} glues a chart to itself", {"gluing": idx})
        coeffs = s.form_coeffs(g.halfspace.form)
        if coeffs is None or not s.is_real_root(coeffs):
            raise LevelNotInLambda(f"gluing {idx}: {vec_str(g.halfspace.form)} is not a real root",
                                   {"gluing": idx, "root": vec_str(g.halfspace.form)})
        c = tuple(int(x) for x in coeffs)
        k = g.halfspace.k
        if not self.walls.contains_level(s, c, k):
            raise LevelNotInLambda(f"gluing {idx}: level {_fmt(k)} is not an admissible wall level",
                                   {"gluing": idx, "root": list(c), "k": _fmt(k)})
        if not self.walls.reflectable(s, c, k):
            raise LevelNotInLambda(f"gluing {idx}: level {_fmt(k)} is not in 1/2 alpha(Q^vee)",
                                   {"gluing": idx, "root": list(c), "k": _fmt(k)})
        for i in g.tau.word:
            if not 0 <= i < s.rank:
                raise InvalidTransition(f"gluing {idx}: letter {i} out of range", {"gluing": idx})
        if not s.in_coroot_lattice(g.tau.shift(s.dim), self.walls.qvee_generators(s)):
            raise InvalidTransition(f"gluing {idx}: translation is not in Q^vee",
                                    {"gluing": idx, "translation": vec_str(g.tau.shift(s.dim))})

    def _explore(self, src: int):
        s = self.system
        whole = HalfSpaceSet.whole(s.dim)
        found: Dict[int, List[Piece]] = {c: [] for c in range(self.n_charts)}
        found[src].append(Piece(whole, IDENTITY, ()))
        queue = deque([(src, whole, IDENTITY, ())])
        steps = 0
        while queue:
            steps += 1
            if steps > self.max_steps:
                self.truncated = True
                break
            c, region, g, walk = queue.popleft()
            for dst, d, tau, idx in self._edges[c]:
                r2 = region.with_closed(pullback(s, d, g))
                if r2.is_empty():
                    continue
                r2 = r2.simplified()
                g2 = s.compose(tau, g)
                walk2 = walk + (idx,)
                redundant = False
                for p in found[dst]:
                    inter = p.region.intersect(r2)
                    if not s.weyl_equal(p.map, g2) and not inter.is_empty():
                        w = agreement_witness(s, p.map, g2, inter)
                        if w is not None:
                            raise InconsistentGluing(
                                f"chart {src} point {vec_str(w)} is identified with two points of chart {dst}",
                                {"chart": src, "point": vec_str(w), "target": dst,
                                 "images": [vec_str(s.apply(p.map, w)), vec_str(s.apply(g2, w))],
                                 "walks": [_walk_json(p.walk), _walk_json(walk2)]})
                    if r2.contained_in(p.region):
                        redundant = True
                        break
                if redundant:
                    continue
                found[dst].append(Piece(r2, g2, walk2))
                queue.append((dst, r2, g2, walk2))
        for dst, ps in found.items():
            self.pieces[(src, dst)] = tuple(self._coalesce(ps))

    def _coalesce(self, pieces: List[Piece]) -> List[Piece]:
        """Merge pieces sharing a Weyl map when their union is a single enclosed set."""
        s = self.system
        groups: List[List[Piece]] = []
        for p in pieces:
            for grp in groups:
                if s.weyl_equal(grp[0].map, p.map):
                    grp.append(p)
                    break
            else:
                groups.append([p])
        out = []
        for grp in groups:
            if len(grp) > 1:
                enc = _enclosure_of_union(self, grp, 0)
                if _union_minus(enc, [p.region for p in grp]) is None:
                    out.append(Piece(enc, grp[0].map, grp[0].walk))
                    continue
            out.extend(grp)
        # consistency makes any piece inside another one redundant
        kept = [p for i, p in enumerate(out)
                if not any(j != i and p.region.contained_in(q.region)
                           and (j < i or not q.region.contained_in(p.region))
                           for j, q in enumerate(out))]
        return kept

    def covering_map(self, a: int, b: int, region: HalfSpaceSet) -> Optional[WeylElement]:
        """The Weyl map identifying all of ``region`` (chart a) with chart b, if one does."""
        s = self.system
        groups: List[List[Piece]] = []
        for p in self.pieces[(a, b)]:
            for grp in groups:
                if s.weyl_equal(grp[0].map, p.map):
                    grp.append(p)
                    break
            else:
                groups.append([p])
        for grp in groups:
            if _union_minus(region, [p.region for p in grp]) is None:
                return grp[0].map
        return None

    # basic queries ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.system.dim

    def pieces_between(self, a: int, b: int) -> Tuple[Piece, ...]:
        return self.pieces[(a, b)]

    def coord_in(self, p: MasurePoint, chart: int) -> Optional[Vector]:
        for piece in self.pieces[(p.chart, chart)]:
            if piece.region.contains(p.coord):
                return self.system.apply(piece.map, p.coord)
        return None

    def charts_of(self, p: MasurePoint) -> Dict[int, Vector]:
        out = {}
        for c in range(self.n_charts):
            y = self.coord_in(p, c)
            if y is not None:
                out[c] = y
        return out

    def canonical(self, p: MasurePoint) -> MasurePoint:
        for c in range(self.n_charts):
            y = self.coord_in(p, c)
            if y is not None:
                return MasurePoint(c, y)
        return p

    def same_point(self, p: MasurePoint, q: MasurePoint) -> bool:
        return self.coord_in(p, q.chart) == q.coord

    # germs ----------------------------------------------------------------

    def germ_maps(self, germ: SectorGermRef) -> Dict[int, WeylElement]:
        """chart -> Weyl map (germ chart coords -> chart coords) for every chart containing the germ."""
        key = ("germ", germ)
        if key in self._memo:
            return self._memo[key]
        d = germ.direction
        out = {}
        for c in range(self.n_charts):
            for piece in self.pieces[(germ.chart, c)]:
                if all(d.form_nonneg(self.system, h.form) for h in piece.region.closed):
                    out[c] = piece.map
                    break
        self._memo[key] = out
        return out

    def chart_contains_face(self, chart: int, face_chart: int, x: Vector, d: VectorialFace) -> Optional[Vector]:
        """Coordinates in ``chart`` of the local face germ F(x, d) of ``face_chart``, if it lies there."""
        for piece in self.pieces[(face_chart, chart)]:
            r = piece.region
            if not r.contains(x):
                continue
            if all(d.form_nonneg(self.system, h.form) for h in r.closed if h.value(x) == 0):
                return self.system.apply(piece.map, x)
        return None


def _walk_json(walk):
    return [(f"+{i}" if i >= 0 else f"-{~i}") for i in walk]


def build_complex(system: RootGeneratingSystem, walls: WallFamily, n_charts: int,
                  gluings: Sequence[Gluing], max_steps: int = 20_000) -> GluedMasure:
    return GluedMasure(system, walls, n_charts, gluings, max_steps)


def same_point(model: GluedMasure, p: MasurePoint, q: MasurePoint) -> bool:
    return model.same_point(p, q)


# ---------------------------------------------------------------------------
# Intersections of apartments


@dataclass(frozen=True)
class Intersection:
    region: HalfSpaceSet
    map: WeylElement


def _piece_roots(model: GluedMasure, pieces: Iterable[Piece]) -> List[Tuple[int, ...]]:
    out = []
    for p in pieces:
        for h in p.region.closed:
            c = model.system.form_coeffs(h.form)
            if c is not None and all(x.denominator == 1 for x in c):
                out.append(tuple(int(x) for x in c))
    return out


def _union_minus(e: HalfSpaceSet, regions: Sequence[HalfSpaceSet]) -> Optional[Vector]:
    """A point of e outside every region, or None if e is covered."""
    if not regions:
        return e.point()
    first, rest = regions[0], regions[1:]
    if e.is_empty():
        return None
    for h in first.closed:
        part = HalfSpaceSet(e.dim, e.closed, e.open + (h.opposite(),))
        if part.is_empty():
            continue
        w = _union_minus(part, rest)
        if w is not None:
            return w
        e = e.with_closed(h)
    return None


def _enclosure_of_union(model: GluedMasure, pieces: Sequence[Piece], window: int) -> HalfSpaceSet:
    s = model.system
    roots = {c for c in enumerate_real_roots(s, window).coeffs}
    roots.update(_piece_roots(model, pieces))
    roots.update(tuple(-x for x in c) for c in list(roots))
    out = []
    for c in sorted(roots):
        f = s.root_form(c)
        m = None
        for p in pieces:
            status, val = p.region.minimum(f)
            if status == "unbounded":
                m = None
                break
            if status == "optimal" and (m is None or val < m):
                m = val
        else:
            if m is not None:
                k = model.walls.min_level_at_least(s, c, -m)
                if k is not None:
                    out.append(HalfSpace(f, k))
    return HalfSpaceSet.of(s.dim, out).simplified()


def intersect_apartments(model: GluedMasure, a: int, b: int, window: int = 2) -> Intersection:
    """A ∩ B in A's coordinates with the single Weyl element identifying it with its image in B.

    Raises TheoremViolation when the intersection is not enclosed or the
    transition is not given by one element on all of it.
    """
    if a == b:
        raise ValueError("intersect_apartments needs two distinct charts")
    key = ("int", a, b, window)
    if key in model._memo:
        res = model._memo[key]
        if isinstance(res, Exception):
            raise res
        return res
    pieces = [p for p in model.pieces_between(a, b) if not p.region.is_empty()]
    if not pieces:
        raise EmptyIntersection(f"charts {a} and {b} do not meet")
    s = model.system
    try:
        enc = _enclosure_of_union(model, pieces, window)
        gap = _union_minus(enc, [p.region for p in pieces])
        if gap is not None:
            raise TheoremViolation(f"A{a} ∩ A{b} is not enclosed",
                                   {"charts": [a, b], "point_in_enclosure_not_in_intersection": vec_str(gap)})
        phi = pieces[0].map
        for p in pieces[1:]:
            w = agreement_witness(s, phi, p.map, p.region)
            if w is not None:
                raise TheoremViolation(f"no single Weyl element identifies A{a} ∩ A{b}",
                                       {"charts": [a, b], "point": vec_str(w),
                                        "images": [vec_str(s.apply(phi, w)), vec_str(s.apply(p.map, w))]})
    except TheoremViolation as err:
        model._memo[key] = err
        raise
    res = Intersection(enc, s.normalize(phi))
    model._memo[key] = res
    return res


def decompose_intersection(model: GluedMasure, a: int, b: int, window: int = 2) -> List[Intersection]:
    """Enclosed pieces covering A ∩ B, each with the Weyl element fixing it.

    Pieces sharing a transition are merged whenever their union is itself
    enclosed.
    """
    if a == b:
        raise ValueError("decompose_intersection needs two distinct charts")
    s = model.system
    pieces = [p for p in model.pieces_between(a, b) if not p.region.is_empty()]
    if not pieces:
        raise EmptyIntersection(f"charts {a} and {b} do not meet")
    groups: List[List[Piece]] = []
    for p in pieces:
        for grp in groups:
            if s.weyl_equal(grp[0].map, p.map):
                grp.append(p)
                break
        else:
            groups.append([p])
    out = []
    for grp in groups:
        enc = _enclosure_of_union(model, grp, window)
        if _union_minus(enc, [p.region for p in grp]) is None:
            out.append(Intersection(enc, s.normalize(grp[0].map)))
        else:
            out.extend(Intersection(p.region, s.normalize(p.map)) for p in grp)
    return out


def half_apartment_of(model: GluedMasure, region: HalfSpaceSet) -> Optional[HalfSpace]:
    """The half-apartment equal to region, if it is one."""
    r = region.simplified()
    if len(r.closed) != 1 or r.open:
        return None
    h = r.closed[0]
    c = model.system.form_coeffs(h.form)
    if c is None or not model.system.is_real_root(c):
        return None
    return h


def _pair_half_apartment(model: GluedMasure, a: int, b: int) -> Optional[Tuple[HalfSpace, WeylElement]]:
    key = ("half", a, b)
    if key not in model._memo:
        res = None
        try:
            inter = intersect_apartments(model, a, b)
            h = half_apartment_of(model, inter.region)
            if h is not None:
                res = (h, inter.map)
        except (EmptyIntersection, TheoremViolation):
            pass
        model._memo[key] = res
    return model._memo[key]


# ---------------------------------------------------------------------------
# Saturation


def _coroot_of(system: RootGeneratingSystem, c: Sequence[int]) -> Tuple[Vector, Tuple[int, ...]]:
    """(coroot vector, reduced word of the reflection) for the real root with coefficients c."""
    c = tuple(int(x) for x in c)
    sign = 1
    if all(x <= 0 for x in c):
        c, sign = tuple(-x for x in c), -1
    word: List[int] = []
    while not (sum(c) == 1 and all(x >= 0 for x in c)):
        for i in range(system.rank):
            if sum(system.gcm[i, j] * c[j] for j in range(system.rank)) > 0:
                c = system.reflect_coeffs(i, c)
                word.append(i)
                break
        else:
            raise ValueError("not a real root")
    i = c.index(1)
    # beta = u.alpha_i with u = r_{word[0]} ... r_{word[-1]}
    u = tuple(word)
    cor = system.apply_word(u, system.coroots[i])
    refl = system.reduced_word(u + (i,) + tuple(reversed(u)))
    return ex.scale(sign, cor), refl


def wall_reflection(system: RootGeneratingSystem, h: HalfSpace) -> WeylElement:
    """The reflection of the apartment across the wall of D(h)."""
    c = system.form_coeffs(h.form)
    cor, word = _coroot_of(system, c)
    # s(x) = x - (beta(x) + k) beta^vee
    return WeylElement.make(word, ex.scale(-h.k, cor))


def saturate(model: GluedMasure, max_rounds: int = 20) -> GluedMasure:
    """Add, for every chart pair meeting in a half-apartment, the apartment made of their other halves.

    A candidate is skipped when an existing chart already contains both
    halves through a single Weyl element.  Repeats until nothing new appears.
    """
    s = model.system
    cur = model
    for _ in range(max_rounds):
        new_gluings: List[Gluing] = []
        n = cur.n_charts
        for a, b in combinations(range(cur.n_charts), 2):
            hp = _pair_half_apartment(cur, a, b)
            if hp is None:
                continue
            h, g = hp
            opp = h.opposite()
            refl = wall_reflection(s, h)
            if _has_chart_with_halves(cur, a, opp, b, pullback(s, opp, s.inverse(g)), s.compose(g, refl)):
                continue
            if _pending_duplicate(cur, new_gluings, a, opp, b, s.compose(g, refl)):
                continue
            new_gluings.append(Gluing(a, n, opp, IDENTITY))
            new_gluings.append(Gluing(n, b, h, s.normalize(s.compose(g, refl))))
            n += 1
        if not new_gluings:
            return cur
        old_n = cur.n_charts
        trial = GluedMasure(s, cur.walls, n, cur.gluings + tuple(new_gluings), cur.max_steps)
        whole = HalfSpaceSet.whole(s.dim)
        dups = {c for c in range(old_n, n)
                if any(trial.covering_map(c, e, whole) is not None for e in range(c))}
        if dups:
            renum, nxt = {}, old_n
            for c in range(old_n, n):
                if c not in dups:
                    renum[c] = nxt
                    nxt += 1
            kept = [Gluing(g.a if g.a < old_n else renum[g.a], g.b if g.b < old_n else renum[g.b],
                           g.halfspace, g.tau)
                    for g in new_gluings if g.a not in dups and g.b not in dups]
            if nxt == old_n:
                return cur
            trial = GluedMasure(s, cur.walls, nxt, cur.gluings + tuple(kept), cur.max_steps)
        cur = trial
    return cur


def _has_chart_with_halves(model, a, half_a, b, half_b_in_b, map_d_to_b) -> bool:
    """Is there a chart E ⊇ (half_a of A) ∪ (opposite half of B) glued by one Weyl element?"""
    s = model.system
    region_a = HalfSpaceSet.of(s.dim, [half_a])
    region_b = HalfSpaceSet.of(s.dim, [half_b_in_b])
    for e in range(model.n_charts):
        if e in (a, b):
            continue
        ma = model.covering_map(a, e, region_a)
        if ma is None:
            continue
        mb = model.covering_map(b, e, region_b)
        if mb is None:
            continue
        # C-coordinates: identity on half_a, map_d_to_b on the other half
        if s.weyl_equal(ma, s.compose(mb, map_d_to_b)):
            return True
    return False


def _pending_duplicate(model, pending, a, half_a, b, map_d_to_b) -> bool:
    s = model.system
    for i in range(0, len(pending), 2):
        g1, g2 = pending[i], pending[i + 1]
        if (g1.a, g2.b) == (a, b) and g1.halfspace == half_a and s.weyl_equal(g2.tau, map_d_to_b):
            return True
    return False


# ---------------------------------------------------------------------------
# Retractions


def retraction(model: GluedMasure, germ: SectorGermRef, p: MasurePoint, target: Optional[int] = None) -> Vector:
    """rho_{target, germ}(p) in target coordinates.

    Every chart containing both p and the germ is used and the images are
    required to agree.
    """
    s = model.system
    maps = model.germ_maps(germ)
    tgt = germ.chart if target is None else target
    if tgt not in maps:
        raise NoApartmentContainsBoth(f"target chart {tgt} does not contain the germ")
    g_t = maps[tgt]
    images = {}
    for e, g_e in maps.items():
        y = model.coord_in(p, e)
        if y is None:
            continue
        images[e] = s.apply(g_t, s.apply(s.inverse(g_e), y))
    if not images:
        raise NoApartmentContainsBoth(f"no chart contains both {p} and the germ")
    vals = set(images.values())
    if len(vals) > 1:
        raise TheoremViolation("retraction depends on the chart",
                               {"point": [p.chart, vec_str(p.coord)],
                                "images": {str(k): vec_str(v) for k, v in sorted(images.items())}})
    return vals.pop()


def characterize_standard(model: GluedMasure, p: MasurePoint, plus: SectorGermRef = PLUS_INF,
                          minus: SectorGermRef = MINUS_INF) -> bool:
    return retraction(model, plus, p) == retraction(model, minus, p)


def common_chart(model: GluedMasure, p: MasurePoint, q: MasurePoint) -> Tuple[int, Vector, Vector]:
    for c in range(model.n_charts):
        x = model.coord_in(p, c)
        if x is None:
            continue
        y = model.coord_in(q, c)
        if y is not None:
            return c, x, y
    raise NoCommonChart("no chart contains both points")


def retract_segment(model: GluedMasure, p: MasurePoint, q: MasurePoint,
                    germ: SectorGermRef = PLUS_INF, chart: Optional[int] = None) -> LambdaPath:
    """Image of the segment [p, q] under the retraction, as a lambda-path."""
    s = model.system
    if chart is None:
        c, x, y = common_chart(model, p, q)
    else:
        c, x, y = chart, model.coord_in(p, chart), model.coord_in(q, chart)
        if x is None or y is None:
            raise NoCommonChart(f"chart {chart} does not contain both points")
    if leq(s, x, y) is not True:
        from .tits_order import NotComparable
        raise NotComparable("p <= q does not hold in a common chart")
    maps = model.germ_maps(germ)
    if germ.chart not in maps:
        raise NoApartmentContainsBoth("germ chart does not contain the germ")
    g_t = maps[germ.chart]
    formulas = []
    for e, g_e in sorted(maps.items()):
        to_target = s.compose(g_t, s.inverse(g_e))
        for piece in model.pieces_between(c, e):
            iv = segment_interval(piece.region, x, y)
            if iv is not None:
                formulas.append((iv[0], iv[1], s.compose(to_target, piece.map)))
    if not formulas:
        raise NoApartmentContainsBoth("segment meets no chart containing the germ")
    cuts = sorted({Fraction(0), Fraction(1)} | {f[0] for f in formulas} | {f[1] for f in formulas})
    d = ex.sub(y, x)
    segs: List[List] = []
    start = None
    for t0, t1 in zip(cuts, cuts[1:]):
        f = next((f for f in formulas if f[0] <= t0 and t1 <= f[1]), None)
        if f is None:
            raise NoApartmentContainsBoth(f"segment parameter {_fmt((t0 + t1) / 2)} is in no chart with the germ")
        if start is None:
            start = s.apply(f[2], x)
        v = ex.mat_vec(s.word_matrix(f[2].word), d)
        if segs and segs[-1][1] == v:
            segs[-1][0] = t1
        else:
            segs.append([t1, v])
    return LambdaPath(start, (Fraction(0),) + tuple(t for t, _ in segs), tuple(v for _, v in segs))


# ---------------------------------------------------------------------------
# Directional frontier


@dataclass(frozen=True)
class Frontier:
    point: Vector
    lam: Fraction


def directional_frontier(model: GluedMasure, a: int, b: int, nu, u) -> Frontier:
    """Fr_nu(u): the lowest point (in the nu order) of (u + R nu) ∩ A ∩ B, in A's coordinates.

    Returns the point together with lambda(u) such that Fr_nu(u) = u + lambda(u) nu.
    """
    s = model.system
    nu, u = ex.vec(nu), ex.vec(u)
    if (tits_cone_membership(s, nu).status is not Membership.INTERIOR
            and tits_cone_membership(s, ex.neg(nu)).status is not Membership.INTERIOR):
        raise ValueError("nu must lie in the open Tits cone or its opposite")
    best = None
    unbounded = False
    for piece in model.pieces_between(a, b):
        lo, hi, empty = None, None, False
        for h in piece.region.closed:
            slope = ex.dot(h.form, nu)
            off = ex.dot(h.form, u) + h.k
            if slope == 0:
                if off < 0:
                    empty = True
                    break
            elif slope > 0:
                v = -off / slope
                lo = v if lo is None else max(lo, v)
            else:
                v = -off / slope
                hi = v if hi is None else min(hi, v)
        if empty or (lo is not None and hi is not None and lo > hi):
            continue
        if lo is None:
            unbounded = True
            continue
        best = lo if best is None else min(best, lo)
    if unbounded:
        raise LineMissesIntersection("the line stays in the intersection in the -nu direction")
    if best is None:
        raise LineMissesIntersection("the line misses the intersection")
    return Frontier(ex.add(u, ex.scale(best, nu)), best)


# ---------------------------------------------------------------------------
# Distance between apartments


def contains_germ(model: GluedMasure, chart: int, germ: SectorGermRef) -> bool:
    return chart in model.germ_maps(germ)


def apartment_distance(model: GluedMasure, a: int, b: int, germ: Optional[SectorGermRef] = None) -> int:
    """Least n with a chain a = A_0, ..., A_n = b, consecutive charts meeting in a half-apartment.

    With a germ, the chain stays inside the charts containing it.
    """
    if germ is not None:
        allowed = set(model.germ_maps(germ))
        for c in (a, b):
            if c not in allowed:
                raise NotConnected(f"chart {c} does not contain the germ")
    else:
        allowed = set(range(model.n_charts))
    if a == b:
        return 0
    dist = {a: 0}
    queue = deque([a])
    while queue:
        c = queue.popleft()
        for e in sorted(allowed):
            if e in dist or e == c:
                continue
            if _pair_half_apartment(model, c, e) is None:
                continue
            dist[e] = dist[c] + 1
            if e == b:
                return dist[e]
            queue.append(e)
    raise NotConnected(f"no half-apartment chain joins charts {a} and {b}")


def half_apartment_path(model: GluedMasure, a: int, b: int, germ: Optional[SectorGermRef] = None) -> List[int]:
    """A shortest chain of charts realizing apartment_distance."""
    allowed = set(model.germ_maps(germ)) if germ is not None else set(range(model.n_charts))
    prev = {a: None}
    queue = deque([a])
    while queue:
        c = queue.popleft()
        if c == b:
            break
        for e in sorted(allowed):
            if e not in prev and e != c and _pair_half_apartment(model, c, e) is not None:
                prev[e] = c
                queue.append(e)
    if b not in prev:
        raise NotConnected(f"no half-apartment chain joins charts {a} and {b}")
    path = [b]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


# ---------------------------------------------------------------------------
# Catalogs and axiom checks


def grid_points(dim: int, box: Fraction, step: Fraction) -> List[Vector]:
    n = int(2 * box / step)
    axis = [-box + i * step for i in range(n + 1)]
    return [tuple(p) for p in product(axis, repeat=dim)]


def words_up_to(system: RootGeneratingSystem, length: int) -> List[Tuple[int, ...]]:
    """One reduced word per vectorial Weyl element of length <= length."""
    seen = {(): None}
    frontier = [()]
    for _ in range(length):
        nxt = []
        for w in frontier:
            for i in range(system.rank):
                red = system.reduced_word(w + (i,))
                if red not in seen:
                    seen[red] = None
                    nxt.append(red)
        frontier = nxt
    return list(seen)


def vectorial_faces(system: RootGeneratingSystem, length: int, spherical_only: bool = False) -> List[VectorialFace]:
    """Distinct faces ±w.F^v(J) with l(w) <= length, keyed by their sample points."""
    out, keys = [], set()
    subsets = [J for r in range(system.rank + 1) for J in combinations(range(system.rank), r)]
    for w in words_up_to(system, length):
        for sign in (1, -1):
            for J in subsets:
                f = VectorialFace(sign, w, J)
                if spherical_only and not f.spherical(system):
                    continue
                key = f.sample(system)
                if key in keys:
                    continue
                keys.add(key)
                out.append(f)
    return out


@dataclass
class Catalog:
    points: List[MasurePoint]
    faces: List[Tuple[MasurePoint, VectorialFace]]
    germs: List[SectorGermRef]
    face_masks: List[int]
    germ_masks: List[int]
    bounds: Dict


def _mask(charts: Iterable[int]) -> int:
    m = 0
    for c in charts:
        m |= 1 << c
    return m


def build_catalog(model: GluedMasure, box=2, window: int = 1, step=None, cap: int = 50_000) -> Catalog:
    s = model.system
    box = ex.as_fraction(box)
    step = ex.as_fraction(step) if step is not None else (Fraction(1, 2) if s.dim == 1 else Fraction(1))
    grid = grid_points(s.dim, box, step)
    vfaces = vectorial_faces(s, window)
    chambers = [f for f in vfaces if not f.J]
    estimate = model.n_charts * len(grid) * (1 + len(vfaces))
    if estimate > cap:
        raise CatalogTooLarge(f"catalog would hold about {estimate} items (cap {cap})")
    points, seen = [], set()
    for c in range(model.n_charts):
        for x in grid:
            can = model.canonical(MasurePoint(c, x))
            if can not in seen:
                seen.add(can)
                points.append(can)
    faces, face_masks, seen_f = [], [], set()
    for p in points:
        for d in vfaces:
            where = {}
            for e in range(model.n_charts):
                y = model.chart_contains_face(e, p.chart, p.coord, d)
                if y is not None:
                    where[e] = y
            e0 = min(where)
            piece = next(pc for pc in model.pieces_between(p.chart, e0) if pc.region.contains(p.coord))
            key = (e0, where[e0], ex.mat_vec(s.word_matrix(piece.map.word), d.sample(s)))
            if key in seen_f:
                continue
            seen_f.add(key)
            faces.append((p, d))
            face_masks.append(_mask(where))
    germs, germ_masks, seen_g = [], [], set()
    for c in range(model.n_charts):
        for d in chambers:
            g = SectorGermRef(c, d.sign, d.word)
            maps = model.germ_maps(g)
            e0 = min(maps)
            key = (e0, ex.mat_vec(s.word_matrix(maps[e0].word), d.sample(s)))
            if key in seen_g:
                continue
            seen_g.add(key)
            germs.append(g)
            germ_masks.append(_mask(maps))
    bounds = {"box": _fmt(box), "step": _fmt(step), "window": window, "points": len(points),
              "faces": len(faces), "germs": len(germs)}
    return Catalog(points, faces, germs, face_masks, germ_masks, bounds)


@dataclass
class AxiomResult:
    name: str
    passed: bool
    checked: int
    witness: Optional[Dict] = None


@dataclass
class AxiomReport:
    results: List[AxiomResult]
    bounds: Dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def by_name(self, name: str) -> AxiomResult:
        return next(r for r in self.results if r.name == name)


AXIOM_SUITES = ("MA1", "MAafii", "MAiii-pairs", "MAO", "Friendly")


def _germ_json(g: SectorGermRef):
    return {"chart": g.chart, "sign": "+" if g.sign > 0 else "-", "word": list(g.word)}


def _face_json(p: MasurePoint, d: VectorialFace):
    return {"chart": p.chart, "point": vec_str(p.coord),
            "direction": {"sign": "+" if d.sign > 0 else "-", "word": list(d.word), "J": list(d.J)}}


def check_axioms(model: GluedMasure, suites: Sequence[str] = AXIOM_SUITES, box=2, window: int = 1,
                 step=None, cap: int = 50_000) -> AxiomReport:
    s = model.system
    suites = list(suites)
    for name in suites:
        if name not in AXIOM_SUITES:
            raise ValueError(f"unknown axiom suite {name!r}")
    needs_catalog = any(n in suites for n in ("MAiii-pairs", "MAO", "Friendly"))
    cat = build_catalog(model, box, window, step, cap) if needs_catalog else None
    bounds = dict(cat.bounds) if cat else {"window": window}
    bounds["truncated_closure"] = model.truncated
    results = []
    for name in AXIOM_SUITES:
        if name not in suites:
            continue
        if name == "MA1":
            results.append(_check_ma1(model))
        elif name == "MAafii":
            results.append(_check_maafii(model))
        elif name == "MAiii-pairs":
            results.append(_check_maiii(model, cat))
        elif name == "MAO":
            results.append(_check_mao(model, cat))
        else:
            results.append(_check_friendly(cat))
    return AxiomReport(results, bounds)


def _check_ma1(model: GluedMasure) -> AxiomResult:
    """Every transition piece is an element of W and charts never fold onto themselves."""
    s = model.system
    gens = model.walls.qvee_generators(s)
    n = 0
    if model.truncated:
        return AxiomResult("MA1", False, 0, {"reason": "closure truncated", "max_steps": model.max_steps})
    for (a, b), ps in sorted(model.pieces.items()):
        for p in ps:
            n += 1
            if not s.in_coroot_lattice(p.map.shift(s.dim), gens):
                return AxiomResult("MA1", False, n, {"charts": [a, b], "translation": vec_str(p.map.shift(s.dim))})
            if a == b and agreement_witness(s, IDENTITY, p.map, p.region) is not None:
                return AxiomResult("MA1", False, n, {"chart": a, "walk": _walk_json(p.walk)})
    return AxiomResult("MA1", True, n)


def _check_maafii(model: GluedMasure) -> AxiomResult:
    n = 0
    for a, b in combinations(range(model.n_charts), 2):
        try:
            intersect_apartments(model, a, b)
            n += 1
        except EmptyIntersection:
            continue
        except TheoremViolation as err:
            return AxiomResult("MAafii", False, n, err.witness)
    return AxiomResult("MAafii", True, n)


def _check_maiii(model: GluedMasure, cat: Catalog) -> AxiomResult:
    n = 0
    for gi, (g, gm) in enumerate(zip(cat.germs, cat.germ_masks)):
        for (p, d), fm in zip(cat.faces, cat.face_masks):
            n += 1
            if not gm & fm:
                return AxiomResult("MAiii-pairs", False, n, {"germ": _germ_json(g), "face": _face_json(p, d)})
        for h, hm in zip(cat.germs[gi + 1:], cat.germ_masks[gi + 1:]):
            n += 1
            if not gm & hm:
                return AxiomResult("MAiii-pairs", False, n, {"germ": _germ_json(g), "other_germ": _germ_json(h)})
    return AxiomResult("MAiii-pairs", True, n)


def _check_friendly(cat: Catalog) -> AxiomResult:
    n = 0
    faces = cat.faces
    masks = cat.face_masks
    for i in range(len(faces)):
        mi = masks[i]
        for j in range(i + 1, len(faces)):
            n += 1
            if not mi & masks[j]:
                return AxiomResult("Friendly", False, n,
                                   {"faces": [_face_json(*faces[i]), _face_json(*faces[j])]})
    return AxiomResult("Friendly", True, n)


def segment_coincides(model: GluedMasure, c1: int, c2: int, x: Vector, y: Vector) -> Optional[Dict]:
    """None when the c1-segment [x, y] is carried onto the c2-segment between the images; else a witness."""
    s = model.system
    x2 = model.coord_in(MasurePoint(c1, x), c2)
    y2 = model.coord_in(MasurePoint(c1, y), c2)
    parts = []
    for piece in model.pieces_between(c1, c2):
        iv = segment_interval(piece.region, x, y)
        if iv is not None:
            parts.append((iv, piece.map))
    cuts = sorted({Fraction(0), Fraction(1)} | {iv[0] for iv, _ in parts} | {iv[1] for iv, _ in parts})
    for t0, t1 in zip(cuts, cuts[1:]):
        m = next((g for iv, g in parts if iv[0] <= t0 and t1 <= iv[1]), None)
        if m is None:
            return {"charts": [c1, c2], "x": vec_str(x), "y": vec_str(y), "gap_at": _fmt((t0 + t1) / 2)}
        for t in (t0, t1):
            z = ex.add(x, ex.scale(t, ex.sub(y, x)))
            if s.apply(m, z) != ex.add(x2, ex.scale(t, ex.sub(y2, x2))):
                return {"charts": [c1, c2], "x": vec_str(x), "y": vec_str(y), "bends_at": _fmt(t)}
    return None


def _check_mao(model: GluedMasure, cat: Catalog) -> AxiomResult:
    s = model.system
    n = 0
    for c1, c2 in combinations(range(model.n_charts), 2):
        shared = []
        for p in cat.points:
            x = model.coord_in(p, c1)
            if x is not None and model.coord_in(p, c2) is not None:
                shared.append(x)
        pieces = model.pieces_between(c1, c2)
        for x, y in combinations(shared, 2):
            if any(pc.region.contains(x) and pc.region.contains(y) for pc in pieces):
                n += 1
                continue
            for u, v in ((x, y), (y, x)):
                if leq(s, u, v) is True:
                    n += 1
                    w = segment_coincides(model, c1, c2, u, v)
                    if w is not None:
                        return AxiomResult("MAO", False, n, w)
                    break
    return AxiomResult("MAO", True, n)


# ---------------------------------------------------------------------------
# Constructive reciprocal


@dataclass(frozen=True)
class Realization:
    model: GluedMasure
    chart: int


def realize_intersection(system: RootGeneratingSystem, walls: WallFamily, p: HalfSpaceSet,
                         saturated: bool = False) -> Realization:
    """A model with a chart A such that A ∩ A0 = P.

    P = D_1 ∩ ... ∩ D_k (minimal writing, nonempty interior); chart i is
    glued to chart i-1 along D_i, so the last chart meets chart 0 exactly in P.
    """
    if p.open:
        raise ValueError("P must be a closed half-space set")
    if not p.has_interior():
        raise ValueError("P must have nonempty interior")
    if len(p.simplified().closed) != len(p.closed):
        raise NotMinimalWriting("some half-apartment of P is implied by the others")
    for h in p.closed:
        c = system.form_coeffs(h.form)
        if c is None or not system.is_real_root(c):
            raise LevelNotReflectable(f"{vec_str(h.form)} is not a real root")
        c = tuple(int(x) for x in c)
        if not walls.contains_level(system, c, h.k) or not walls.reflectable(system, c, h.k):
            raise LevelNotReflectable(f"level {_fmt(h.k)} of root {list(c)} carries no reflection of W")
    gluings = [Gluing(i, i + 1, h, IDENTITY) for i, h in enumerate(p.closed)]
    model = GluedMasure(system, walls, len(gluings) + 1, gluings)
    if saturated:
        model = saturate(model)
    return Realization(model, len(gluings))
