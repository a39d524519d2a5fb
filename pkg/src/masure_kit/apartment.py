"""Walls, half-apartments and enclosed sets in a single apartment.

Enclosed sets are stored as finite lists of half-apartments
D(alpha, k) = {v : alpha(v) + k >= 0}; strict entries D°(alpha, k) appear only
in face germs.  Enclosure is always taken over an explicit finite window of
real roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import _exact as ex
from ._exact import Vector, ZERO
from .root_system import RootGeneratingSystem, enumerate_real_roots, is_finite_type


class EmptyInput(ValueError):
    pass


class EmptySet(ValueError):
    pass


class OriginNotInterior(ValueError):
    pass


class ZeroGauge(ValueError):
    pass


class WallFamilyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Half-spaces


@dataclass(frozen=True)
class HalfSpace:
    """D(form, k) when closed, D°(form, k) when used as an open entry."""

    form: Vector
    k: Fraction

    @staticmethod
    def make(form, k) -> "HalfSpace":
        return HalfSpace(ex.vec(form), ex.as_fraction(k))

    def value(self, v: Vector) -> Fraction:
        return ex.dot(self.form, v) + self.k

    def opposite(self) -> "HalfSpace":
        """The other closed half-apartment bounded by the same wall."""
        return HalfSpace(ex.neg(self.form), -self.k)


@dataclass(frozen=True)
class HalfSpaceSet:
    dim: int
    closed: Tuple[HalfSpace, ...] = ()
    open: Tuple[HalfSpace, ...] = ()

    @staticmethod
    def of(dim: int, closed: Iterable[HalfSpace] = (), open: Iterable[HalfSpace] = ()) -> "HalfSpaceSet":
        return HalfSpaceSet(dim, _dedupe(closed), _dedupe(open))

    @staticmethod
    def whole(dim: int) -> "HalfSpaceSet":
        return HalfSpaceSet(dim)

    @property
    def is_enclosed(self) -> bool:
        return not self.open

    def contains(self, v) -> bool:
        v = ex.vec(v)
        return all(h.value(v) >= 0 for h in self.closed) and all(h.value(v) > 0 for h in self.open)

    def intersect(self, other: "HalfSpaceSet") -> "HalfSpaceSet":
        return HalfSpaceSet.of(self.dim, self.closed + other.closed, self.open + other.open)

    def with_closed(self, *hs: HalfSpace) -> "HalfSpaceSet":
        return HalfSpaceSet.of(self.dim, self.closed + tuple(hs), self.open)

    def _interval(self):
        """dim 1 only: (lo, lo_open, hi, hi_open) with None for infinite ends, or None if a constant constraint fails."""
        lo = hi = None
        lo_open = hi_open = False
        for strict, hs in ((False, self.closed), (True, self.open)):
            for h in hs:
                f = h.form[0]
                if f == 0:
                    if h.k < 0 or (strict and h.k == 0):
                        return None
                    continue
                b = -h.k / f
                if f > 0:
                    if lo is None or b > lo or (b == lo and strict):
                        lo, lo_open = b, strict
                else:
                    if hi is None or b < hi or (b == hi and strict):
                        hi, hi_open = b, strict
        return lo, lo_open, hi, hi_open

    def point(self) -> Optional[Vector]:
        if self.dim == 1:
            iv = self._interval()
            if iv is None:
                return None
            lo, lo_open, hi, hi_open = iv
            if lo is None and hi is None:
                return (ZERO,)
            if lo is None:
                return (hi - 1 if hi_open else hi,)
            if hi is None:
                return (lo + 1 if lo_open else lo,)
            if lo > hi or (lo == hi and (lo_open or hi_open)):
                return None
            return ((lo + hi) / 2,) if (lo_open or hi_open) else (lo,)
        if not self.open:
            vr = self._vrep()
            if vr is not None:
                return vr.lift(vr.vertices[0]) if vr.feasible else None
        return ex.feasible_point(self.dim, ge=[(h.form, h.k) for h in self.closed],
                                 gt=[(h.form, h.k) for h in self.open])

    def _vrep(self):
        """Cached vertex description of the closure (None when too large to enumerate)."""
        return ex.vrep(self.dim, tuple((h.form, h.k) for h in self.closed + self.open))

    def is_empty(self) -> bool:
        return self.point() is None

    def interior_point(self) -> Optional[Vector]:
        """A point where every constraint is strict (None when the interior is empty)."""
        if any(all(x == 0 for x in h.form) and h.k <= 0 for h in self.closed + self.open):
            return None
        hs = [(h.form, h.k) for h in self.closed + self.open if any(x != 0 for x in h.form)]
        return ex.feasible_point(self.dim, gt=hs)

    def has_interior(self) -> bool:
        return self.interior_point() is not None

    def minimum(self, form: Vector) -> Tuple[str, Optional[Fraction]]:
        """inf of a linear form over the closure: ("optimal", value) | ("unbounded", None) | ("infeasible", None)."""
        if self.dim == 1:
            iv = self._interval()
            if iv is None:
                return "infeasible", None
            lo, _, hi, _ = iv
            if lo is not None and hi is not None and lo > hi:
                return "infeasible", None
            f = form[0]
            if f == 0:
                return "optimal", ZERO
            end = lo if f > 0 else hi
            return ("unbounded", None) if end is None else ("optimal", f * end)
        vr = self._vrep()
        if vr is not None:
            status, val, _ = vr.minimize(form)
            return status, val
        a_ub = [ex.neg(h.form) for h in self.closed + self.open]
        b_ub = [h.k for h in self.closed + self.open]
        res = ex.minimize(form, a_ub, b_ub)
        return res.status, res.value

    def extreme(self, form: Vector, maximize: bool = False):
        """(status, value, point) for min (or max) of a linear form over the closure."""
        sign = -1 if maximize else 1
        f = tuple(sign * x for x in form)
        if self.dim == 1:
            status, val = self.minimum(f)
            if status != "optimal":
                return status, None, None
            iv = self._interval()
            lo, _, hi, _ = iv
            if f[0] > 0:
                pt = lo
            elif f[0] < 0:
                pt = hi
            else:
                pt = self.point()[0]
            return status, sign * val, (pt,)
        vr = self._vrep()
        if vr is not None:
            status, val, x = vr.minimize(f)
            return (status, None, None) if status != "optimal" else (status, sign * val, x)
        a_ub = [ex.neg(h.form) for h in self.closed + self.open]
        b_ub = [h.k for h in self.closed + self.open]
        res = ex.minimize(f, a_ub, b_ub)
        if res.status != "optimal":
            return res.status, None, None
        return res.status, sign * res.value, res.x

    def contained_in(self, other: "HalfSpaceSet") -> bool:
        """self ⊆ other (both treated through their closed constraints plus strictness of other)."""
        if self.is_empty():
            return True
        for h in other.closed:
            status, val = self.minimum(h.form)
            if status == "unbounded" or val + h.k < 0:
                return False
        for h in other.open:
            status, val = self.minimum(h.form)
            if status == "unbounded" or val + h.k < 0:
                return False
            if val + h.k == 0:
                # the closure touches the wall; only fine if self stays strictly off it
                probe = HalfSpaceSet(self.dim, self.closed + (HalfSpace(ex.neg(h.form), -h.k),), self.open)
                if not probe.is_empty():
                    return False
        return True

    def same_set(self, other: "HalfSpaceSet") -> bool:
        return self.contained_in(other) and other.contained_in(self)

    def simplified(self) -> "HalfSpaceSet":
        """Drop closed constraints implied by the others (the set is unchanged)."""
        if self.is_empty():
            return self
        keep = list(self.closed)
        i = 0
        while i < len(keep):
            rest = HalfSpaceSet(self.dim, tuple(keep[:i] + keep[i + 1:]), self.open)
            if rest.contained_in(HalfSpaceSet(self.dim, (keep[i],))):
                keep.pop(i)
            else:
                i += 1
        return HalfSpaceSet(self.dim, tuple(keep), self.open)


def _dedupe(hs: Iterable[HalfSpace]) -> Tuple[HalfSpace, ...]:
    seen = {}
    for h in hs:
        seen.setdefault(h, None)
    return tuple(sorted(seen, key=lambda h: (h.form, h.k)))


# ---------------------------------------------------------------------------
# Wall families


def _root_key(system: RootGeneratingSystem, c: Sequence[int]) -> Tuple[int, int]:
    """(sign, i) with c = sign * w.alpha_i, found by descent."""
    c = tuple(int(x) for x in c)
    sign = 1
    if all(x <= 0 for x in c):
        c, sign = tuple(-x for x in c), -1
    for _ in range(10_000):
        if sum(c) == 1 and all(x >= 0 for x in c):
            return sign, c.index(1)
        for i in range(system.rank):
            if sum(system.gcm[i, j] * c[j] for j in range(system.rank)) > 0:
                c = system.reflect_coeffs(i, c)
                break
        else:
            break
    raise WallFamilyError(f"{c} is not a real root")


@dataclass(frozen=True)
class WallFamily:
    """Admissible wall levels Lambda'_alpha for every real root.

    ``explicit`` is None for the default family (all integers); otherwise it
    maps each simple-root index to a sorted finite tuple of levels, and
    Lambda'_{±w.alpha_i} = ±Lambda'_{alpha_i}.
    """

    explicit: Optional[Tuple[Tuple[int, Tuple[Fraction, ...]], ...]] = None

    @staticmethod
    def integers() -> "WallFamily":
        return WallFamily()

    @staticmethod
    def from_lists(system: RootGeneratingSystem, values: Dict[int, Sequence]) -> "WallFamily":
        table = {}
        for i in range(system.rank):
            if i not in values:
                raise WallFamilyError(f"no levels given for alpha_{i}")
            table[i] = tuple(sorted({ex.as_fraction(x) for x in values[i]}))
        # roots in one W-orbit must carry the same levels
        for i in range(system.rank):
            for j in range(system.rank):
                if system.gcm[i, j] * system.gcm[j, i] == 1 and table[i] != table[j]:
                    raise WallFamilyError(f"alpha_{i} and alpha_{j} are W-conjugate but have different levels")
        return WallFamily(tuple(sorted(table.items())))

    def _levels(self, system, c) -> Optional[Tuple[Fraction, ...]]:
        if self.explicit is None:
            return None
        sign, i = _root_key(system, c)
        base = dict(self.explicit)[i]
        return base if sign > 0 else tuple(sorted(-x for x in base))

    def contains_level(self, system: RootGeneratingSystem, c, k) -> bool:
        k = ex.as_fraction(k)
        lv = self._levels(system, c)
        if lv is None:
            return k.denominator == 1
        return k in lv

    def min_level_at_least(self, system: RootGeneratingSystem, c, x: Fraction) -> Optional[Fraction]:
        """Smallest admissible k >= x, or None when no level is that large."""
        lv = self._levels(system, c)
        if lv is None:
            return Fraction(-((-x.numerator) // x.denominator))
        return next((k for k in lv if k >= x), None)

    def qvee_generators(self, system: RootGeneratingSystem) -> Tuple[Fraction, ...]:
        """g_i with Q^vee = sum_i Z g_i alpha_i^vee."""
        if self.explicit is None:
            return (Fraction(1),) * system.rank
        out = []
        for _, levels in self.explicit:
            out.append(_fraction_gcd(levels))
        return tuple(out)

    def reflectable(self, system: RootGeneratingSystem, c, k) -> bool:
        """Whether k lies in 1/2 alpha(Q^vee), so the wall M(alpha, k) carries a reflection of W."""
        k = ex.as_fraction(k)
        h = _fraction_gcd([g * sum(system.gcm[i, j] * c[j] for j in range(system.rank))
                           for i, g in enumerate(self.qvee_generators(system))])
        if h == 0:
            return k == 0
        return ((2 * k) / h).denominator == 1

    def to_json(self):
        if self.explicit is None:
            return {"kind": "integers"}
        return {"kind": "explicit",
                "values": {str(i): [_fstr(x) for x in lv] for i, lv in self.explicit}}


def _fraction_gcd(xs: Iterable[Fraction]) -> Fraction:
    xs = list(xs)
    num, den = 0, 1
    for x in xs:
        x = ex.as_fraction(x)
        if x == 0:
            continue
        den = den * x.denominator // gcd(den, x.denominator)
    for x in xs:
        x = ex.as_fraction(x)
        num = gcd(num, abs(int(x * den)))
    return Fraction(num, den)


def _fstr(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Enclosure


def root_window_forms(system: RootGeneratingSystem, max_len: int) -> Tuple[Tuple[Tuple[int, ...], Vector], ...]:
    """(coefficients, form) for every root of the window, closed under negation."""
    win = enumerate_real_roots(system, max_len)
    return tuple((c, system.root_form(c)) for c in win.coeffs)


def enclosure_cl_sharp(system: RootGeneratingSystem, walls: WallFamily,
                       u: Union[HalfSpaceSet, Sequence], window: int = 3,
                       extra_roots: Sequence[Tuple[int, ...]] = ()) -> HalfSpaceSet:
    """cl^# of a finite point set or a half-space set over the root window.

    Each root alpha of the window contributes D(alpha, k) with k the least
    admissible level such that D(alpha, k) contains u; roots unbounded below on
    u contribute nothing.
    """
    roots = dict(root_window_forms(system, window))
    for c in extra_roots:
        c = tuple(int(x) for x in c)
        roots.setdefault(c, system.root_form(c))
        neg = tuple(-x for x in c)
        roots.setdefault(neg, system.root_form(neg))
    if isinstance(u, HalfSpaceSet):
        if u.is_empty():
            raise EmptyInput("cannot enclose the empty set")

        def inf_of(f):
            status, val = u.minimum(f)
            return val if status == "optimal" else None
    else:
        pts = [ex.vec(p) for p in u]
        if not pts:
            raise EmptyInput("cannot enclose an empty point set")

        def inf_of(f):
            return min(ex.dot(f, p) for p in pts)
    out = []
    for c, f in sorted(roots.items()):
        m = inf_of(f)
        if m is None:
            continue
        k = walls.min_level_at_least(system, c, -m)
        if k is not None:
            out.append(HalfSpace(f, k))
    return HalfSpaceSet.of(system.dim, out)


# ---------------------------------------------------------------------------
# Support of an enclosed set


@dataclass(frozen=True)
class AffineSubspace:
    point: Vector
    directions: Tuple[Vector, ...]
    witness: Tuple[int, ...]
    """indices (into the closed list) of the walls whose intersection is the support"""

    @property
    def dim(self) -> int:
        return len(self.directions)

    def contains(self, v) -> bool:
        v = ex.vec(v)
        d = ex.sub(v, self.point)
        if not self.directions:
            return all(x == 0 for x in d)
        return ex.rank(list(self.directions) + [d]) == len(self.directions)


def support_of_enclosed(e: HalfSpaceSet) -> AffineSubspace:
    """Affine span of a nonempty enclosed set, with the walls cutting it out.

    A constraint belongs to the witness set when its maximum over the set is
    zero, i.e. it is an implicit equality.
    """
    if e.open:
        raise ValueError("support_of_enclosed expects a closed half-space set")
    p = e.point()
    if p is None:
        raise EmptySet("enclosed set is empty")
    a_ub = [ex.neg(h.form) for h in e.closed]
    b_ub = [h.k for h in e.closed]
    witness = []
    for idx, h in enumerate(e.closed):
        res = ex.maximize(h.form, a_ub, b_ub)
        if res.status == "optimal" and res.value + h.k == 0:
            witness.append(idx)
    eq_rows = [e.closed[i].form for i in witness]
    dirs = ex.nullspace(eq_rows, e.dim) if eq_rows else ex.identity(e.dim)
    return AffineSubspace(p, tuple(dirs), tuple(witness))


# ---------------------------------------------------------------------------
# Gauge and frontier


def _gauge_terms(c: HalfSpaceSet):
    if c.open:
        raise ValueError("gauge needs a closed convex set")
    terms = []
    for h in c.closed:
        if all(x == 0 for x in h.form):
            if h.k < 0:
                raise OriginNotInterior("the set is empty")
            continue
        if h.k <= 0:
            raise OriginNotInterior(f"origin is not strictly inside D({h.form}, {h.k})")
        terms.append(h)
    return terms


def gauge_value(c: HalfSpaceSet, s) -> Fraction:
    """j_C(s) = inf{t > 0 : s in tC} for C containing 0 in its interior."""
    s = ex.vec(s)
    best = ZERO
    for h in _gauge_terms(c):
        t = -ex.dot(h.form, s) / h.k
        if t > best:
            best = t
    return best


def frontier_point(c: HalfSpaceSet, s) -> Vector:
    s = ex.vec(s)
    j = gauge_value(c, s)
    if j == 0:
        raise ZeroGauge("the ray through s never leaves C")
    return ex.scale(1 / j, s)


# ---------------------------------------------------------------------------
# Iterated convex hulls


def _in_hull(points: Sequence[Vector], x: Vector) -> bool:
    """x in conv(points), by exact LP feasibility."""
    k = len(points)
    n = len(x)
    a_eq = [[points[j][i] for j in range(k)] for i in range(n)] + [[Fraction(1)] * k]
    b_eq = list(x) + [Fraction(1)]
    a_ub = [[Fraction(-1) if j == i else ZERO for j in range(k)] for i in range(k)]
    b_ub = [ZERO] * k
    return ex.maximize([ZERO] * k, a_ub, b_ub, a_eq, b_eq).status == "optimal"


@dataclass(frozen=True)
class ConvIterate:
    """conv_k(P) as the union of conv(S) over subsets S of P with |S| <= 2^k."""

    points: Tuple[Vector, ...]
    k: int

    @property
    def cell_size(self) -> int:
        return min(2 ** self.k, len(self.points))

    def cells(self) -> Tuple[Tuple[Vector, ...], ...]:
        return tuple(combinations(self.points, self.cell_size))

    def contains(self, x) -> bool:
        x = ex.vec(x)
        if x in self.points:
            return True
        return any(_in_hull(cell, x) for cell in self.cells())

    def hull_vertices(self) -> Tuple[Vector, ...]:
        """Extreme points of conv(P), the vertex set of the closure of conv_k(P) once it is convex."""
        pts = list(dict.fromkeys(self.points))
        return tuple(p for i, p in enumerate(pts) if len(pts) == 1 or not _in_hull(pts[:i] + pts[i + 1:], p))


def conv_iterate(points: Iterable, k: int) -> ConvIterate:
    if k < 0:
        raise ValueError("k must be >= 0")
    pts = tuple(dict.fromkeys(ex.vec(p) for p in points))
    return ConvIterate(pts, k)


def affine_dimension(points: Sequence[Vector]) -> int:
    pts = [ex.vec(p) for p in points]
    if not pts:
        return -1
    return ex.rank([ex.sub(p, pts[0]) for p in pts[1:]]) if len(pts) > 1 else 0


# ---------------------------------------------------------------------------
# Vectorial faces and face germs


class FaceKind(str, Enum):
    LOCAL_FACE = "LocalFace"
    FACE = "Face"
    CHIMNEY = "Chimney"
    SECTOR_GERM = "SectorGerm"


@dataclass(frozen=True)
class VectorialFace:
    """eps * w.F^v(J), with F^v(J) = {alpha_j = 0 (j in J), alpha_i > 0 (i not in J)}."""

    sign: int = 1
    word: Tuple[int, ...] = ()
    J: Tuple[int, ...] = ()

    def sign_of(self, system: RootGeneratingSystem, c: Sequence[int]) -> int:
        """Sign (+1, 0, -1) of the real root with coefficients c on this vectorial face."""
        form = system.root_form(c)
        pulled = ex.scale(self.sign, ex.vec_mat(form, system.word_matrix(self.word)))
        coeffs = system.form_coeffs(pulled)
        outside = [x for i, x in enumerate(coeffs) if i not in self.J]
        if all(x == 0 for x in outside):
            return 0
        return 1 if all(x >= 0 for x in outside) else -1

    def form_nonneg(self, system: RootGeneratingSystem, form: Vector) -> bool:
        """Whether a linear form in the root span is >= 0 on the face."""
        pulled = ex.scale(self.sign, ex.vec_mat(form, system.word_matrix(self.word)))
        coeffs = system.form_coeffs(pulled)
        if coeffs is None:
            # a form outside the root span is unbounded on any face containing A_in directions
            return all(x == 0 for x in pulled)
        outside = [x for i, x in enumerate(coeffs) if i not in self.J]
        # on F^v(J), alpha_j = 0 for j in J and the other alpha_i range over all positive values
        return all(x >= 0 for x in outside)

    def sample(self, system: RootGeneratingSystem) -> Vector:
        """A point of the face: eps * w(v) with alpha_i(v) = 1 off J, 0 on J."""
        target = tuple(Fraction(0 if i in self.J else 1) for i in range(system.rank))
        v = ex.solve(system.roots, target)
        return ex.scale(self.sign, system.apply_word(self.word, v))

    def spherical(self, system: RootGeneratingSystem) -> bool:
        return is_finite_type(system.gcm, self.J)


@dataclass(frozen=True)
class FaceDescriptor:
    base: Vector
    direction: VectorialFace
    kind: FaceKind = FaceKind.LOCAL_FACE


@dataclass(frozen=True)
class FaceData:
    halfspaces: HalfSpaceSet
    spherical: bool


def face_descriptor_data(system: RootGeneratingSystem, walls: WallFamily, face: FaceDescriptor,
                         window: int = 3) -> FaceData:
    """Finite defining data of a face-type filter over the root window.

    Local faces: walls through the base point that contain the direction give
    equalities, walls through the base point positive on the direction give
    open half-spaces.  Chimneys and sector germs: each root bounded below on
    base + direction gives its least admissible closed half-apartment.
    """
    x = ex.vec(face.base)
    d = face.direction
    closed, opened = [], []
    for c, f in root_window_forms(system, window):
        s = d.sign_of(system, c)
        val = ex.dot(f, x)
        if face.kind in (FaceKind.LOCAL_FACE, FaceKind.FACE):
            if not walls.contains_level(system, c, -val):
                continue
            if s == 0:
                closed.append(HalfSpace(f, -val))
            elif s > 0:
                opened.append(HalfSpace(f, -val))
        else:
            if s < 0:
                continue
            k = walls.min_level_at_least(system, c, -val)
            if k is not None:
                closed.append(HalfSpace(f, k))
    spherical = d.spherical(system) if face.kind is not FaceKind.SECTOR_GERM else True
    return FaceData(HalfSpaceSet.of(system.dim, closed, opened), spherical)
