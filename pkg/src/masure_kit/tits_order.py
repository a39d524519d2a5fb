"""Tits cone membership, the preorders on an apartment, and lambda-paths."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Iterator, List, Optional, Sequence, Tuple

from . import _exact as ex
from ._exact import Vector
from .root_system import (CartanKind, NotInTitsCone, RootGeneratingSystem, classify_type,
                          dominant_representative, is_finite_type, null_root)


class NotComparable(ValueError):
    pass


class NonDominantLambda(ValueError):
    pass


class Membership(str, Enum):
    INTERIOR = "InteriorT"
    BOUNDARY = "BoundaryT"
    NOT_IN = "NotInT"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class MembershipResult:
    status: Membership
    bound: Optional[int] = None

    @property
    def in_cone(self) -> Optional[bool]:
        if self.status is Membership.UNKNOWN:
            return None
        return self.status is not Membership.NOT_IN


def _kind(system: RootGeneratingSystem) -> str:
    blocks = classify_type(system.gcm)
    if all(b.kind is CartanKind.FINITE for b in blocks):
        return "finite"
    if len(blocks) == 1 and blocks[0].kind is CartanKind.AFFINE:
        return "affine"
    return "other"


def system_kind(system: RootGeneratingSystem) -> str:
    key = ("kind",)
    if key not in system._cache:
        system._cache[key] = _kind(system)
    return system._cache[key]


def tits_cone_membership(system: RootGeneratingSystem, v, bound: Optional[int] = None) -> MembershipResult:
    v = ex.vec(v)
    kind = system_kind(system)
    if kind == "finite":
        return MembershipResult(Membership.INTERIOR)
    if kind == "affine":
        d = null_root(system)(v)
        if d > 0:
            return MembershipResult(Membership.INTERIOR)
        if d == 0 and system.in_inessential(v):
            return MembershipResult(Membership.BOUNDARY)
        return MembershipResult(Membership.NOT_IN)
    # general case: a terminating dominance run certifies membership; the
    # interior is detected by the type of the stabilizer of the dominant point
    try:
        lam, _ = dominant_representative(system, v, bound)
    except NotInTitsCone as err:
        return MembershipResult(Membership.UNKNOWN, err.bound)
    zero = tuple(i for i in range(system.rank) if system.alpha(i, lam) == 0)
    if is_finite_type(system.gcm, zero):
        return MembershipResult(Membership.INTERIOR)
    return MembershipResult(Membership.BOUNDARY)


def leq(system: RootGeneratingSystem, x, y) -> Optional[bool]:
    """x <= y, i.e. y - x in the Tits cone; None when undecided."""
    return tits_cone_membership(system, ex.sub(ex.vec(y), ex.vec(x))).in_cone


def open_leq(system: RootGeneratingSystem, x, y) -> Optional[bool]:
    """x <̊ y, i.e. y - x in the open Tits cone or y = x; None when undecided."""
    d = ex.sub(ex.vec(y), ex.vec(x))
    if all(c == 0 for c in d):
        return True
    m = tits_cone_membership(system, d)
    if m.status is Membership.UNKNOWN:
        return None
    return m.status is Membership.INTERIOR


def qvee_leq(system: RootGeneratingSystem, x, y) -> bool:
    """y - x in the closed cone spanned by the simple coroots.

    The coroots are linearly independent, so the coefficients are unique and
    the cone test reduces to an exact solve followed by sign checks.
    """
    u = system.coroot_coords(ex.sub(ex.vec(y), ex.vec(x)))
    return u is not None and all(c >= 0 for c in u)


def vectorial_distance(system: RootGeneratingSystem, x, y) -> Vector:
    if leq(system, x, y) is not True:
        raise NotComparable("x <= y does not hold (or is undecided)")
    lam, _ = dominant_representative(system, ex.sub(ex.vec(y), ex.vec(x)))
    return lam


# ---------------------------------------------------------------------------
# lambda-paths


@dataclass(frozen=True)
class LambdaPath:
    start: Vector
    breakpoints: Tuple[Fraction, ...]
    velocities: Tuple[Vector, ...]

    def __post_init__(self):
        b = self.breakpoints
        if len(b) < 2 or b[0] != 0 or b[-1] != 1 or any(s >= t for s, t in zip(b, b[1:])):
            raise ValueError("breakpoints must increase strictly from 0 to 1")
        if len(self.velocities) != len(b) - 1:
            raise ValueError("need one velocity per segment")

    @staticmethod
    def make(start, breakpoints, velocities) -> "LambdaPath":
        return LambdaPath(ex.vec(start), ex.vec(breakpoints), tuple(ex.vec(v) for v in velocities))

    @staticmethod
    def straight(a, lam) -> "LambdaPath":
        return LambdaPath.make(a, (0, 1), (lam,))

    def point(self, t) -> Vector:
        t = ex.as_fraction(t)
        p = self.start
        for (s0, s1), v in zip(zip(self.breakpoints, self.breakpoints[1:]), self.velocities):
            if t <= s0:
                break
            p = ex.add(p, ex.scale(min(t, s1) - s0, v))
        return p

    @property
    def end(self) -> Vector:
        return self.point(1)

    def vertices(self) -> Tuple[Vector, ...]:
        return tuple(self.point(t) for t in self.breakpoints)


@dataclass(frozen=True)
class PathCheck:
    valid: bool
    segment: Optional[int] = None  # 1-based index of the first bad segment


def check_lambda_path(system: RootGeneratingSystem, path: LambdaPath, lam) -> PathCheck:
    lam = ex.vec(lam)
    if not system.is_dominant(lam):
        raise NonDominantLambda(f"{lam} is not dominant")
    for j, v in enumerate(path.velocities, start=1):
        try:
            rep, _ = dominant_representative(system, v)
        except NotInTitsCone:
            return PathCheck(False, j)
        if rep != lam:
            return PathCheck(False, j)
    return PathCheck(True)


def path_endpoint_bound(system: RootGeneratingSystem, path: LambdaPath, lam) -> bool:
    """pi(1) - pi(0) <=_{Q^vee} lambda."""
    disp = ex.sub(path.end, path.start)
    return qvee_leq(system, disp, ex.vec(lam))


def unique_straight_path(system: RootGeneratingSystem, a, lam, path: LambdaPath) -> bool:
    """For a valid lambda-path from a to a + lambda, whether it is the straight one."""
    a, lam = ex.vec(a), ex.vec(lam)
    if path.start != a or path.end != ex.add(a, lam):
        raise ValueError("path does not run from a to a + lambda")
    if not check_lambda_path(system, path, lam).valid:
        raise ValueError("not a lambda-path")
    return all(v == lam for v in path.velocities)


def weyl_orbit(system: RootGeneratingSystem, lam, limit: int = 10_000) -> Tuple[Vector, ...]:
    """The W^v-orbit of lam, when it has at most ``limit`` elements."""
    lam = ex.vec(lam)
    seen = {lam: None}
    frontier = [lam]
    while frontier:
        nxt = []
        for v in frontier:
            for i in range(system.rank):
                u = system.reflect(i, v)
                if u not in seen:
                    seen[u] = None
                    nxt.append(u)
                    if len(seen) > limit:
                        raise ValueError("orbit larger than the limit")
        frontier = nxt
    return tuple(seen)


def folded_path_candidates(system: RootGeneratingSystem, a, lam, max_segments: int = 4,
                           denominator: int = 4) -> Iterator[LambdaPath]:
    """All lambda-paths from a with at most max_segments pieces, breakpoints in (1/denominator)Z.

    Velocities range over the (finite) orbit of lambda; consecutive equal
    velocities are skipped since they describe the same path with fewer pieces.
    """
    orbit = weyl_orbit(system, lam)
    grid = [Fraction(i, denominator) for i in range(1, denominator)]
    a = ex.vec(a)
    for n in range(1, max_segments + 1):
        for inner in _increasing(grid, n - 1):
            bps = (Fraction(0),) + inner + (Fraction(1),)
            for vels in product(orbit, repeat=n):
                if any(u == v for u, v in zip(vels, vels[1:])):
                    continue
                yield LambdaPath(a, bps, tuple(vels))


def _increasing(grid, k):
    if k == 0:
        yield ()
        return
    for i, g in enumerate(grid):
        for rest in _increasing(grid[i + 1:], k - 1):
            yield (g,) + rest


def search_folded_to_endpoint(system: RootGeneratingSystem, a, lam, max_segments: int = 4,
                              denominator: int = 4) -> List[LambdaPath]:
    """Non-straight lambda-paths from a ending at a + lambda (expected: none)."""
    a, lam = ex.vec(a), ex.vec(lam)
    target = ex.add(a, lam)
    return [p for p in folded_path_candidates(system, a, lam, max_segments, denominator)
            if p.end == target and any(v != lam for v in p.velocities)]
