"""The order criterion on affine masure models: x <̊ y exactly when delta(x) < delta(y)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import _exact as ex
from ._exact import Vector
from .masure import (PLUS_INF, GluedMasure, MasurePoint, NotConnected, SectorGermRef, TheoremViolation,
                     _pair_half_apartment, half_apartment_path, retraction, vec_str)
from .root_system import NotAffine, NullRoot, is_indecomposable_affine, null_root
from .tits_order import open_leq


class NotInAIn(ValueError):
    pass


def _delta_form(model: GluedMasure) -> NullRoot:
    if not is_indecomposable_affine(model.system):
        raise NotAffine("delta needs an indecomposable affine Kac-Moody matrix")
    return null_root(model.system)


def delta_value(model: GluedMasure, p: MasurePoint, germs: Sequence[SectorGermRef] = (PLUS_INF,)) -> Fraction:
    """delta_A(rho_{+inf}(p)), cross-checked against p's own chart and any extra germs."""
    d = _delta_form(model)
    own = d(p.coord)
    values = {own}
    for g in germs:
        values.add(d(retraction(model, g, p)))
    if len(values) != 1:
        raise TheoremViolation("delta depends on the retraction used",
                               {"point": [p.chart, vec_str(p.coord)], "values": sorted(str(v) for v in values)})
    return own


class Relation(str, Enum):
    OPEN_LESS = "OpenLess"
    OPEN_GREATER = "OpenGreater"
    NC = "NC"


@dataclass(frozen=True)
class Comparison:
    relation: Relation
    delta_p: Fraction
    delta_q: Fraction
    same_class: bool


def _germ_chart(model: GluedMasure, p: MasurePoint, germ: SectorGermRef) -> int:
    maps = model.germ_maps(germ)
    for c in sorted(maps):
        if model.coord_in(p, c) is not None:
            return c
    raise NotConnected(f"no chart contains both {p} and the germ")


def same_ain_class(model: GluedMasure, p: MasurePoint, q: MasurePoint) -> bool:
    """Whether q lies in p + A_in, tested in every chart containing both points."""
    for c in range(model.n_charts):
        x = model.coord_in(p, c)
        y = model.coord_in(q, c)
        if x is not None and y is not None:
            return model.system.in_inessential(ex.sub(y, x))
    return False


def compare(model: GluedMasure, p: MasurePoint, q: MasurePoint, germ: SectorGermRef = PLUS_INF) -> Comparison:
    dp, dq = delta_value(model, p), delta_value(model, q)
    # the criterion relies on gallery connectivity; report its failure instead of guessing
    half_apartment_path(model, _germ_chart(model, p, germ), _germ_chart(model, q, germ), germ)
    if dp < dq:
        rel = Relation.OPEN_LESS
    elif dq < dp:
        rel = Relation.OPEN_GREATER
    else:
        rel = Relation.NC
    return Comparison(rel, dp, dq, rel is Relation.NC and same_ain_class(model, p, q))


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class Step:
    chart: int
    start: Vector
    end: Vector


@dataclass(frozen=True)
class Certificate:
    p: MasurePoint
    q: MasurePoint
    steps: Tuple[Step, ...]

    def points(self) -> List[MasurePoint]:
        return [MasurePoint(s.chart, s.start) for s in self.steps] + [MasurePoint(self.steps[-1].chart, self.steps[-1].end)]


def certify_order(model: GluedMasure, p: MasurePoint, q: MasurePoint, germ: SectorGermRef = PLUS_INF) -> Certificate:
    """A chain p = z_0 <̊ z_1 <̊ ... <̊ z_n = q, each step inside one chart.

    The charts follow a shortest half-apartment chain from a chart of p to a
    chart of q (all containing the germ); each intermediate z_i is a point of
    the shared half-apartment whose delta is halfway between the previous
    point and q.
    """
    dp, dq = delta_value(model, p), delta_value(model, q)
    if not dp < dq:
        raise ValueError("certify_order needs delta(p) < delta(q)")
    for c in range(model.n_charts):
        x, y = model.coord_in(p, c), model.coord_in(q, c)
        if x is not None and y is not None:
            return Certificate(p, q, (Step(c, x, y),))
    path = half_apartment_path(model, _germ_chart(model, p, germ), _germ_chart(model, q, germ), germ)
    return chain_certificate(model, p, q, path)


def chain_certificate(model: GluedMasure, p: MasurePoint, q: MasurePoint, path: Sequence[int]) -> Certificate:
    """The certificate along a given chart chain, consecutive charts meeting in a half-apartment."""
    s = model.system
    d = _delta_form(model)
    dq = d(q.coord)
    steps = []
    cur_chart = path[0]
    cur = model.coord_in(p, cur_chart)
    if cur is None or model.coord_in(q, path[-1]) is None:
        raise ValueError("the chain must start at a chart of p and end at a chart of q")
    for nxt in path[1:]:
        pair = _pair_half_apartment(model, cur_chart, nxt)
        if pair is None:
            raise NotConnected(f"charts {cur_chart} and {nxt} do not meet in a half-apartment")
        half = pair[0]
        target = d(cur) + (dq - d(cur)) / 2
        z = ex.feasible_point(s.dim, ge=[(half.form, half.k)], eq=[(d.as_form, -target)])
        if z is None:
            raise TheoremViolation("shared half-apartment misses the delta level",
                                   {"charts": [cur_chart, nxt], "delta": str(target)})
        steps.append(Step(cur_chart, cur, z))
        cur = model.coord_in(MasurePoint(cur_chart, z), nxt)
        cur_chart = nxt
    steps.append(Step(cur_chart, cur, model.coord_in(q, cur_chart)))
    cert = Certificate(p, q, tuple(steps))
    ok, why = verify_certificate(model, cert)
    if not ok:
        raise TheoremViolation("constructed certificate does not replay", why)
    return cert


def verify_certificate(model: GluedMasure, cert: Certificate) -> Tuple[bool, Optional[Dict]]:
    """Replay every step: endpoints match, consecutive steps share their point, each step is <̊ in its chart."""
    s = model.system
    if not cert.steps:
        return False, {"reason": "empty certificate"}
    prev = cert.p
    for i, st in enumerate(cert.steps):
        if st.end is None or st.start is None:
            return False, {"step": i, "reason": "point missing from chart"}
        here = MasurePoint(st.chart, st.start)
        if not model.same_point(prev, here):
            return False, {"step": i, "reason": "step does not start where the previous one ended"}
        if st.start == st.end or open_leq(s, st.start, st.end) is not True:
            return False, {"step": i, "reason": "not a strict open-order step",
                           "chart": st.chart, "from": vec_str(st.start), "to": vec_str(st.end)}
        prev = MasurePoint(st.chart, st.end)
    if not model.same_point(prev, cert.q):
        return False, {"reason": "chain does not end at q"}
    return True, None


class ChainSearch:
    """Open-order edges among a fixed point catalog, computed once and shared by many searches."""

    def __init__(self, model: GluedMasure, points: Sequence[MasurePoint]):
        self.model = model
        self.nodes: List[MasurePoint] = list(dict.fromkeys(model.canonical(x) for x in points))
        self._index = {x: i for i, x in enumerate(self.nodes)}
        self._where = [model.charts_of(x) for x in self.nodes]
        self._succ: Dict[int, List[int]] = {}

    def _node(self, p: MasurePoint) -> int:
        p = self.model.canonical(p)
        if p not in self._index:
            self._index[p] = len(self.nodes)
            self.nodes.append(p)
            self._where.append(self.model.charts_of(p))
            self._succ.clear()
        return self._index[p]

    def successors(self, i: int) -> List[int]:
        if i not in self._succ:
            s = self.model.system
            out = []
            for j, wj in enumerate(self._where):
                if j == i:
                    continue
                for c, x in self._where[i].items():
                    y = wj.get(c)
                    if y is not None and x != y and open_leq(s, x, y) is True:
                        out.append(j)
                        break
            self._succ[i] = out
        return self._succ[i]

    def find(self, p: MasurePoint, q: MasurePoint, depth: int) -> Optional[List[MasurePoint]]:
        """Shortest chain p <̊ ... <̊ q through catalog points with at most ``depth`` steps."""
        start, goal = self._node(p), self._node(q)
        prev = {start: None}
        frontier = deque([(start, 0)])
        while frontier:
            i, dist = frontier.popleft()
            if dist == depth:
                continue
            for j in self.successors(i):
                if j == goal:
                    chain = [goal, i]
                    while prev[chain[-1]] is not None:
                        chain.append(prev[chain[-1]])
                    return [self.nodes[k] for k in reversed(chain)]
                if j not in prev:
                    prev[j] = i
                    frontier.append((j, dist + 1))
        return None


def search_certificate(model: GluedMasure, p: MasurePoint, q: MasurePoint, points: Sequence[MasurePoint],
                       depth: int) -> Optional[List[MasurePoint]]:
    """Exhaustive search for a <̊ chain from p to q through the given points, at most ``depth`` steps."""
    return ChainSearch(model, points).find(p, q, depth)


# ---------------------------------------------------------------------------
# A_in action


def ain_translate(model: GluedMasure, p: MasurePoint, u) -> MasurePoint:
    """p + u for u in A_in, checked to be the same point from every chart containing p."""
    s = model.system
    u = ex.vec(u)
    if not s.in_inessential(u):
        raise NotInAIn(f"{vec_str(u)} is not in A_in")
    out = MasurePoint(p.chart, ex.add(p.coord, u))
    for c, x in model.charts_of(p).items():
        if model.coord_in(out, c) != ex.add(x, u):
            raise TheoremViolation("A_in translation depends on the chart",
                                   {"point": [p.chart, vec_str(p.coord)], "chart": c})
    return out
