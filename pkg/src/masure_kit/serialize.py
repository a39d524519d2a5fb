"""JSON encoding of systems, half-space sets, Weyl elements and glued models.

Rationals are written as "p/q" strings (bare integers as "n"). Every encoder
has a decoder with ``decode(encode(x)) == x``.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

from . import _exact as ex
from ._exact import Vector
from .apartment import HalfSpace, HalfSpaceSet, WallFamily
from .masure import GluedMasure, Gluing, MasurePoint, SectorGermRef
from .root_system import RootGeneratingSystem, WeylElement


class FormatError(ValueError):
    pass


def frac_str(x) -> str:
    x = ex.as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    """Accepts "p/q", decimal strings and ints; floats are rejected to keep inputs exact."""
    if isinstance(s, bool) or isinstance(s, float):
        raise FormatError(f"expected an exact rational, got {s!r}")
    try:
        return Fraction(s) if isinstance(s, (int, Fraction)) else Fraction(str(s).strip())
    except (ValueError, ZeroDivisionError) as err:
        raise FormatError(f"not a rational: {s!r}") from err


def vec_to_json(v: Sequence[Fraction]):
    return [frac_str(x) for x in v]


def vec_from_json(xs) -> Vector:
    if not isinstance(xs, list):
        raise FormatError(f"expected a list of rationals, got {xs!r}")
    return tuple(parse_frac(x) for x in xs)


# ---------------------------------------------------------------------------
# systems


def walls_to_json(w: WallFamily):
    return w.to_json()


def walls_from_json(system: RootGeneratingSystem, d) -> WallFamily:
    if d is None or d.get("kind") == "integers":
        return WallFamily.integers()
    if d.get("kind") != "explicit":
        raise FormatError(f"unknown lambda kind {d.get('kind')!r}")
    try:
        values = {int(k): [parse_frac(x) for x in v] for k, v in d["values"].items()}
    except (KeyError, AttributeError, TypeError) as err:
        raise FormatError("explicit lambda needs a 'values' object") from err
    return WallFamily.from_lists(system, values)


def system_to_json(system: RootGeneratingSystem, walls: WallFamily = WallFamily()) -> Dict[str, Any]:
    return {
        "gcm": [list(r) for r in system.gcm.entries],
        "dim": system.dim,
        "roots": [vec_to_json(r) for r in system.roots],
        "coroots": [vec_to_json(r) for r in system.coroots],
        "lambda": walls_to_json(walls),
    }


def system_from_json(d) -> Tuple[RootGeneratingSystem, WallFamily]:
    try:
        roots = [vec_from_json(r) for r in d["roots"]]
        coroots = [vec_from_json(r) for r in d["coroots"]]
        gcm = d["gcm"]
    except (KeyError, TypeError) as err:
        raise FormatError(f"root system needs gcm, roots and coroots: {err}") from err
    system = RootGeneratingSystem.from_rows(gcm, roots, coroots)
    if "dim" in d and int(d["dim"]) != system.dim:
        raise FormatError(f"dim {d['dim']} does not match root length {system.dim}")
    return system, walls_from_json(system, d.get("lambda"))


# ---------------------------------------------------------------------------
# half-spaces and Weyl elements


def halfspace_to_json(h: HalfSpace):
    return {"root": vec_to_json(h.form), "k": frac_str(h.k)}


def halfspace_from_json(d) -> HalfSpace:
    try:
        return HalfSpace(vec_from_json(d["root"]), parse_frac(d["k"]))
    except (KeyError, TypeError) as err:
        raise FormatError(f"half-space needs 'root' and 'k': {d!r}") from err


def hset_to_json(s: HalfSpaceSet):
    return {"dim": s.dim,
            "closed": [halfspace_to_json(h) for h in s.closed],
            "open": [halfspace_to_json(h) for h in s.open]}


def hset_from_json(d, dim: Optional[int] = None) -> HalfSpaceSet:
    closed = [halfspace_from_json(h) for h in d.get("closed", [])]
    opened = [halfspace_from_json(h) for h in d.get("open", [])]
    dim = d.get("dim", dim)
    if dim is None:
        lens = {len(h.form) for h in closed + opened}
        if len(lens) != 1:
            raise FormatError("cannot infer the dimension of the half-space set")
        dim = lens.pop()
    # keep the stored order so that round-trips are exact
    return HalfSpaceSet(int(dim), tuple(closed), tuple(opened))


def weyl_to_json(g: WeylElement):
    return {"word": list(g.word),
            "translation": None if g.translation is None else vec_to_json(g.translation)}


def weyl_from_json(d) -> WeylElement:
    if d is None:
        return WeylElement()
    t = d.get("translation")
    return WeylElement.make(d.get("word", []), None if t is None else vec_from_json(t))


# ---------------------------------------------------------------------------
# models


def gluing_to_json(g: Gluing):
    return {"a": g.a, "b": g.b, "halfspace": halfspace_to_json(g.halfspace), "tau": weyl_to_json(g.tau)}


def gluing_from_json(d) -> Gluing:
    try:
        return Gluing(int(d["a"]), int(d["b"]), halfspace_from_json(d["halfspace"]), weyl_from_json(d.get("tau")))
    except (KeyError, TypeError) as err:
        raise FormatError(f"gluing needs a, b and halfspace: {d!r}") from err


def model_to_json(model: GluedMasure, name: Optional[str] = None) -> Dict[str, Any]:
    out = {"system": system_to_json(model.system, model.walls),
           "charts": model.n_charts,
           "gluings": [gluing_to_json(g) for g in model.gluings]}
    if name is not None:
        out["name"] = name
    return out


def model_from_json(d, base_dir: str = ".") -> GluedMasure:
    """The "system" entry may be an inline root-system object or a path relative to base_dir."""
    sys_d = d.get("system")
    if isinstance(sys_d, str):
        sys_d = read_json(os.path.join(base_dir, sys_d))
    if not isinstance(sys_d, dict):
        raise FormatError("model needs a 'system' object or file name")
    system, walls = system_from_json(sys_d)
    try:
        n = int(d["charts"])
    except (KeyError, TypeError, ValueError) as err:
        raise FormatError("model needs an integer 'charts'") from err
    gluings = [gluing_from_json(g) for g in d.get("gluings", [])]
    return GluedMasure(system, walls, n, gluings)


# ---------------------------------------------------------------------------
# command-line literals


def parse_vector(text: str) -> Vector:
    """"0.3,1.7", "(0,0,1)" or "[1/2, 3]"."""
    t = text.strip().strip("()[]")
    if not t:
        raise FormatError("empty vector")
    return tuple(parse_frac(x) for x in t.split(","))


def parse_points(text: str, dim: int):
    """Points separated by ';'; in dimension 1 a plain comma list is a list of scalars."""
    if ";" not in text and dim == 1 and "(" not in text:
        return [(x,) for x in parse_vector(text)]
    pts = [parse_vector(p) for p in text.split(";") if p.strip()]
    for p in pts:
        if len(p) != dim:
            raise FormatError(f"point {vec_to_json(p)} has dimension {len(p)}, expected {dim}")
    return pts


def parse_point(text: str, dim: int) -> MasurePoint:
    """"chart:coords", e.g. "1:-1.5" or "0:(0,0,1)"."""
    chart, sep, rest = text.partition(":")
    if not sep:
        raise FormatError(f"point must look like 'chart:coords', got {text!r}")
    try:
        c = int(chart)
    except ValueError as err:
        raise FormatError(f"bad chart index {chart!r}") from err
    v = parse_vector(rest)
    if len(v) != dim:
        raise FormatError(f"point has dimension {len(v)}, expected {dim}")
    return MasurePoint(c, v)


def parse_germ(text: str) -> SectorGermRef:
    """"+inf@0", "-inf@2", or with a direction word "+inf@1/0.1"."""
    head, sep, chart = text.partition("@")
    if not sep or head not in ("+inf", "-inf"):
        raise FormatError(f"germ must look like '+inf@chart', got {text!r}")
    chart, _, word = chart.partition("/")
    try:
        letters = tuple(int(x) for x in word.split(".") if x != "")
        return SectorGermRef(int(chart), 1 if head == "+inf" else -1, letters)
    except ValueError as err:
        raise FormatError(f"bad germ {text!r}") from err


def point_to_json(p: MasurePoint):
    return {"chart": p.chart, "coord": vec_to_json(p.coord)}


def germ_to_str(g: SectorGermRef) -> str:
    base = f"{'+' if g.sign > 0 else '-'}inf@{g.chart}"
    return base + ("/" + ".".join(map(str, g.word)) if g.word else "")


# ---------------------------------------------------------------------------
# files


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_system(path: str) -> Tuple[RootGeneratingSystem, WallFamily]:
    return system_from_json(read_json(path))


def load_model(path: str) -> GluedMasure:
    return model_from_json(read_json(path), os.path.dirname(os.path.abspath(path)))
