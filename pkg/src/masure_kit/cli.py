"""Command-line interface: every subcommand prints one JSON report.

Exit status: 0 on success, 1 on usage, input or domain errors, 2 when a model
violates an axiom or a theorem (the witness is in the report).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import random
import sys
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from . import _exact as ex
from .affine_order import certify_order, compare, delta_value
from .apartment import HalfSpace, HalfSpaceSet, enclosure_cl_sharp, support_of_enclosed
from .masure import (AXIOM_SUITES, MINUS_INF, PLUS_INF, ModelError, TheoremViolation, apartment_distance, check_axioms,
                     decompose_intersection, intersect_apartments, realize_intersection, retract_segment,
                     retraction)
from .serialize import (FormatError, dumps, frac_str, germ_to_str, hset_to_json, load_model, hset_from_json, load_system, model_to_json,
                        parse_germ, parse_point, parse_points, parse_vector, point_to_json, read_json, vec_to_json,
                        weyl_to_json)
from .tits_order import leq, open_leq, tits_cone_membership, vectorial_distance

DEFAULT_WINDOW = {"enclose": 3, "intersect": 2, "decompose": 2, "check": 1}
DEFAULT_BOX = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def jsonable(x: Any) -> Any:
    """Plain JSON data, with rationals as "p/q" strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return frac_str(x)
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in x]
    if dataclasses.is_dataclass(x):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x) if not f.name.startswith("_")}
    return str(x)


class Report:
    def __init__(self, command: str, argv: Sequence[str]):
        self.command = command
        self.argv = list(argv)
        self.inputs: Dict[str, Any] = {}
        self.results: Dict[str, Any] = {}
        self.diagnostics: List[Dict[str, Any]] = []
        self.bounds: Dict[str, Any] = {}

    def input_file(self, path: str):
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as err:
            raise UsageError(f"cannot read {path}: {err.strerror}") from err
        self.inputs[path] = hashlib.sha256(data).hexdigest()

    def diag(self, severity: str, code: str, message: str, witness=None):
        self.diagnostics.append({"severity": severity, "code": code, "message": message, "witness": jsonable(witness)})

    def to_json(self) -> Dict[str, Any]:
        digest = hashlib.sha256(json.dumps({"argv": self.argv, "files": self.inputs}, sort_keys=True).encode())
        return {"command": self.command, "argv": self.argv, "inputs_digest": digest.hexdigest(),
                "bounds": jsonable(self.bounds), "results": jsonable(self.results),
                "diagnostics": self.diagnostics}


# ---------------------------------------------------------------------------
# subcommands


def _system(args, rep: Report):
    rep.input_file(args.system)
    return load_system(args.system)


def _model(args, rep: Report):
    rep.input_file(args.model)
    return load_model(args.model)


def _window(args) -> int:
    return args.window if args.window is not None else DEFAULT_WINDOW.get(args.command, 1)


def cmd_enclose(args, rep: Report) -> int:
    s, w = _system(args, rep)
    pts = parse_points(args.points, s.dim)
    window = _window(args)
    rep.bounds = {"window": window}
    e = enclosure_cl_sharp(s, w, pts, window=window)
    supp = support_of_enclosed(e)
    rep.results = {"enclosure": hset_to_json(e),
                   "support": {"point": vec_to_json(supp.point), "directions": [vec_to_json(d) for d in supp.directions],
                               "dim": supp.dim, "witness_walls": list(supp.witness)}}
    return 0


def cmd_order(args, rep: Report) -> int:
    s, _ = _system(args, rep)
    x, y = parse_vector(args.x), parse_vector(args.y)
    res: Dict[str, Any] = {"leq": leq(s, x, y), "open_leq": open_leq(s, x, y),
                           "membership": tits_cone_membership(s, ex.sub(y, x)).status.value}
    res["dv"] = vec_to_json(vectorial_distance(s, x, y)) if res["leq"] else None
    rep.results = res
    return 0


def cmd_dv(args, rep: Report) -> int:
    s, _ = _system(args, rep)
    rep.results = {"dv": vec_to_json(vectorial_distance(s, parse_vector(args.x), parse_vector(args.y)))}
    return 0


def cmd_retract(args, rep: Report) -> int:
    m = _model(args, rep)
    germ = parse_germ(args.germ)
    p = parse_point(args.point, m.dim)
    res = {"germ": germ_to_str(germ), "point": point_to_json(p), "image": vec_to_json(retraction(m, germ, p))}
    if args.to is not None:
        q = parse_point(args.to, m.dim)
        path = retract_segment(m, p, q, germ)
        res["segment"] = {"start": vec_to_json(path.start), "breakpoints": vec_to_json(path.breakpoints),
                          "velocities": [vec_to_json(v) for v in path.velocities]}
    rep.results = res
    return 0


def _chart(m, c: int) -> int:
    if not 0 <= c < m.n_charts:
        raise UsageError(f"chart {c} not in 0..{m.n_charts - 1}")
    return c


def cmd_intersect(args, rep: Report) -> int:
    m = _model(args, rep)
    window = _window(args)
    rep.bounds = {"window": window}
    inter = intersect_apartments(m, _chart(m, args.a), _chart(m, args.b), window)
    rep.results = {"region": hset_to_json(inter.region), "map": weyl_to_json(inter.map)}
    return 0


def cmd_decompose(args, rep: Report) -> int:
    m = _model(args, rep)
    window = _window(args)
    rep.bounds = {"window": window}
    parts = decompose_intersection(m, _chart(m, args.a), _chart(m, args.b), window)
    rep.results = {"pieces": [{"region": hset_to_json(p.region), "map": weyl_to_json(p.map)} for p in parts]}
    return 0


def cmd_distance(args, rep: Report) -> int:
    m = _model(args, rep)
    germ = parse_germ(args.germ) if args.germ else None
    rep.results = {"distance": apartment_distance(m, _chart(m, args.a), _chart(m, args.b), germ),
                   "germ": germ_to_str(germ) if germ else None}
    return 0


def cmd_delta(args, rep: Report) -> int:
    m = _model(args, rep)
    p = parse_point(args.point, m.dim)
    rep.results = {"point": point_to_json(p), "delta": delta_value(m, p, (PLUS_INF, MINUS_INF))}
    return 0


def cmd_compare(args, rep: Report) -> int:
    m = _model(args, rep)
    p, q = parse_point(args.p, m.dim), parse_point(args.q, m.dim)
    c = compare(m, p, q)
    res: Dict[str, Any] = {"relation": c.relation.value, "delta_p": c.delta_p, "delta_q": c.delta_q,
                           "same_class": c.same_class}
    if args.certify and c.relation.value != "NC":
        lo, hi = (p, q) if c.relation.value == "OpenLess" else (q, p)
        cert = certify_order(m, lo, hi)
        res["certificate"] = [{"chart": st.chart, "from": vec_to_json(st.start), "to": vec_to_json(st.end)}
                              for st in cert.steps]
    rep.results = res
    return 0


def cmd_check(args, rep: Report) -> int:
    suites = AXIOM_SUITES if args.axioms == "all" else tuple(a.strip() for a in args.axioms.split(","))
    for name in suites:
        if name not in AXIOM_SUITES:
            raise UsageError(f"unknown axiom suite {name!r}; choose from {', '.join(AXIOM_SUITES)} or all")
    window = _window(args)
    box = args.box if args.box is not None else DEFAULT_BOX
    rep.bounds = {"box": box, "window": window, "cap": args.cap}
    m = _model(args, rep)
    r = check_axioms(m, suites, box=box, window=window, cap=args.cap)
    rep.bounds.update(r.bounds)
    rep.results = {"passed": r.passed,
                   "suites": [{"name": x.name, "passed": x.passed, "checked": x.checked} for x in r.results]}
    for x in r.results:
        if not x.passed:
            rep.diag("error", x.name, f"axiom check {x.name} failed", x.witness)
    return 0 if r.passed else 2


def _parse_halfspaces(text: str, dim: int) -> HalfSpaceSet:
    hs = []
    for item in text.split(";"):
        if not item.strip():
            continue
        form, sep, k = item.rpartition("@")
        if not sep:
            raise FormatError(f"half-space must look like 'root@k', got {item!r}")
        f = parse_vector(form)
        if len(f) != dim:
            raise FormatError(f"root {item!r} has dimension {len(f)}, expected {dim}")
        hs.append(HalfSpace(f, parse_vector(k)[0]))
    return HalfSpaceSet.of(dim, hs)


def cmd_realize(args, rep: Report) -> int:
    s, w = _system(args, rep)
    if args.region:
        rep.input_file(args.region)
        p = hset_from_json(read_json(args.region), s.dim)
    elif args.halfspaces:
        p = _parse_halfspaces(args.halfspaces, s.dim)
    else:
        raise UsageError("realize needs --region or --halfspaces")
    r = realize_intersection(s, w, p, saturated=args.saturate)
    back = intersect_apartments(r.model, r.chart, 0)
    ok = back.region.same_set(p)
    rep.results = {"chart": r.chart, "model": model_to_json(r.model), "round_trip": ok,
                   "intersection": hset_to_json(back.region)}
    if not ok:
        rep.diag("error", "TheoremViolation", "realized intersection differs from the input", hset_to_json(back.region))
        return 2
    return 0


COMMANDS = {
    "enclose": cmd_enclose, "order": cmd_order, "dv": cmd_dv, "retract": cmd_retract,
    "intersect": cmd_intersect, "decompose": cmd_decompose, "distance": cmd_distance,
    "delta": cmd_delta, "compare": cmd_compare, "check": cmd_check, "realize": cmd_realize,
}


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                   help="seed for any randomized sampling (echoed in the report)")
    p.add_argument("--window", type=int, default=default, help="root window (max word length)")
    p.add_argument("--box", type=int, default=default, help="coordinate box for catalogs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="masure-kit", description="Exact computations on glued masure models.")
    parser.add_argument("--version", action="version", version=f"masure-kit {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    p = add("enclose", "finite enclosure cl# of a point set")
    p.add_argument("--system", required=True)
    p.add_argument("--points", required=True, help='"0.3,1.7" in rank 1, else "x1,..;y1,.."')
    p = add("order", "Tits preorders between two vectors")
    p.add_argument("--system", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p = add("dv", "vectorial distance of comparable vectors")
    p.add_argument("--system", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p = add("retract", "retraction of a point (and optionally a segment) onto a chart")
    p.add_argument("--model", required=True)
    p.add_argument("--germ", default="+inf@0", help='"+inf@0" or "-inf@2"')
    p.add_argument("--point", required=True, help='"chart:coords", e.g. "1:-1.5"')
    p.add_argument("--to", help="second point: retract the segment [point, to]")
    for name, help_ in (("intersect", "intersection of two charts"), ("decompose", "pieces of a chart intersection"),
                        ("distance", "half-apartment distance between charts")):
        p = add(name, help_)
        p.add_argument("--model", required=True)
        p.add_argument("--a", type=int, required=True)
        p.add_argument("--b", type=int, required=True)
        if name == "distance":
            p.add_argument("--germ", help="restrict to charts containing this germ")
    p = add("delta", "the null-root functional on a point")
    p.add_argument("--model", required=True)
    p.add_argument("--point", required=True)
    p = add("compare", "compare two points through delta")
    p.add_argument("--model", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--certify", action="store_true", help="also output a replayable chain")
    p = add("check", "run the bounded axiom checkers")
    p.add_argument("--model", required=True)
    p.add_argument("--axioms", default="all", help=f"all or a comma list of {', '.join(AXIOM_SUITES)}")
    p.add_argument("--cap", type=int, default=50_000, help="maximum catalog size")
    p = add("realize", "build a model whose chart meets chart 0 in a given enclosed set")
    p.add_argument("--system", required=True)
    p.add_argument("--region", help="HalfSpaceSet JSON file")
    p.add_argument("--halfspaces", help='"root@k;root@k", e.g. "1@0;-1@2"')
    p.add_argument("--saturate", action="store_true")
    return parser


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:  # --help and --version
        return 0 if err.code in (0, None) else 1
    except UsageError as err:
        rep = Report(argv[0] if argv and not argv[0].startswith("-") else "", argv)
        rep.diag("error", "UsageError", str(err))
        out.write(dumps(rep.to_json()))
        return 1
    random.seed(args.seed)
    rep = Report(args.command, argv)
    rep.bounds = {}
    try:
        code = COMMANDS[args.command](args, rep)
    except (TheoremViolation, ModelError) as err:
        rep.diag("error", type(err).__name__, str(err), getattr(err, "witness", None))
        code = 2
    except (UsageError, FormatError, OSError, json.JSONDecodeError) as err:
        rep.diag("error", type(err).__name__, str(err))
        code = 1
    except ValueError as err:
        rep.diag("error", type(err).__name__, str(err))
        code = 1
    rep.bounds.setdefault("seed", args.seed)
    out.write(dumps(rep.to_json()))
    return code


def main() -> None:
    sys.exit(run())
