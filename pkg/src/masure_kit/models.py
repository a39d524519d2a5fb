"""Shipped root systems and glued models.

Each model has a recipe here (a few generating gluings, then saturation) and
a frozen copy of the resulting gluings under ``data/``. Loading the frozen
copy is fast; the recipes document where the data came from and let the
tests check that the two still agree.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from importlib import resources
from typing import Callable, Dict, Tuple

from . import _exact as ex
from .apartment import HalfSpace, HalfSpaceSet, WallFamily
from .masure import GluedMasure, Gluing, build_complex, realize_intersection, saturate
from .root_system import RootGeneratingSystem, WeylElement, minimal_realization
from .serialize import dumps, model_from_json, model_to_json, system_from_json, system_to_json

H = HalfSpace.make
INTEGERS = WallFamily.integers()


def rank1() -> RootGeneratingSystem:
    """A1 on the line: alpha(x) = x, alpha^vee = 2."""
    return RootGeneratingSystem.from_rows([[2]], [[1]], [[2]])


def a2() -> RootGeneratingSystem:
    return minimal_realization([[2, -1], [-1, 2]])


def affine_a1() -> RootGeneratingSystem:
    """Ã1 in dimension 3 with null root delta = (0, 0, 1)."""
    return RootGeneratingSystem.from_rows([[2, -2], [-2, 2]], [[2, -2, 1], [-2, 2, 0]], [[1, 0, 0], [0, 1, 0]])


def affine_a2() -> RootGeneratingSystem:
    return minimal_realization([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def hyperbolic() -> RootGeneratingSystem:
    return minimal_realization([[2, -3], [-3, 2]])


SYSTEMS: Dict[str, Callable[[], RootGeneratingSystem]] = {
    "rank1": rank1,
    "A2": a2,
    "affine_A1": affine_a1,
    "affine_A2": affine_a2,
    "indefinite": hyperbolic,
}


# ---------------------------------------------------------------------------
# model recipes


def tripod_unsaturated() -> GluedMasure:
    """Two lines glued along [0, inf): the germs at -inf of the two charts share no chart."""
    return build_complex(rank1(), INTEGERS, 2, [Gluing(0, 1, H([1], 0))])


def tripod() -> GluedMasure:
    return saturate(tripod_unsaturated())


def tree7() -> GluedMasure:
    """Seven lines forming a depth-two fragment of the tree, closed under saturation."""
    gl = [Gluing(0, 1, H([1], 0)), Gluing(1, 2, H([-1], -1)), Gluing(0, 3, H([-1], 0)),
          Gluing(3, 4, H([1], -1)), Gluing(0, 5, H([1], -1)), Gluing(0, 6, H([-1], -1))]
    return saturate(build_complex(rank1(), INTEGERS, 7, gl))


def rank1_interval() -> GluedMasure:
    """A chart meeting chart 0 exactly in [0, 2]."""
    p = HalfSpaceSet.of(1, [H([1], 0), H([-1], 2)])
    return saturate(realize_intersection(rank1(), INTEGERS, p).model)


def a1_onefold() -> GluedMasure:
    s = affine_a1()
    return saturate(build_complex(s, INTEGERS, 2, [Gluing(0, 1, HalfSpace(s.roots[0], ex.as_fraction(0)))]))


def a1_twofold() -> GluedMasure:
    s = affine_a1()
    a0 = s.roots[0]
    gl = [Gluing(0, 1, HalfSpace(a0, ex.as_fraction(0))), Gluing(0, 2, HalfSpace(ex.neg(a0), ex.as_fraction(-1)))]
    return saturate(build_complex(s, INTEGERS, 3, gl))


def a1_box_region() -> HalfSpaceSet:
    a0 = affine_a1().roots[0]
    return HalfSpaceSet.of(3, [HalfSpace(a0, ex.as_fraction(0)), HalfSpace(ex.neg(a0), ex.as_fraction(2))])


def a1_box() -> GluedMasure:
    """Chart 2 meets chart 0 in the slab 0 <= alpha_0 <= 2."""
    return saturate(realize_intersection(affine_a1(), INTEGERS, a1_box_region()).model)


def tampered_tripod() -> GluedMasure:
    """The saturated tripod with the C-A1 transition moved off its wall.

    Chart 2 now meets chart 1 in {0} (through chart 0) and in [1, inf) (through
    the moved gluing): consistent, but not an enclosed intersection.
    """
    good = tripod()
    gl = [g if not (g.a == 2 and g.b == 1) else Gluing(2, 1, H([1], -1), WeylElement.make((0,)))
          for g in good.gluings]
    return build_complex(good.system, good.walls, good.n_charts, gl)


def nonwall_gluing_json():
    """A model file gluing along x >= -1/2, which is not a wall; building it must fail."""
    return {"system": system_to_json(rank1(), INTEGERS), "charts": 2,
            "gluings": [{"a": 0, "b": 1, "halfspace": {"root": ["1"], "k": "-1/2"},
                         "tau": {"word": [], "translation": None}}]}


MODELS: Dict[str, Callable[[], GluedMasure]] = {
    "tripod": tripod,
    "tree7": tree7,
    "rank1_interval": rank1_interval,
    "a1_onefold": a1_onefold,
    "a1_twofold": a1_twofold,
    "a1_box": a1_box,
}

BROKEN: Dict[str, Callable[[], GluedMasure]] = {
    "broken_missing_chart": tripod_unsaturated,
    "broken_tampered": tampered_tripod,
}

AFFINE_MODELS: Tuple[str, ...] = ("a1_onefold", "a1_twofold", "a1_box")


# ---------------------------------------------------------------------------
# frozen data


def data_path(name: str) -> str:
    return str(resources.files(__package__).joinpath("data", f"{name}.json"))


def model_json(name: str):
    with open(data_path(name), encoding="utf-8") as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def load(name: str) -> GluedMasure:
    """A shipped model (or broken model) from its frozen JSON."""
    return model_from_json(model_json(name))


def load_system(name: str):
    with open(data_path(name), encoding="utf-8") as fh:
        return system_from_json(json.load(fh))


def write_data(directory: str) -> None:
    """Regenerate every frozen file from the recipes."""
    os.makedirs(directory, exist_ok=True)

    def put(name, obj):
        with open(os.path.join(directory, f"{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(dumps(obj))

    for name, make in SYSTEMS.items():
        put(name, system_to_json(make(), INTEGERS))
    for name, make in {**MODELS, **BROKEN}.items():
        put(name, model_to_json(make(), name))
    put("broken_nonwall", dict(nonwall_gluing_json(), name="broken_nonwall"))


if __name__ == "__main__":  # pragma: no cover
    import sys

    write_data(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "data"))
