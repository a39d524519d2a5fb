import io
import json
import subprocess
import sys

import pytest

from masure_kit import __version__, models
from masure_kit.cli import run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    return code, json.loads(buf.getvalue()), buf.getvalue()


@pytest.fixture(scope="module")
def data():
    return lambda name: models.data_path(name)


def test_enclose_interval(data):
    code, rep, _ = call("enclose", "--system", data("rank1"), "--points", "0.3,1.7", "--window", "3")
    assert code == 0
    assert rep["command"] == "enclose" and rep["diagnostics"] == []
    region = rep["results"]["enclosure"]
    assert sorted((h["root"][0], h["k"]) for h in region["closed"]) == [("-1", "2"), ("1", "0")]


def test_check_tripod(data):
    code, rep, _ = call("check", "--model", data("tripod"), "--axioms", "all")
    assert code == 0 and rep["results"]["passed"]
    assert rep["bounds"]["seed"] == 0 and "box" in rep["bounds"]


@pytest.mark.parametrize("name", ["broken_missing_chart", "broken_tampered"])
def test_check_broken(data, name):
    code, rep, _ = call("check", "--model", data(name))
    assert code == 2 and not rep["results"]["passed"]
    assert rep["diagnostics"] and all(d["witness"] is not None for d in rep["diagnostics"])


def test_nonwall_gluing_is_a_model_error(data):
    code, rep, _ = call("check", "--model", data("broken_nonwall"))
    assert code == 2 and rep["diagnostics"][0]["code"] == "LevelNotInLambda"


def test_delta_nonaffine(data):
    code, rep, _ = call("delta", "--model", data("tripod"), "--point", "0:1")
    assert code == 1 and rep["diagnostics"][0]["code"] == "NotAffine"


def test_delta_and_compare(data):
    code, rep, _ = call("delta", "--model", data("a1_onefold"), "--point", "0:(0,0,1)")
    assert code == 0 and rep["results"]["delta"] == "1"
    code, rep, _ = call("compare", "--model", data("a1_twofold"), "--p", "1:(0,3,0)", "--q", "2:(3,0,1)", "--certify")
    assert code == 0 and rep["results"]["relation"] == "OpenLess"
    assert rep["results"]["certificate"]
    code, rep, _ = call("compare", "--model", data("a1_twofold"), "--p", "1:(0,3,0)", "--q", "2:(3,0,0)")
    assert rep["results"]["relation"] == "NC" and rep["results"]["same_class"] is False


def test_order_and_dv(data):
    code, rep, _ = call("order", "--system", data("A2"), "--x", "0,0", "--y", "1,1")
    assert code == 0 and rep["results"]["leq"] is True
    code, rep, _ = call("dv", "--system", data("rank1"), "--x", "0", "--y", "-3")
    assert code == 0


def test_retract(data):
    code, rep, _ = call("retract", "--model", data("tripod"), "--germ", "+inf@0", "--point", "1:-1.5")
    assert code == 0
    code, rep, _ = call("retract", "--model", data("tripod"), "--germ=-inf@1", "--point", "2:-1.5", "--to", "0:2")
    assert code == 0


def test_intersect_decompose_distance(data):
    for cmd in ("intersect", "decompose", "distance"):
        code, rep, _ = call(cmd, "--model", data("rank1_interval"), "--a", "0", "--b", "1")
        assert code == 0, rep


def test_realize(data, tmp_path):
    code, rep, _ = call("realize", "--system", data("rank1"), "--halfspaces", "1@0;-1@2")
    assert code == 0 and rep["results"]["round_trip"]
    region = tmp_path / "region.json"
    region.write_text(json.dumps({"closed": [{"root": ["1"], "k": "0"}, {"root": ["-1"], "k": "2"}], "open": []}))
    code, rep, _ = call("realize", "--system", data("rank1"), "--region", str(region), "--saturate")
    assert code == 0 and rep["results"]["round_trip"]


@pytest.mark.parametrize("argv", [
    ["nope"],
    ["enclose", "--points", "0"],
    ["check", "--model", "/does/not/exist.json"],
    ["enclose", "--system", "SYSTEM", "--points", "abc"],
    ["check", "--model", "MODEL", "--axioms", "bogus"],
])
def test_usage_errors(data, argv):
    argv = [a.replace("SYSTEM", data("rank1")).replace("MODEL", data("tripod")) for a in argv]
    code, rep, _ = call(*argv)
    assert code == 1 and rep["diagnostics"][0]["severity"] == "error"


def test_reports_are_deterministic(data):
    argv = ["check", "--model", data("a1_onefold"), "--seed", "7"]
    a, b = call(*argv)[2], call(*argv)[2]
    assert a == b
    assert json.loads(a)["bounds"]["seed"] == 7


def test_digest_tracks_file_contents(data, tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps(models.model_json("tripod")))
    d1 = call("delta", "--model", str(f), "--point", "0:1")[1]["inputs_digest"]
    f.write_text(json.dumps(models.model_json("tripod"), indent=1))
    d2 = call("delta", "--model", str(f), "--point", "0:1")[1]["inputs_digest"]
    assert d1 != d2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "masure_kit", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout
