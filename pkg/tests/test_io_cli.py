import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from nitk import cli
from nitk.acceptance import repetition_instance
from nitk.codes import exact_error_probability
from nitk.io import (
    code_from_dict,
    code_to_dict,
    load_channel,
    load_code,
    load_joint,
    load_network,
    load_set,
    load_source,
    read_json,
)
from nitk.validation import ValidationError

DATA = Path(__file__).resolve().parent.parent / "data"


def run(argv):
    buf = io.StringIO()
    status = cli.run(argv, stdout=buf)
    lines = buf.getvalue().splitlines()
    return status, (json.loads(lines[-1]) if lines else None)


# io ------------------------------------------------------------------------

def test_load_sample_files():
    ch, digest = load_channel(DATA / "bsc11.json")
    assert ch.rows[0, 1] == pytest.approx(0.11) and len(digest) == 64
    net, _ = load_network(DATA / "rep3_net.json")
    code, _ = load_code(DATA / "rep3_code.json", net)
    assert exact_error_probability(net, code).error_prob > 0
    src, _ = load_source(DATA / "markov3.json")
    assert src.n == 3
    assert len(load_set(DATA / "set_ball.json")[0]) > 0
    assert len(load_set(DATA / "set_members.json")[0]) > 0
    (J, z, a1, a2), _ = load_joint(DATA / "joint2.json")
    assert J.ndim == 3 and a1 == 2


def test_network_file_is_not_a_channel():
    with pytest.raises(ValidationError, match="network file"):
        load_channel(DATA / "p2p_bsc11.json")


def test_syntax_error_has_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kernel": [[1, 0],\n [0, 1]')
    with pytest.raises(ValidationError, match="line 2"):
        read_json(bad)


def test_missing_field(tmp_path):
    f = tmp_path / "c.json"
    f.write_text('{"rows": [[1]]}')
    with pytest.raises(ValidationError, match="missing field 'kernel'"):
        load_channel(f)


def test_code_roundtrip():
    net, code = repetition_instance(0.2)
    again = code_from_dict(json.loads(json.dumps(code_to_dict(code))), net)
    assert exact_error_probability(net, again).error_prob == exact_error_probability(net, code).error_prob


# cli -----------------------------------------------------------------------

def test_capacity_record():
    status, rec = run(["capacity", "--channel", str(DATA / "bsc11.json")])
    assert status == 0
    assert set(rec) == {"command", "inputs", "seed", "params", "outputs", "wall_time"}
    assert rec["outputs"]["capacity"] == pytest.approx(0.5001, abs=1e-4)
    assert list(rec["inputs"].values())[0] == read_json(DATA / "bsc11.json")[1]


@pytest.mark.parametrize("argv", [
    ["mds", "--eps", "0.1", "--N", "5", "--trials", "2000", "--seed", "3"],
    ["binning", "--d", "2", "--eps", "0.5", "--eps-tilde", "0.25", "--trials", "20", "--seed", "1"],
    ["eval-code", "--network", str(DATA / "rep3_net.json"), "--code", str(DATA / "rep3_code.json"),
     "--samples", "500", "--seed", "2"],
])
def test_deterministic_modulo_wall_time(argv):
    s1, a = run(argv)
    s2, b = run(argv)
    assert s1 == s2 == 0
    a.pop("wall_time")
    b.pop("wall_time")
    assert a == b


def test_missing_seed_is_usage_error(capsys):
    assert cli.main(["mds", "--eps", "0.1", "--N", "5"]) == 2


def test_unknown_command():
    assert cli.main(["frobnicate"]) == 2


def test_missing_file_is_domain_error():
    status, rec = run(["capacity", "--channel", "/nonexistent.json"])
    assert status == 1 and "error" in rec


def test_csv_output(tmp_path):
    out = tmp_path / "r.csv"
    status, _ = run(["dueck", "--channel", str(DATA / "noisy.json"), "--rate", "0.25,0.5", "--csv", str(out)])
    assert status == 0
    rows = list(csv.reader(out.open()))
    assert len(rows) == 3


def test_other_commands_run(tmp_path):
    cases = [
        ["condition", "--channel", str(DATA / "bsc11.json")],
        ["cutset", "--network", str(DATA / "p2p_bsc11.json"), "--grid", "20"],
        ["ic-check", "--network", str(DATA / "xor_ic.json"), "--grid", "5"],
        ["ic-region", "--network", str(DATA / "xor_ic.json"), "--samples", "3", "--seed", "0"],
        ["wringing", "--joint", str(DATA / "joint2.json"), "--kn", "1.5"],
        ["blowup", "--source", str(DATA / "markov3.json"), "--set", str(DATA / "set_ball.json"), "--exact"],
        ["lemma1", "--network", str(DATA / "lemma1_net.json"), "--code", str(DATA / "lemma1_code.json"),
         "--k", "1", "--out", str(tmp_path / "fixed.json")],
        ["search-code", "--network", str(DATA / "p2p_bsc11.json"), "--n", "1", "--message-sizes", "2,1"],
        ["stacked-sim", "--network", str(DATA / "rep3_net.json"), "--code", str(DATA / "rep3_code.json"),
         "--delta", "4", "--runs", "3", "--seed", "0"],
    ]
    for argv in cases:
        status, rec = run(argv)
        assert status == 0, (argv, rec)
        assert rec["command"] == argv[0]
    assert (tmp_path / "fixed.json").exists()
