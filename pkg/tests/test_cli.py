import csv
import io
import json
import os
import subprocess
import sys

import pytest

from fibertor.cli import serialize
from fibertor.cli.main import run
from fibertor.tower import TowerReport, cyclic_tower

from conftest import CAT

CAT_DOC = '{"matrix": [[2, 1], [1, 1]]}'
PHI12_DOC = '{"matrix": [[0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 1], [0, 0, 1, 0]]}'
SIGMA_DOC = '{"braid": {"strands": 3, "word": [1, -2]}}'


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_tower_cyclic_csv_example():
    code, out, _ = cli("tower-cyclic", CAT_DOC, "--kmax", "4", "--format", "csv", "--threads", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert out.splitlines()[0] == ("index,degree,betti,torsion_order,normalized_log_torsion,"
                                   "fiber_components,bound")
    assert [(r["index"], r["torsion_order"]) for r in rows] == [("1", "1"), ("2", "5"), ("3", "16"), ("4", "45")]
    assert all(r["bound"] == "" for r in rows)


def test_classify_example():
    code, out, _ = cli("classify", PHI12_DOC)
    assert code == 0 and out.strip() == "classification: cyclotomic"


def test_torus_example():
    code, out, _ = cli("torus", '{"matrix": [[-1, 0], [0, -1]]}')
    assert code == 0
    assert "betti: 1" in out.splitlines()
    assert "torsion: 2,2" in out.splitlines()


def test_alexander_command():
    doc = '{"braid": {"strands": 3, "word": [1, -2]}, "characters": [[[1, 2]], [[0, 2]]]}'
    code, out, _ = cli("alexander", doc)
    assert code == 0
    assert "polynomial: u^2 + u*x - u + u*x^-1 + 1" in out
    assert "chi(1/2): u^2 - 3*u + 1" in out
    assert "chi(0/2): u^2 + u + 1" in out


def test_big_integers_as_strings():
    doc = json.dumps({"matrix": [["123456789012345678901234567890", "0"], ["0", "1"]]})
    code, out, _ = cli("snf", doc, "--format", "json")
    assert code == 0
    assert '"123456789012345678901234567890"' in out
    rec = serialize.loads(out)
    assert rec.invariant_factors == (1, 123456789012345678901234567890)


@pytest.mark.parametrize("argv, code", [
    (["snf", '{"matrix": [[1, 2], [3]]}'], 2),
    (["snf", "not json"], 2),
    (["snf", "[1, 2]"], 2),
    (["snf", "{}", "--bogus"], 2),
    (["frobnicate", "{}"], 2),
    (["tower-cyclic", CAT_DOC], 2),
    (["torus", '{"matrix": [[2, 0], [0, 1]]}'], 1),
    (["tower-abelian", SIGMA_DOC, "--moduli", "2,3"], 1),
    (["bound", CAT_DOC, "--lambda0", "0.5"], 1),
    (["mahler", '{"polynomial": [true]}'], 2),
])
def test_exit_codes(argv, code):
    got, _, err = cli(*argv)
    assert got == code
    if code:
        assert err.strip()


def test_scale_refusal_exit_code(monkeypatch):
    monkeypatch.setenv("FIBERTOR_MAX_DEGREE", "10")
    code, _, err = cli("cover-build", '{"fiber": {"kind": "free", "rank": 3}}', "--moduli", "3")
    assert code == 3
    assert "FIBERTOR_MAX_DEGREE" in err


def test_error_messages_name_the_precondition():
    _, _, err = cli("torus", '{"matrix": [[2, 0], [0, 1]]}')
    assert "unimodular" in err
    _, _, err = cli("tower-abelian", SIGMA_DOC, "--moduli", "2,3")
    assert "divid" in err


def test_input_from_file_and_stdin(tmp_path, monkeypatch):
    path = tmp_path / "cat.json"
    path.write_text(CAT_DOC)
    _, from_file, _ = cli("charpoly", str(path))
    monkeypatch.setattr(sys, "stdin", io.StringIO(CAT_DOC))
    _, from_stdin, _ = cli("charpoly", "-")
    _, inline, _ = cli("charpoly", CAT_DOC)
    assert from_file == from_stdin == inline
    assert "t^2 - 3*t + 1" in inline


def test_plot_data(tmp_path):
    path = tmp_path / "plot.csv"
    code, _, _ = cli("tower-cyclic", CAT_DOC, "--kmax", "5", "--plot-data", str(path), "--threads", "1")
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["index", "normalized_log_torsion", "mahler_reference"]
    assert len(rows) == 6
    assert len({r[2] for r in rows[1:]}) == 1
    code, _, _ = cli("snf", CAT_DOC, "--plot-data", str(path))
    assert code == 2


def test_json_round_trip_is_lossless():
    rec = cyclic_tower(CAT, 30)
    text = serialize.dumps(rec)
    back = serialize.loads(text)
    assert isinstance(back, TowerReport)
    assert back == rec


@pytest.mark.parametrize("argv", [
    ["snf", CAT_DOC], ["charpoly", CAT_DOC], ["mahler", '{"polynomial": [1, -3, 1]}'],
    ["classify", CAT_DOC], ["classify", PHI12_DOC], ["torus", CAT_DOC],
    ["tower-cyclic", CAT_DOC, "--kmax", "6"],
    ["tower-abelian", '{"automorphism": {"rank": 2, "kind": "free", "images": ["ab", "b"]}}', "--moduli", "2,4"],
    ["cover-build", '{"fiber": {"kind": "closed", "genus": 2}}', "--moduli", "2"],
    ["cover-lift", SIGMA_DOC, "--moduli", "2"],
    ["alexander", '{"braid": {"strands": 3, "word": [1, -2]}, "characters": [[[1, 3]]]}'],
    ["search-lift", SIGMA_DOC, "--moduli", "2"],
    ["bound", CAT_DOC, "--lambda0", "2"],
])
def test_every_command_round_trips(argv):
    code, out, _ = cli(*argv, "--format", "json", "--threads", "1")
    assert code == 0
    rec = serialize.loads(out)
    assert serialize.dumps(rec) == out
    for fmt in ("table", "csv"):
        assert cli(*argv, "--format", fmt, "--threads", "1")[0] == 0


def test_closed_automorphism_input():
    doc = json.dumps({"automorphism": {"rank": 4, "kind": "closed",
                                       "images": ["a", "ba", "c", "d"],
                                       "inverse_images": ["a", "bA", "c", "d"]},
                      "cover": {"kind": "homology", "modulus": 2}})
    code, out, _ = cli("cover-lift", doc)
    assert code == 0 and "h1_rank: 34" in out
    missing_inverse = json.dumps({"automorphism": {"rank": 4, "kind": "closed",
                                                   "images": ["a", "ba", "c", "d"]}})
    assert cli("torus", missing_inverse)[0] == 2


def test_subprocess_runs_are_byte_identical(tmp_path):
    env = dict(os.environ)
    argv = [sys.executable, "-m", "fibertor.cli", "tower-cyclic", CAT_DOC, "--kmax", "20",
            "--format", "json", "--threads", "2"]
    first = subprocess.run(argv, capture_output=True, env=env, check=True).stdout
    second = subprocess.run(argv, capture_output=True, env=env, check=True).stdout
    assert first == second
    argv[-1] = "1"
    assert subprocess.run(argv, capture_output=True, env=env, check=True).stdout == first
