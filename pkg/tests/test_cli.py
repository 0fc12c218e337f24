from __future__ import annotations

import json

import jsonschema
import pytest

from treeramsey.cli import main
from treeramsey.witness import load_schema

from conftest import CORPUS, GOLDEN, run_cli

SEARCH_FILES = ["hindman_parity", "gowers_fin2", "product_parity", "table_coloring"]
DELTA_FILES = ["delta_mod5", "delta_evens_2d"]


def _validate(verb: str, stdout: str) -> dict:
    doc = json.loads(stdout)
    jsonschema.validate(doc, load_schema(verb))
    return doc


def test_enumerate_homs(capsys):
    assert main(["enumerate-homs", "--tree", "[0,1]"]) == 0
    doc = _validate("enumerate-homs", capsys.readouterr().out)
    assert doc["count"] == 5


@pytest.mark.parametrize("name", SEARCH_FILES)
def test_search_schema_and_verify(name, tmp_path, capsys):
    out = tmp_path / "w.json"
    assert main(["search", str(CORPUS / f"{name}.tr"), "--out", str(out)]) == 0
    doc = _validate("search", capsys.readouterr().out)
    assert doc["verdict"] == "found"
    assert main(["verify", str(out)]) == 0
    _validate("verify", capsys.readouterr().out)


@pytest.mark.parametrize("name", DELTA_FILES)
def test_delta_scan_schema(name, capsys):
    assert main(["delta-scan", str(CORPUS / f"{name}.tr")]) == 0
    doc = _validate("delta-scan", capsys.readouterr().out)
    assert doc["delta"]["failures"] == 0


def test_threshold_schema(capsys):
    assert main(["threshold", str(CORPUS / "hj_line.tr")]) == 0
    doc = _validate("threshold", capsys.readouterr().out)
    assert doc["threshold"]["value"] == 2


def test_semigroup_verify_schema(capsys):
    assert main(["semigroup-verify", "--max-order", "2", "--random", "20"]) == 0
    doc = _validate("semigroup-verify", capsys.readouterr().out)
    assert doc["verdict"] == "OK"


@pytest.mark.parametrize("path", sorted(GOLDEN.glob("*.json")), ids=lambda p: p.stem)
def test_golden_files_verify(path, capsys):
    assert main(["verify", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]


def test_mutated_witness_fails_with_violation(tmp_path):
    doc = json.loads((GOLDEN / "hindman_parity.witness.json").read_text())
    doc["blocks"]["main"][1][1] = "[3:$1]"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    r = run_cli("verify", bad)
    assert r.returncode == 1
    assert "violating combination" in r.stderr and '"combination"' in r.stderr


def test_tampered_instance_fails(tmp_path):
    doc = json.loads((GOLDEN / "hindman_parity.witness.json").read_text())
    doc["instance"] = doc["instance"].replace("bound 8", "bound 9")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    r = run_cli("verify", bad)
    assert r.returncode == 1 and "digest" in r.stderr


def test_exit_codes(tmp_path):
    assert run_cli("search", tmp_path / "missing.tr").returncode == 1
    assert run_cli("frobnicate").returncode == 1
    assert run_cli("search", CORPUS / "delta_mod5.tr").returncode == 1
    (tmp_path / "x.tr").write_text("tree [0]\ncoloring expr size % 2\nblocks 2\nbound 2\n")
    r = run_cli("search", tmp_path / "x.tr")
    assert r.returncode == 2 and json.loads(r.stdout)["verdict"] == "exhausted"
    assert run_cli("verify", tmp_path / "missing.json").returncode == 1
    r = run_cli("search", CORPUS / "hindman_parity.tr", "--out", tmp_path / "none.json", "--bound", "2")
    assert r.returncode == 2
    assert run_cli("verify", tmp_path / "none.json").returncode == 2
    (tmp_path / "bad.tr").write_text("tree [0]\ncoloring expr size +\n")
    r = run_cli("search", tmp_path / "bad.tr")
    assert r.returncode == 1 and "line 2" in r.stderr


def test_byte_identical_outputs(tmp_path):
    for k in (1, 2):
        assert run_cli("search", CORPUS / "gowers_fin2.tr", "--seed", "3", "--out", tmp_path / f"s{k}.json").returncode == 0
        assert run_cli("semigroup-verify", "--random", "30", "--seed", "9", "--out", tmp_path / f"g{k}.json").returncode == 0
    assert (tmp_path / "s1.json").read_bytes() == (tmp_path / "s2.json").read_bytes()
    assert (tmp_path / "g1.json").read_bytes() == (tmp_path / "g2.json").read_bytes()


def test_text_format(capsys):
    assert main(["search", str(CORPUS / "hindman_parity.tr"), "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "search: found" in out and "main step 0" in out
