from __future__ import annotations

import json

import pytest

from treeramsey.dsl import (
    build_instance,
    emit_instance,
    instance_digest,
    parse_instance,
    with_overrides,
)
from treeramsey.errors import ParseError, ResolutionError
from treeramsey.search import search_block_sequence
from treeramsey.trees import RootedTree
from treeramsey.words import TreeWord, Var

from conftest import CORPUS

CORPUS_FILES = sorted(CORPUS.glob("*.tr"))


def test_minimal_hindman():
    spec = parse_instance("tree [0]\ncoloring expr minpos % 2\nblocks 2\n")
    assert spec.blocks == 2 and spec.bound == 8 and spec.mode == "search"
    (f,) = spec.factors
    assert f.name == "main" and f.tree == (0,)
    assert [e.name for e in f.endos] == ["id"]


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_corpus_round_trip(path):
    spec = parse_instance(path.read_text())
    text = emit_instance(spec)
    again = parse_instance(text)
    assert again == spec
    assert emit_instance(again) == text
    assert instance_digest(again) == instance_digest(spec)


def test_canonical_form_ignores_layout():
    a = parse_instance("# comment\nbound 5\ntree   [0]\n\ncoloring expr  minpos%2   # trailing\n")
    b = parse_instance("coloring expr minpos%2\ntree [0]\nbound 5\n")
    assert emit_instance(a) == emit_instance(b)


def test_undeclared_endo():
    with pytest.raises(ResolutionError) as e:
        parse_instance("tree [0,1]\nendo p = pred 1\nschedule p q\ncoloring expr 0\n")
    assert e.value.name == "q"


def test_undeclared_coord():
    with pytest.raises(ResolutionError):
        parse_instance("factor a {\n tree [0]\n}\ncoords a b\ncoloring expr 0\n")


@pytest.mark.parametrize("text,line,col", [
    ("tree [0]\ncolour expr 0\n", 2, 1),
    ("tree [0]\ncoloring expr size +\n", 2, 21),
    ("tree [0]\nfactor x {\n  tree [0]\n  bogus 1\n}\ncoloring expr 0\n", 4, 3),
    ("tree [0]\nblocks 2\nblocks 3\ncoloring expr 0\n", 3, 1),
    ("scene {\n  window 0 10\n", 1, 1),
])
def test_parse_error_positions(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_instance(text)
    assert (e.value.line, e.value.col) == (line, col)


def test_missing_coloring():
    with pytest.raises(ParseError):
        parse_instance("tree [0]\nblocks 2\n")


def test_substitution_and_hom_endos():
    spec = parse_instance("tree [0,1]\nalphabet a\nendo s = subst {1: 'a', 2: $1}\nendo h = hom [0,0,1]\n"
                          "schedule s h\ncoloring expr 0\n")
    built = build_instance(spec)
    (f,) = built.instance.factors
    s, h = f.schedule[0]
    assert s.spine.values == (0, 0, 1) and h.spine.values == (0, 0, 1)


def test_endos_homs_names():
    spec = parse_instance("tree [0,1]\nendos homs\ncoloring expr 0\n")
    assert sorted(e.name for e in spec.factors[0].endos) == ["h000", "h001", "h010", "h011", "h012"]


def test_table_coloring_inline_and_file(tmp_path):
    inline = parse_instance("tree [0]\ncoloring table {\n  [0:$1] -> 1\n}\ndefault_color 0\nblocks 1\nbound 2\n")
    col = build_instance(inline).instance.coloring
    assert col(TreeWord.of({0: Var(1)})) == 1 and col(TreeWord.of({1: Var(1)})) == 0
    (tmp_path / "t.json").write_text(json.dumps({"default": 1, "entries": [[["[0:$1]"], 0]]}))
    spec = parse_instance("tree [0]\ncoloring file t.json\nblocks 1\nbound 2\n")
    col = build_instance(spec, tmp_path).instance.coloring
    assert col(TreeWord.of({0: Var(1)})) == 0 and col(TreeWord.of({1: Var(1)})) == 1


def test_table_entry_errors():
    with pytest.raises(ParseError):
        parse_instance("tree [0]\ncoloring table {\n  [0:$1] -> 5\n}\n")
    with pytest.raises(ParseError):
        parse_instance("tree [0]\ncoloring table {\n  [0:$7] -> 1\n}\n")


def test_delta_scene():
    spec = parse_instance((CORPUS / "delta_mod5.tr").read_text())
    built = build_instance(spec)
    assert len(built.scene.points) == 80
    assert search_block_sequence(built.instance).found
    with pytest.raises(ParseError):
        parse_instance("mode delta-scan\ntree [0]\ncoloring expr 0\nscene {\n  window 0 10\n  residues 2 0\n}\n")


def test_overrides():
    spec = parse_instance("tree [0]\ncoloring expr 0\n")
    s2 = with_overrides(spec, bound=5, blocks=None)
    assert s2.bound == 5 and s2.blocks == spec.blocks


def test_product_instance():
    spec = parse_instance((CORPUS / "product_parity.tr").read_text())
    inst = build_instance(spec).instance
    assert [f.name for f in inst.factors] == ["left", "right"] and inst.coords == (0, 1)
    assert RootedTree(spec.factors[0].tree).size == 2
