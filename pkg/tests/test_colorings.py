from __future__ import annotations

import pickle

import pytest

from treeramsey.colorings import (
    CachedColoring,
    ExprColoring,
    OverrideColoring,
    TableColoring,
    table_digest,
    word_stat,
)
from treeramsey.errors import ParseError
from treeramsey.trees import RootedTree
from treeramsey.words import NONLOCATED, Letter, StringWord, TreeWord, Var, WordContext

P2 = RootedTree((0, 1))
CTX = WordContext(P2, ("a",))
W = TreeWord.of({2: Letter(0), 3: Var(1), 5: Var(2), 6: Var(2)})


@pytest.mark.parametrize("name,value", [("size", 4), ("minpos", 2), ("maxpos", 6), ("letters", 1),
                                        ("vars", 3), ("comp", 2), ("lead", 2)])
def test_statistics(name, value):
    assert word_stat(W, name, P2) == value


def test_empty_word_statistics():
    e = TreeWord()
    assert word_stat(e, "minpos", P2) == -1
    assert word_stat(e, "comp", P2) == 0
    assert word_stat(e, "lead", P2) == 0


def test_expression_functions():
    col = ExprColoring("count($2) + minof('a') + maxof($1)", (CTX,), colors=100)
    assert col(W) == 2 + 2 + 3


def test_total_evaluation():
    col = ExprColoring("size // (minpos - minpos) + 7 % 0 + maxof($2)", (CTX,), colors=5)
    assert col(TreeWord()) == (0 + 0 - 1) % 5


def test_product_coordinates():
    c2 = WordContext(RootedTree((0,)), ("x", "y"), NONLOCATED)
    col = ExprColoring("w0.size * 10 + w1.count('y')", (CTX, c2), colors=1000)
    assert col((W, StringWord((Letter(1), Var(1), Letter(1))))) == 42


@pytest.mark.parametrize("text,col", [("size +", 7), ("frob", 1), ("count('z')", 7), ("w3.size", 1),
                                      ("count($5)", 7)])
def test_parse_error_columns(text, col):
    with pytest.raises(ParseError) as e:
        ExprColoring(text, (CTX,))
    assert e.value.col == col


def test_pickle_round_trip():
    col = ExprColoring("lead % 2", (CTX,))
    back = pickle.loads(pickle.dumps(col))
    assert back(W) == col(W) == 0


def test_table_override_cache():
    t = TableColoring({W: 1}, 2, default=0)
    assert t(W) == 1 and t(TreeWord()) == 0
    o = OverrideColoring(t, {W: 0})
    assert o(W) == 0
    c = CachedColoring(o)
    assert c(W) == 0 and W in c.cache
    assert table_digest({W: 1}, (CTX,)) == table_digest(dict([(W, 1)]), [CTX])
    assert table_digest({W: 1}, (CTX,)) != table_digest({W: 0}, (CTX,))
