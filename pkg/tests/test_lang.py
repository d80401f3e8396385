import logging
import re

import pytest

from conftest import read_labels
from polycheck.errors import ScriptExpansionError, ScriptSyntaxError
from polycheck.formula import FormulaStore, Kind, atoms_of, iter_nodes, node_count
from polycheck.lang import Ap, Call, Const, Ref, expand, format_script, load_prelude, parse_script

BUNDLED_SCRIPTS = [
    ("scripts/maze.imgql", "maze_labels.txt", "data/maze.json"),
    ("scripts/coral_branches.imgql", "coral_branches_labels.txt", "data/coral.json"),
    ("scripts/coral_ranks.imgql", "coral_ranks_labels.txt", "data/coral_ranks.json"),
    ("scripts/aircraft.imgql", "aircraft_labels.txt", "data/aircraft.json"),
]


def _read(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def _body(text):
    return parse_script(f'save "s" {text}').saves[0].body


def test_not_binds_tighter_than_and_than_or():
    a, b, c = Ap("a"), Ap("b"), Ap("c")
    assert _body('!ap("a") & ap("b") | ap("c")') == Call("or", (Call("and", (Call("not", (a,)), b)), c))
    assert _body('ap("a") | ap("b") & ap("c")') == Call("or", (a, Call("and", (b, c))))
    assert _body('!(ap("a") | tt)') == Call("not", (Call("or", (a, Const(True))),))


def test_infix_operators_associate_left():
    a, b, c = Ap("a"), Ap("b"), Ap("c")
    assert _body('ap("a") | ap("b") | ap("c")') == Call("or", (Call("or", (a, b)), c))
    assert _body('ap("a") & ap("b") & ap("c")') == Call("and", (Call("and", (a, b)), c))


def test_statements_and_comments():
    script = parse_script(
        '// header\nload model = "m.json"\nlet f(x, y) = through(x, y) // trailing\n'
        'let g = ff\nsave "out \\"q\\"" f(ap("p q"), g)\n'
    )
    assert script.model_path == "m.json"
    assert list(script.definitions) == ["f", "g"]
    assert script.definitions["f"].params == ("x", "y")
    assert script.definitions["g"].line == 4
    assert script.saves[0].label == 'out "q"'
    assert script.saves[0].body == Call("f", (Ap("p q"), Ref("g")))


def test_syntax_error_reports_line():
    with pytest.raises(ScriptSyntaxError) as excinfo:
        parse_script('save "a" ap("x")\nsave "b" &\n', source="q.imgql")
    assert excinfo.value.line == 2
    assert "q.imgql" in str(excinfo.value)


@pytest.mark.parametrize("text", [
    'let a = tt\nlet a = ff\n',
    'let f(x, x) = x\n',
    'load model = "a"\nload model = "b"\n',
    'save "s"\n',
    'let tt = ff\n',
])
def test_rejected_scripts(text):
    with pytest.raises(ScriptSyntaxError):
        parse_script(text)


@pytest.mark.parametrize("text, message", [
    ('let a = b\nlet b = a\nsave "s" a\n', "recursive macro: a -> b -> a"),
    ('let f(x) = x\nsave "s" f(tt, tt)\n', "expects 1 argument(s), got 2"),
    ('save "s" not(tt, ff)\n', "expects 1 argument(s), got 2"),
    ('save "s" through\n', "expects 2 argument(s), got 0"),
    ('save "s" missing\n', "unknown identifier 'missing'"),
    ('save "s" missing(tt)\n', "unknown identifier 'missing'"),
    ('let f(x) = x(tt)\nsave "s" f(ff)\n', "parameter 'x' cannot be called"),
])
def test_expansion_errors(text, message):
    with pytest.raises(ScriptExpansionError, match=re.escape(message)):
        expand(parse_script(text))


def test_recursion_is_detected_even_when_unused():
    with pytest.raises(ScriptExpansionError, match="recursive macro"):
        expand(parse_script('let loop(x) = loop(x)\nsave "s" tt\n'))


def test_identical_subformulas_share_one_node():
    store = FormulaStore()
    _, saves = expand(parse_script('save "a" and(ap("x"), ap("y"))\nsave "b" ap("x") & ap("y")\n'), store=store)
    assert saves[0][1] is saves[1][1]
    assert len(store) == 3


def test_prelude_lowers_onto_the_core():
    store = FormulaStore()
    text = 'save "n" near(ap("a"))\nsave "e" eta(ap("a"), ap("b"))\nsave "r" reach(ap("a"), ap("b"))\n'
    _, saves = expand(parse_script(text), prelude=load_prelude(), store=store)
    formulas = dict(saves)
    a, b = store.atom("a"), store.atom("b")
    assert formulas["n"] is store.near(a)
    assert formulas["e"] is store.eta(a, b)
    assert formulas["r"] is store.or_(a, store.gamma(a, b))


def test_without_prelude_derived_names_are_unknown():
    with pytest.raises(ScriptExpansionError, match="unknown identifier 'near'"):
        expand(parse_script('save "n" near(tt)\n'))


def test_script_definition_shadows_prelude(caplog):
    store = FormulaStore()
    with caplog.at_level(logging.WARNING):
        _, saves = expand(parse_script('let near(x) = cvnear(x)\nsave "n" near(ap("a"))\n'),
                          prelude=load_prelude(), store=store)
    assert saves[0][1] is store.cvnear(store.atom("a"))
    assert "Definition of 'near' at line 1 shadows the prelude" in caplog.text


def test_repeated_label_keeps_position_and_last_formula(caplog):
    store = FormulaStore()
    text = 'save "s" ap("a")\nsave "t" tt\nsave "s" ap("b")\n'
    with caplog.at_level(logging.WARNING):
        _, saves = expand(parse_script(text), store=store)
    assert [label for label, _ in saves] == ["s", "t"]
    assert saves[0][1] is store.atom("b")
    assert 'Save label "s" repeated at line 3' in caplog.text


def test_white_to_green_nests_to_the_left():
    store = FormulaStore()
    model_path, saves = expand(parse_script(_read("scripts/maze.imgql")), load_prelude(), store)
    formulas = dict(saves)
    green, white, black, red = (store.atom(a) for a in "GWBR")
    corridor = store.atom("corridor")
    via_white = store.gamma(corridor, white)
    corridor_ww = store.and_(via_white, store.not_(store.gamma(corridor, store.or_(store.or_(green, black), red))))
    corridor_wg = store.and_(via_white, store.gamma(corridor, green))
    expected = store.gamma(store.or_(store.or_(white, corridor_ww), corridor_wg), green)
    assert formulas["whiteToGreen"] is expected
    assert model_path == "data/maze.json"
    assert atoms_of(formulas["connRWG"]) == ["B", "G", "R", "W", "corridor"]


@pytest.mark.parametrize("script_path, labels, model_path", BUNDLED_SCRIPTS)
def test_bundled_scripts_expand(script_path, labels, model_path):
    path, saves = expand(parse_script(_read(script_path), script_path), load_prelude())
    assert path == model_path
    assert [label for label, _ in saves] == read_labels(labels)
    assert all(node_count(f) >= 1 for _, f in saves)


@pytest.mark.parametrize("script_path", [s for s, _, _ in BUNDLED_SCRIPTS])
def test_format_is_a_fixpoint(script_path):
    once = format_script(parse_script(_read(script_path)))
    assert format_script(parse_script(once)) == once
    store = FormulaStore()
    first = expand(parse_script(_read(script_path)), load_prelude(), store)
    second = expand(parse_script(once), load_prelude(), store)
    assert [f for _, f in first[1]] == [f for _, f in second[1]]


def test_rank_script_uses_only_core_kinds():
    _, saves = expand(parse_script(_read("scripts/coral_ranks.imgql")), load_prelude())
    kinds = {n.kind for _, f in saves for n in iter_nodes(f)}
    assert kinds <= {Kind.ATOM, Kind.TOP, Kind.NOT, Kind.AND, Kind.OR, Kind.GAMMA}


def test_node_count_counts_distinct_nodes():
    store = FormulaStore()
    p, q = store.atom("p"), store.atom("q")
    assert node_count(p) == 1
    assert node_count(store.and_(p, p)) == 2
    assert node_count(store.or_(store.gamma(p, q), store.gamma(p, q))) == 4


LEAVES = [("ap", "a"), ("ap", "b"), ("tt",), ("ff",)]
UNARY = ["not", "cvnear"]
BINARY = ["and", "or", "xor", "through"]


def _random_term(rng, budget):
    """Random formula as nested tuples with at most `budget` nodes."""
    if budget <= 1 or rng.random() < 0.2:
        return LEAVES[int(rng.integers(len(LEAVES)))]
    if budget == 2 or rng.random() < 0.3:
        return (UNARY[int(rng.integers(len(UNARY)))], _random_term(rng, budget - 1))
    left = int(rng.integers(1, budget - 1))
    return (BINARY[int(rng.integers(len(BINARY)))], _random_term(rng, left), _random_term(rng, budget - 1 - left))


def _size(term):
    return 1 if term[0] in ("ap", "tt", "ff") else 1 + sum(_size(t) for t in term[1:])


def _build(store, term):
    if term[0] == "ap":
        return store.atom(term[1])
    return store.make(Kind(term[0]), [_build(store, t) for t in term[1:]])


def test_hash_consing_identity_is_structural_equality(rng):
    store = FormulaStore()
    terms = [_random_term(rng, int(rng.integers(1, 13))) for _ in range(300)]
    formulas = [_build(store, t) for t in terms]
    for term, formula in zip(terms, formulas):
        assert _size(term) <= 12
        assert node_count(formula) <= _size(term)
        assert _build(store, term) is formula
    for i, (t1, f1) in enumerate(zip(terms, formulas)):
        for t2, f2 in zip(terms[i:], formulas[i:]):
            assert (f1 is f2) == (t1 == t2)
            assert (f1.uid == f2.uid) == (t1 == t2)
