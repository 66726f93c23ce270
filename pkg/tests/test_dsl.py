from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from lifeworld import corpus
from lifeworld.binding import existential_goal, is_uniformly_reducible
from lifeworld.dsl import (
    KEYWORDS, ActionDecl, GoalDecl, MaterialDecl, ObjectDecl, ParamDecl, ParseError, ValidationError, WorldDecl,
    elaborate, load, parse, pretty_print, resolve, tokenize,
)
from lifeworld.kitchen import scenario_path

SCENARIOS = sorted(Path(scenario_path()).parent.glob("*.lw"))


def test_tokens():
    toks = tokenize("material pan-on chain a->b ; # note\n")
    assert [t.text for t in toks] == ["material", "pan-on", "chain", "a", "->", "b", ";", ""]
    assert toks[0].kind == "kw" and toks[1].kind == "ident"
    assert (toks[4].line, toks[4].col) == (1, 24)
    with pytest.raises(ParseError) as e:
        tokenize("material egg chain a -> b ; $")
    assert (e.value.line, e.value.column) == (1, 29)


def test_empty_input_is_empty_document():
    doc = parse("")
    assert doc.decls == ()
    assert pretty_print(doc) == ""
    env, dcps, config = elaborate(doc)
    assert len(env) == 1 and dcps == []


def test_material_declaration():
    doc = parse("material egg chain fresh -> broken -> beaten -> cooked ;")
    (m,) = doc.materials
    assert m.name == "egg" and m.chain == ("fresh", "broken", "beaten", "cooked")
    assert (m.name.line, m.name.col) == (1, 10)
    assert resolve(doc).types["egg"].chain == m.chain


def test_full_declarations():
    doc = parse(
        "material egg chain fresh -> broken ;\n"
        "tool bowl ready clean states clean dirty reset wash: dirty -> clean reset dry: dirty -> clean ;\n"
        "action break egg: fresh -> broken uses bowl: clean -> dirty at bowl ;\n"
        "world { egg e1 at fridge ; bowl b ; }\n"
        "goal exists egg broken ;\n"
        "param priority = egg bowl ;\n"
    )
    (t,) = doc.tools
    assert [r.action for r in t.resets] == ["wash", "dry"]
    (a,) = doc.actions
    assert a.uses[0].type == "bowl" and a.at == "bowl"
    (w,) = doc.worlds
    assert w.objects[0] == ObjectDecl("egg", "e1", "fridge")
    assert doc.goals == [GoalDecl("egg", "broken")]
    assert doc.params[0].values == ("egg", "bowl")


def test_keywords_cannot_be_names():
    with pytest.raises(ParseError) as e:
        parse("material world chain a -> b ;")
    assert (e.value.line, e.value.column) == (1, 10) and "identifier" in e.value.message


def test_parse_error_lists_expected():
    with pytest.raises(ParseError) as e:
        parse("material egg chain fresh broken ;")
    assert set(e.value.expected) == {"->", ";"}
    assert e.value.format("x.lw") == "x.lw:1:26: error: expected '->' or ';', found 'broken'"


def test_unterminated_world():
    with pytest.raises(ParseError) as e:
        parse("material egg chain a -> b ;\nworld {\n egg e ;\n")
    assert "end of input" in e.value.message and e.value.line == 4


def test_duplicate_chain_state_span():
    with pytest.raises(ValidationError) as e:
        resolve(parse("material egg chain fresh -> fresh ;"))
    err = e.value
    assert "duplicate chain state" in err.message
    assert (err.line, err.column) == (1, 29)
    assert err.span.contains(err.line, err.column)


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.name)
def test_round_trip_shipped(path):
    doc = parse(path.read_text())
    again = parse(pretty_print(doc))
    assert again == doc
    assert pretty_print(again) == pretty_print(doc)


names = st.from_regex(r"[a-z][a-z0-9]{0,5}(-[a-z0-9]{1,3})?", fullmatch=True).filter(lambda s: s not in KEYWORDS)


@st.composite
def documents(draw):
    decls = []
    for _ in range(draw(st.integers(0, 3))):
        chain = draw(st.lists(names, min_size=2, max_size=4, unique=True))
        decls.append(MaterialDecl(draw(names), tuple(chain)))
    objs = draw(st.lists(st.tuples(names, names, st.none() | names), max_size=3))
    if objs:
        decls.append(WorldDecl(tuple(ObjectDecl(t, i, a) for t, i, a in objs)))
    for _ in range(draw(st.integers(0, 2))):
        decls.append(ParamDecl(draw(names), tuple(draw(st.lists(names, min_size=1, max_size=3)))))
    return decls


@given(decls=documents())
def test_round_trip_generated(decls):
    from lifeworld.dsl import SpecDocument

    doc = SpecDocument(tuple(decls))
    assert parse(pretty_print(doc)) == doc


def test_determinism():
    text = Path(scenario_path("breakfast.lw")).read_text()
    a, b = elaborate(parse(text)), elaborate(parse(text))
    assert a.env.objects == b.env.objects and a.env.action_names == b.env.action_names


def test_existential_goal_matches_binding_oracle():
    el = load(scenario_path("two-eggs.lw"))
    (d,) = el.dcps
    one = corpus.egg_world(1)
    oracle = existential_goal(corpus.COOKED, is_uniformly_reducible(el.env, one).bindings)
    assert frozenset(s for s in el.env.states() if s in d.goal) == oracle


def test_elaborated_world_matches_corpus():
    el = load(scenario_path("egg-whisk.lw"))
    w = corpus.egg_whisk_world()
    assert set(el.env.states()) == set(w.states())
    for a in w.action_names:
        for s in w.states():
            assert el.env.apply(a, s) == w.apply(a, s)


def test_goal_type_needs_objects():
    with pytest.raises(ValidationError) as e:
        resolve(parse("material egg chain a -> b ;\nmaterial pan chain c -> d ;\nworld { pan p ; }\ngoal exists egg b ;"))
    assert e.value.line == 4 and "no objects" in e.value.message


@pytest.mark.parametrize("text, where, words", [
    ("material egg chain a -> b ;\nmaterial egg chain c -> d ;", (2, 10), "duplicate"),
    ("material egg chain a -> b -> c ;\naction skip egg: a -> c ;", (2, 18), "not a step"),
    ("material egg chain a -> b ;\naction x egg: a -> b ;\naction y egg: a -> b ;", (3, 15), "already"),
    ("tool t ready x states x y reset r: y -> x ;\naction poke t: x -> y ;", (2, 13), "tool"),
    ("material e chain a -> b ;\ntool t ready x states x y ;", (2, 6), "reset"),
    ("material e chain a -> b ;\naction go e: a -> b at pan ;\nmaterial pan chain u -> v ;", (2, 24), "does not use"),
    ("material e chain a -> b ;\nparam cleanup = maybe ;", (2, 17), "true"),
    ("material e chain a -> b ;\nparam auto.e.a = 3 ;\naction go e: a -> b ;", (2, 7), "timed"),
])
def test_validation_errors(text, where, words):
    with pytest.raises(ValidationError) as e:
        resolve(parse(text))
    assert (e.value.line, e.value.column) == where
    assert words in e.value.message
