from __future__ import annotations

import pytest
from hypothesis import given, settings

from conftest import FIXTURES, load, programs
from semcom.errors import GroundingError, GroundingSizeError, ParseError
from semcom.kb import AnnotatedDisjunction, Builtin, BuiltinOp, Clause, atom, const
from semcom.lang import eval_builtin, ground, parse_atom, parse_clause, parse_program, serialize


def test_parse_example_one():
    kb = load("example1.pl")
    assert len(kb) == 3
    assert Clause(0.5, atom("a"), (atom("b"),)) in kb


def test_unlabelled_clause_is_certain():
    (c,) = parse_program("a :- b.").items()
    assert c.prob == 1.0


def test_disjunction():
    item = parse_clause('0.5::word(two,"BEEF"); 0.5::word(two,"PORK").')
    assert isinstance(item, AnnotatedDisjunction)
    assert atom("word", "two", "PORK") in item.heads


def test_comments_and_whitespace():
    kb = parse_program("% header\n0.3::b.   % trailing\n\n  0.5::a :-\n    b.\n")
    assert len(kb) == 2


@pytest.mark.parametrize("text", [
    "0.5::a",                 # missing period
    "0.5::a :- .",            # empty body
    "1.5::a.",                # probability out of range
    "0.6::a; 0.6::b.",        # disjunction mass above one
    "0.5::a; 0.5::b :- c.",   # disjunction with a body
    "a :- b,, c.",
    "p(0.5).",                # reals are not terms
    '"x"::a.',
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_program(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_program("0.3::b.\n0.5::a :- .\n")
    assert info.value.line == 2


@pytest.mark.parametrize("op_text,op", [(">=", BuiltinOp.GE), ("=<", BuiltinOp.LE),
                                        ("<=", BuiltinOp.LE), ("==", BuiltinOp.EQ),
                                        ("=", BuiltinOp.EQ), (">", BuiltinOp.GT),
                                        ("<", BuiltinOp.LT)])
def test_comparison_operators(op_text, op):
    (c,) = parse_program(f"p(X) :- q(X), X {op_text} 3.").items()
    assert c.body[1].op is op


@pytest.mark.parametrize("builtin,expected", [
    (Builtin(BuiltinOp.GE, (const(75), const(70))), True),
    (Builtin(BuiltinOp.LT, (const(75), const(70))), False),
    (Builtin(BuiltinOp.ENDSWITH, (const("ICE"), const("E"))), True),
    (Builtin(BuiltinOp.ENDSWITH, (const("ICY"), const("E"))), False),
    (Builtin(BuiltinOp.CHARAT, (const("APPLE"), const(2), const("P"))), True),
    (Builtin(BuiltinOp.CHARAT, (const("APPLE"), const(9), const("P"))), False),
])
def test_eval_builtin(builtin, expected):
    assert eval_builtin(builtin) is expected


def test_parse_atom():
    assert parse_atom("pass(tom)") == atom("pass", "tom")
    assert parse_atom('word(one,"APPLE").') == atom("word", "one", "APPLE")
    with pytest.raises(ParseError):
        parse_atom("pass(tom) extra")


def test_ground_threshold_rule():
    g = ground(load("tom_pass.pl"))
    rules = [c for c in g.clauses if c.body]
    assert len(rules) == 1
    assert rules[0].head == atom("pass", "tom")
    assert all(not isinstance(lit, Builtin) for lit in rules[0].body)


def test_ground_drops_false_comparisons():
    kb = parse_program("0.9::pass_score(80).\n0.8::mark(tom,75).\n"
                       "pass(X) :- mark(X,M), pass_score(S), M >= S.\n")
    assert not [c for c in ground(kb).clauses if c.body]


def test_ground_without_producer_is_empty():
    g = ground(load("tom_mark.pl"))
    assert atom("pass", "tom") not in {c.head for c in g.clauses}


def test_ground_endswith_needs_a_word():
    kb = load("crossword_bob.pl")
    assert not [c for c in ground(kb).clauses if c.head == atom("word", "one", "APPLE") and
                any(lit.predicate == "word" and lit.args[0] == const("three")
                    for lit in c.body)]
    g = ground(kb.union(parse_program('word(three,"ICE").')))
    assert Clause(1.0, atom("word", "one", "APPLE"), (atom("word", "three", "ICE"),)) in g


def test_ground_is_identity_on_ground_programs():
    kb = load("example1.pl")
    assert ground(kb) == kb


def test_ground_cap():
    facts = "".join(f"0.5::n({i}).\n" for i in range(50))
    kb = parse_program(facts + "p(X,Y,Z) :- n(X), n(Y), n(Z).\n")
    with pytest.raises(GroundingSizeError):
        ground(kb, max_instances=1000)


def test_ground_unsafe_disjunction():
    with pytest.raises(GroundingError):
        ground(parse_program("0.5::p(X); 0.5::q(X)."))


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.pl")), ids=lambda p: p.name)
def test_round_trip_fixtures(path):
    kb = parse_program(path.read_text())
    text = serialize(kb)
    assert parse_program(text) == kb
    assert serialize(parse_program(text)) == text


@settings(max_examples=300, deadline=None)
@given(programs())
def test_round_trip_random(kb):
    assert parse_program(serialize(kb)) == kb
