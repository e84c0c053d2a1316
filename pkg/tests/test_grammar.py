import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfspanner.grammar import (
    Close,
    ExtractionGrammar,
    GrammarError,
    GrammarSyntaxError,
    NonTerminal,
    Open,
    Production,
    Span,
    SpanMapping,
    Terminal,
    clean,
    count_ops,
    format_refword,
    is_valid,
    parse_grammar,
    parse_refword,
    ref_to_mapping,
    serialize_grammar,
)
from cfspanner.transforms import to_cnf
from helpers import AB_BALANCED


def test_parse_ab_balanced():
    g = parse_grammar(AB_BALANCED)
    assert g.vars == ("x", "y")
    assert g.nonterminals == {"S", "A", "B"}
    assert len(g.productions) == 6
    assert g.start == "S"
    assert g.productions[0] == Production("S", (
        NonTerminal("B"), Open("x"), Terminal("a"), NonTerminal("A"),
        Terminal("b"), Close("y"), NonTerminal("B"),
    ))
    assert g.size == 7 + 3 + 2 + 2 + 2 + 0


def test_parse_empty_variable_set():
    g = parse_grammar("vars:\nstart: S\nS -> eps")
    assert g.vars == ()
    assert g.productions == (Production("S", ()),)


def test_undeclared_variable():
    with pytest.raises(GrammarSyntaxError, match="undeclared variable z"):
        parse_grammar("vars: x\nstart: S\nS -> {z 'a' z}")


def test_undeclared_nonterminal():
    with pytest.raises(GrammarSyntaxError, match="undeclared non-terminal Q"):
        parse_grammar("vars:\nstart: S\nS -> Q 'a'")


def test_duplicate_variable():
    with pytest.raises(GrammarSyntaxError, match="duplicate variable declaration x"):
        parse_grammar("vars: x, x\nstart: S\nS -> 'a'")


def test_syntax_error_position():
    with pytest.raises(GrammarSyntaxError) as info:
        parse_grammar("vars:\nstart: S\nS -> 'a' ?")
    assert (info.value.line, info.value.column) == (3, 10)


def test_missing_start():
    with pytest.raises(GrammarSyntaxError, match="start"):
        parse_grammar("vars: x\nS -> 'a'")


def test_comments_and_blank_lines():
    g = parse_grammar("# header\nvars: x  # one variable\n\nstart: S\nS -> {x 'a' x}  # rule\n")
    assert len(g.productions) == 1


def test_round_trip():
    g = parse_grammar(AB_BALANCED)
    text = serialize_grammar(g)
    assert parse_grammar(text) == g
    assert "eps" in text


def test_round_trip_after_cnf():
    g = to_cnf(parse_grammar(AB_BALANCED))
    text = serialize_grammar(g)
    assert parse_grammar(text) == g
    body_forms = (
        r"[A-Z][A-Za-z0-9_%]* [A-Z][A-Za-z0-9_%]*",
        r"'.'",
        r"\{[a-z]\w*",
        r"[a-z]\w*\}",
    )
    import re
    for line in text.splitlines()[2:]:
        _, body = line.split(" -> ")
        for alt in body.split(" | "):
            assert any(re.fullmatch(f, alt) for f in body_forms), line


def test_unambiguous_flag_round_trip():
    g = parse_grammar("vars:\nstart: S\nunambiguous: true\nS -> 'a'")
    assert g.declared_unambiguous
    assert parse_grammar(serialize_grammar(g)).declared_unambiguous


def test_start_must_be_nonterminal():
    with pytest.raises(GrammarError):
        ExtractionGrammar(("x",), frozenset({"A"}), frozenset(), (), "S")


def test_clean():
    r2 = parse_refword("{x a a x} {y a b y}")
    assert clean(r2) == "aaab"
    assert clean(()) == ""
    assert clean(parse_refword("{x x}")) == ""


def test_validity():
    r1 = parse_refword("{x a a y} {x a b y}")
    r2 = parse_refword("{x a a x} {y a b y}")
    assert not is_valid(r1, {"x", "y"})
    assert is_valid(r2, {"x", "y"})
    assert is_valid((), set())
    assert not is_valid(parse_refword("x} {x"), {"x"})
    assert not is_valid(parse_refword("{x a"), {"x"})


def test_ref_to_mapping():
    r2 = parse_refword("{x a a x} {y a b y}")
    assert ref_to_mapping(r2, ["x", "y"]).as_dict() == {"x": (1, 3), "y": (3, 5)}
    r3 = parse_refword("{y a y} {x a x} a b")
    assert ref_to_mapping(r3, ["x", "y"]).as_dict() == {"x": (2, 3), "y": (1, 2)}
    assert ref_to_mapping(parse_refword("{x x}"), ["x"]).as_dict() == {"x": (1, 1)}


def test_ref_to_mapping_rejects_invalid():
    with pytest.raises(ValueError):
        ref_to_mapping(parse_refword("x} a {x"), ["x"])


def test_span_mapping_views():
    m = SpanMapping.from_spans({"y": (3, 5), "x": (1, 3)})
    assert m["x"] == Span(1, 3)
    assert m.variables == ("x", "y")
    assert SpanMapping(m.pairs) == m
    assert [pos for _, pos in m.pairs] == [1, 3, 3, 5]
    assert m.as_json() == {"x": [1, 3], "y": [3, 5]}
    assert m.project({"x"}).as_dict() == {"x": (1, 3)}


def test_span_mapping_rejects_bad_pairs():
    with pytest.raises(ValueError):
        SpanMapping(((Open("x"), 3), (Close("x"), 2)))
    with pytest.raises(ValueError):
        SpanMapping(((Open("x"), 1),))


def test_format_refword_round_trip():
    r = parse_refword("{x 'a' x} 'b'")
    assert parse_refword(format_refword(r)) == r


# --------------------------------------------------------------------------
# properties

refsym = st.sampled_from([Terminal("a"), Terminal("b"), Open("x"), Close("x"), Open("y"), Close("y")])


@given(st.lists(refsym, max_size=12))
def test_length_splits_into_letters_and_ops(r):
    assert len(clean(r)) + count_ops(r) == len(r)


@st.composite
def valid_refwords(draw):
    d = draw(st.text(alphabet="ab", max_size=6))
    gaps = [[] for _ in range(len(d) + 1)]
    for v in ("x", "y"):
        i = draw(st.integers(0, len(d)))
        j = draw(st.integers(i, len(d)))
        if i == j:
            gaps[i] += [Open(v), Close(v)]
        else:
            gaps[i].append(Open(v))
            gaps[j].insert(0, Close(v))
    word = []
    for k, gap in enumerate(gaps):
        word += gap
        if k < len(d):
            word.append(Terminal(d[k]))
    return tuple(word)


@given(valid_refwords())
def test_mapping_spans_stay_in_document(r):
    n = len(clean(r))
    for span in ref_to_mapping(r, ["x", "y"]).spans.values():
        assert 1 <= span.start <= span.end <= n + 1


@given(valid_refwords(), st.randoms(use_true_random=False))
@settings(max_examples=60)
def test_reordering_a_gap_keeps_the_mapping(r, rnd):
    mapping = ref_to_mapping(r, ["x", "y"])
    # shuffle each maximal run of operations, then repair open/close order
    out, run = [], []
    for s in list(r) + [None]:
        if s is not None and not isinstance(s, Terminal):
            run.append(s)
            continue
        rnd.shuffle(run)
        for v in ("x", "y"):
            if Open(v) in run and Close(v) in run:
                a, b = run.index(Open(v)), run.index(Close(v))
                if a > b:
                    run[a], run[b] = run[b], run[a]
        out += run
        run = []
        if s is not None:
            out.append(s)
    assert is_valid(out, ["x", "y"])
    assert ref_to_mapping(out, ["x", "y"]) == mapping
