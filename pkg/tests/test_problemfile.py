import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoprune.bench import bundled_names, bundled_problem
from monoprune.gen import FAMILIES, UnknownFamily, bundled_sources, gen
from monoprune.grammar import parse_term
from monoprune.problemfile import ParseError, ProblemError, load_problem, parse_problem, print_problem, validate
from monoprune.chc import check_examples


def test_bundled_files_match_generator():
    sources = bundled_sources()
    assert sorted(sources) == bundled_names()
    for name, text in sources.items():
        assert validate(parse_problem(text)) == []
        assert print_problem(bundled_problem(name)) == text


def test_swap_problem_shape():
    p = bundled_problem("imp_swap")
    g = p.grammar
    assert [q.operator for q in g.by_lhs["S"]] == ["assignX", "assignY", "seq"]
    assert [q.operator for q in g.by_lhs["E"]] == ["zero", "one", "x", "y", "plus", "minus"]
    assert [(e.input, e.output) for e in p.examples] == [((4, 2), (2, 4)), ((3, 3), (3, 3))]


def test_csv_problem_example():
    p = bundled_problem("csv_record")
    assert p.examples[0].input.text == "303, name" and p.examples[0].output is True


@pytest.mark.parametrize("name", sorted(bundled_sources()))
def test_print_parse_fixpoint(name):
    text = bundled_sources()[name]
    once = print_problem(parse_problem(text))
    assert print_problem(parse_problem(once)) == once


@settings(max_examples=20, deadline=None)
@given(family=st.sampled_from(sorted(FAMILIES)), seed=st.integers(0, 50))
def test_generated_problems_round_trip(family, seed):
    for text in gen(family, seed):
        pf = parse_problem(text)
        assert validate(pf) == []
        assert print_problem(pf) == text


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_problem("(problem a)\n(start S")
    assert err.value.line == 2


@pytest.mark.parametrize(
    "edit,needle",
    [
        (("(nonterminal E int int)", "(nonterminal E float int)"), "sort"),
        (("(output 0)", "(output true)"), "expected int"),
        (("(start E)", "(start Q)"), "Q"),
        (("(example 0 -1)", ""), "no examples"),
        (("(example 0 -1)", "(example true -1)"), "example 0"),
        (("(output 0)", "(output (y 1))"), "E.zero"),
    ],
)
def test_diagnostics(edit, needle):
    text = bundled_sources()["unrealizable"].replace(*edit)
    diags = validate(parse_problem(text))
    assert any(needle in d for d in diags), diags
    with pytest.raises(ProblemError):
        load_problem(text)


def test_overlapping_guards_diagnosed():
    text = """
(problem g)
(nonterminal E int int)
(start E)
(production E f ()
  (rule (guard (< 0 x)) (output 1))
  (rule (guard (< 1 x)) (output 2)))
(example 2 1)
"""
    assert any("several guards" in d for d in validate(parse_problem(text)))


def test_gen_families():
    with pytest.raises(UnknownFamily):
        gen("sql", 0)
    imp = gen("imp", 3)
    assert imp[0] == bundled_sources()["imp_swap"]
    rx = gen("regexMatrix", 1)
    assert bundled_sources()["regex_matrix"] in rx and bundled_sources()["csv_record"] in rx
    assert gen("boolean", 7) == gen("boolean", 7)
    assert gen("boolean", 7) != gen("boolean", 8)


def test_boolean_family_bounds():
    for text in gen("boolean", 2):
        p = load_problem(text)
        nvars = len(p.grammar.decls[p.grammar.start].input_type.components)
        assert nvars <= 5


def test_regex_family_targets_are_solutions():
    # each generated regex problem carries examples produced by a hidden target
    for text in gen("regexMatrix", 0)[2:]:
        p = load_problem(text)
        assert len(p.examples) >= 2


def test_swap_solution_parses_in_bundled_grammar():
    p = bundled_problem("imp_swap")
    t = parse_term(p.grammar, "(seq (seq (assignX (minus x y)) (assignY (plus x y))) (assignX (minus y x)))")
    assert check_examples(t, p.examples)
