import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DESK, complete_terms, problem, random_partial
from monoprune.grammar import (
    Grammar,
    GrammarError,
    Hole,
    NoHole,
    NonterminalDecl,
    NonterminalMismatch,
    Production,
    count_complete,
    expand,
    format_term,
    holes_in_order,
    leftmost_hole,
    parse_term,
    well_formed,
)
from monoprune.values import IntT


def top_down_counts(g, max_size):
    """Independent count: expand leftmost holes from the start symbol."""
    counts = [0] * (max_size + 1)
    stack = [Hole(g.start)]
    while stack:
        t = stack.pop()
        found = leftmost_hole(t)
        if found is None:
            counts[t.size] += 1
            continue
        for p in g.by_lhs[found[1]]:
            if t.size + p.arity <= max_size:
                stack.append(expand(t, p))
    return counts


@pytest.mark.parametrize("name", DESK)
def test_count_matches_top_down_expansion(name):
    g = problem(name).grammar
    assert count_complete(g, g.start, 6) == top_down_counts(g, 6)


def test_swap_grammar_counts_frozen():
    # hand count: 2 assignments x 4 leaves at size 2; sizes grow by E-operators and seq
    g = problem("imp_swap").grammar
    assert count_complete(g, "S", 7) == [0, 0, 8, 0, 64, 64, 1024, 1024]
    assert count_complete(problem("unrealizable").grammar, "E", 5) == [0, 1, 1, 1, 1, 1]


@pytest.mark.parametrize("name", DESK)
def test_enumeration_distinct_and_well_formed(name):
    terms = complete_terms(name, 6)
    g = problem(name).grammar
    assert len(set(terms)) == len(terms) == sum(count_complete(g, g.start, 6))
    assert all(well_formed(g, t) and t.complete for t in terms)
    sizes = [t.size for t in terms]
    assert sizes == sorted(sizes)


@settings(max_examples=60, deadline=None)
@given(name=st.sampled_from(DESK), seed=st.integers(0, 10_000))
def test_format_parse_round_trip(name, seed):
    rng = random.Random(seed)
    terms = complete_terms(name, 6)
    t = random_partial(rng, rng.choice(terms))
    g = problem(name).grammar
    assert parse_term(g, format_term(t)) == t


def test_expand_fills_leftmost_hole():
    g = problem("imp_swap").grammar
    t = expand(Hole("S"), g.find("S", "seq"))
    assert format_term(t) == "(seq ?S ?S)"
    t = expand(t, g.find("S", "assignX"))
    assert format_term(t) == "(seq (assignX ?E) ?S)"
    assert [nt for _, nt in holes_in_order(t)] == ["E", "S"]
    with pytest.raises(NonterminalMismatch):
        expand(t, g.find("S", "seq"))
    done = parse_term(g, "(assignX x)")
    with pytest.raises(NoHole):
        expand(done, g.find("E", "x"))


def test_size_holes_depth():
    g = problem("imp_swap").grammar
    t = parse_term(g, "(seq (assignX (plus x ?E)) ?S)")
    assert (t.size, t.holes, t.depth) == (6, 2, 4)


def test_grammar_errors():
    i = IntT()
    d = NonterminalDecl("E", i, i)
    with pytest.raises(GrammarError):
        Grammar((d,), "S", ())
    with pytest.raises(GrammarError):
        Grammar((d, d), "E", ())
    with pytest.raises(GrammarError):
        Grammar((d,), "E", (Production("E", "f", ("Q",), ("r",)),))
    with pytest.raises(GrammarError):
        Grammar((d,), "E", (Production("E", "z", (), ("r",)), Production("E", "z", (), ("r",))))
    with pytest.raises(GrammarError):
        Grammar((d,), "E", (Production("E", "z", (), ()),))
