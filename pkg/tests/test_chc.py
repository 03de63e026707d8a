import itertools
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import complete_terms, problem
from monoprune.chc import (
    EvalError,
    Expr,
    FuelExhausted,
    Indeterminate,
    NoRuleApplies,
    X,
    check_examples,
    child,
    eval_expr,
    eval_term,
)
from monoprune.grammar import parse_term
from monoprune.problemfile import ProblemError, load_problem, parse_problem, validate
from monoprune.values import INF, CharMatrices

SWAP = "(seq (seq (assignX (minus x y)) (assignY (plus x y))) (assignX (minus y x)))"


def test_textbook_swap_program_swaps():
    p = problem("imp_swap")
    t = parse_term(p.grammar, SWAP)
    for a, b in itertools.product(range(-3, 4), repeat=2):
        assert eval_term(t, (a, b)) == (b, a)
    assert check_examples(t, p.examples)


def test_sub_expression():
    sub = Expr("-", (child(1), child(2)))
    assert eval_expr(sub, (0, 0), [7, 1]) == 6
    with pytest.raises(Indeterminate):
        eval_expr(sub, None, [INF, INF])


def test_child_inputs_flow_left_to_right():
    # seq runs its second child on the first child's output
    p = problem("imp_swap")
    t = parse_term(p.grammar, "(seq (assignX one) (assignY x))")
    assert eval_term(t, (5, 9)) == (1, 1)


def test_bitvector_ops():
    p = problem("bitvec_toy")
    sat = parse_term(p.grammar, "(bvadd x x)")
    assert [eval_term(sat, v) for v in (1, 100, 200)] == [2, 200, 255]
    assert eval_term(parse_term(p.grammar, "(bvor x (bvand x x))"), 6) == 6


def test_while_loop_and_fuel():
    p = problem("imp_loop")
    loop = parse_term(p.grammar, "(while (lt x y) (assignX (plus x one)))")
    assert eval_term(loop, (0, 3)) == (3, 3)
    assert check_examples(loop, p.examples)
    diverge = parse_term(p.grammar, "(while (lt zero one) (assignX x))")
    with pytest.raises(FuelExhausted):
        eval_term(diverge, (0, 0), fuel=50)
    assert not check_examples(diverge, p.examples, fuel=50)


GUARDED = """
(problem absval)
(nonterminal E int int)
(start E)
(production E abs ()
  (rule (guard (< x 0)) (output (- 0 x)))
  (rule (output x)))
(production E pos ()
  (rule (guard (< 0 x)) (output x)))
(example -3 3)
"""


def test_guards_select_rule():
    p = load_problem(GUARDED).compile()
    t = parse_term(p.grammar, "abs")
    assert [eval_term(t, v) for v in (-3, 0, 4)] == [3, 0, 4]
    with pytest.raises(NoRuleApplies):
        eval_term(parse_term(p.grammar, "pos"), -1)
    assert issubclass(NoRuleApplies, EvalError)


def test_ill_typed_rule_diagnosed():
    bad = GUARDED.replace("(output (- 0 x))", "(output (and x true))")
    diags = validate(parse_problem(bad))
    assert any("E.abs" in d for d in diags)
    with pytest.raises(ProblemError):
        load_problem(bad)


def test_child_output_used_too_early():
    text = """
(problem flow)
(nonterminal E int int)
(start E)
(production E zero () (rule (output 0)))
(production E pair (E E E)
  (rule (inputs x (y 3) x) (output (y 1))))
(example 0 0)
"""
    diags = validate(parse_problem(text))
    assert any("E.pair" in d and "input2" in d for d in diags)


# -- regex semantics against an independent substring matcher


def language_matcher(t, s: str) -> bool:
    @lru_cache(maxsize=None)
    def m(u, i, j):  # does u match s[i:j]
        op = u.production.operator
        kids = u.children
        if op in ("c0", "c1"):
            return j == i + 1 and s[i] == op[1]
        if op == "eps":
            return i == j
        if op == "empty":
            return False
        if op == "union":
            return m(kids[0], i, j) or m(kids[1], i, j)
        if op == "concat":
            return any(m(kids[0], i, k) and m(kids[1], k, j) for k in range(i, j + 1))
        if op == "star":
            return i == j or any(m(kids[0], i, k) and m(u, k, j) for k in range(i + 1, j + 1))
        if op == "neg":
            return not m(kids[0], i, j)
        raise AssertionError(op)

    return m(t.children[0], 0, len(s))


STRINGS = ["".join(c) for n in range(5) for c in itertools.product("01", repeat=n)]


@settings(max_examples=200, deadline=None)
@given(k=st.integers(0, 10**6), s=st.sampled_from(STRINGS))
def test_matrix_acceptance_matches_language(k, s):
    terms = complete_terms("regex_matrix", 7)
    t = terms[k % len(terms)]
    assert eval_term(t, CharMatrices(s, "01")) == language_matcher(t, s)


def test_x_is_identity():
    assert eval_expr(X, 5) == 5
