import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DESK, complete_terms, precision_failures, problem, random_partial, semantics, tables
from monoprune.abstract import (
    EMPTY,
    TOP_HOLES,
    DirectionMissing,
    InfiniteNonMonotoneArg,
    Interval,
    endpoint_apply,
    interval_join,
    interval_leq,
    interval_meet,
    joined_apply,
    member,
    point,
)
from monoprune.chc import Expr, TypeEnv, child, eval_term
from monoprune.grammar import parse_term
from monoprune.orders import BvBitwise, Direction, IntLeq, OrderAssignment
from monoprune.search import prune
from monoprune.values import BVT, INF, NEG_INF, CharMatrices, IntT

D = Direction
INT = IntLeq()
OMEGA = OrderAssignment.of()
SUB = Expr("-", (child(1), child(2)))
ENV2 = TypeEnv(IntT(), (IntT(), IntT()), 2)


def iv(lo, hi, o=INT):
    return Interval(lo, hi, o)


def test_sub_endpoint_extension():
    got = endpoint_apply(SUB, (D.BOTH, D.INC, D.DEC), [iv(0, 0), iv(6, 7), iv(1, 2)], ENV2, OMEGA)
    assert (got.lo, got.hi) == (4, 6)


def test_endpoint_needs_directions():
    with pytest.raises(DirectionMissing):
        endpoint_apply(SUB, (D.BOTH, D.NONE, D.DEC), [iv(0, 0), iv(6, 7), iv(1, 2)], ENV2, OMEGA)


def test_infinite_endpoints():
    got = endpoint_apply(SUB, (D.BOTH, D.INC, D.DEC), [iv(0, 0), iv(0, INF), iv(NEG_INF, 3)], ENV2, OMEGA)
    assert (got.lo, got.hi) == (-3, INF)
    # inf - inf is indeterminate, so the affected bound widens
    got = endpoint_apply(SUB, (D.BOTH, D.INC, D.DEC), [iv(0, 0), iv(0, INF), iv(0, INF)], ENV2, OMEGA)
    assert (got.lo, got.hi) == (NEG_INF, INF)


def test_assignment_then_hole_excludes_swap():
    p = problem("imp_swap")
    sem = semantics("imp_swap")
    t = parse_term(p.grammar, "(seq (assignX zero) (assignY ?E))")
    out = sem.eval(t, sem.input_point("S", (4, 2)))
    assert (out.lo, out.hi) == ((0, NEG_INF), (0, INF))
    assert not member((2, 4), out)
    assert prune(t, p, sem)


def test_regex_zero_prefix_rejects_one():
    p = problem("regex_matrix")
    sem = semantics("regex_matrix")
    t = parse_term(p.grammar, "(accepts (concat c0 ?R))")
    out = sem.eval(t, sem.input_point("S", CharMatrices("1", "01")))
    assert (out.lo, out.hi) == (False, False)


def test_worked_examples_fast():
    start = time.perf_counter()
    test_sub_endpoint_extension()
    test_assignment_then_hole_excludes_swap()
    test_regex_zero_prefix_rejects_one()
    assert time.perf_counter() - start < 1.0


# -- interval lattice


bounds = st.integers(-5, 5)


@st.composite
def intervals(draw):
    if draw(st.integers(0, 9)) == 0:
        return EMPTY
    a, b = draw(bounds), draw(bounds)
    return iv(min(a, b), max(a, b))


@given(a=intervals(), b=intervals(), v=bounds)
def test_interval_lattice(a, b, v):
    j, m = interval_join(a, b), interval_meet(a, b)
    assert interval_leq(a, j) and interval_leq(b, j)
    assert interval_leq(m, a) and interval_leq(m, b)
    assert member(v, j) == (member(v, a) or member(v, b) or (not j.empty and j.lo <= v <= j.hi))
    assert member(v, m) == (member(v, a) and member(v, b))
    assert not member(v, EMPTY)


# -- endpoint soundness and precision on the bundled grammars


@pytest.mark.parametrize("name", DESK)
def test_endpoint_precision_sampled(name):
    assert precision_failures(name, boxes=40, seed=1) == []


XOR2 = Expr("bvxor", (child(1), child(2)))
ENV_BV = TypeEnv(BVT(2), (BVT(2), BVT(2)), 2)


@given(a=st.integers(0, 3), b=st.integers(0, 3), c=st.integers(0, 3), d=st.integers(0, 3))
def test_joined_is_sound_and_exact_on_finite_sorts(a, b, c, d):
    o = BvBitwise(2)
    y1 = Interval(a & b, a | b, o)
    y2 = Interval(c & d, c | d, o)
    got = joined_apply(XOR2, (D.BOTH, D.NONE, D.NONE), [point(0, o), y1, y2], ENV_BV, OMEGA)
    outs = [u ^ w for u in range(4) for w in range(4) if o.leq(y1.lo, u) and o.leq(u, y1.hi)
            and o.leq(y2.lo, w) and o.leq(w, y2.hi)]
    assert all(member(v, got) for v in outs)
    lo = hi = outs[0]
    for v in outs:
        lo, hi = lo & v, hi | v
    assert (got.lo, got.hi) == (lo, hi)


def test_joined_rejects_infinite_sort():
    with pytest.raises(InfiniteNonMonotoneArg):
        joined_apply(Expr("*", (child(1), child(2))), (D.BOTH, D.NONE, D.INC), [iv(0, 0)] * 3, ENV2, OMEGA)


# -- global soundness: abstract values of partial programs contain their completions


@settings(max_examples=150, deadline=None)
@given(name=st.sampled_from(DESK), seed=st.integers(0, 10**6), mode=st.sampled_from(["top", "gfa"]))
def test_partial_program_contains_completions(name, seed, mode):
    rng = random.Random(seed)
    p = problem(name)
    sem = semantics(name)
    holes = tables(name)[mode]
    full = rng.choice(complete_terms(name, 7))
    part = random_partial(rng, full)
    for ex in p.examples:
        try:
            v = eval_term(full, ex.input)
        except Exception:
            continue
        x = sem.input_point(p.grammar.start, ex.input)
        for concrete in (False, True):
            for lazy in (False, True):
                assert member(v, sem.eval(part, x, holes, concrete=concrete, lazy=lazy))


@settings(max_examples=100, deadline=None)
@given(name=st.sampled_from(DESK), seed=st.integers(0, 10**6))
def test_strict_evaluation_at_least_as_precise(name, seed):
    rng = random.Random(seed)
    p = problem(name)
    sem = semantics(name)
    part = random_partial(rng, rng.choice(complete_terms(name, 7)))
    for ex in p.examples:
        x = sem.input_point(p.grammar.start, ex.input)
        strict = sem.eval(part, x, TOP_HOLES)
        assert interval_leq(strict, sem.eval(part, x, TOP_HOLES, lazy=True))
        assert interval_leq(sem.eval(part, x, TOP_HOLES, concrete=True), strict)
