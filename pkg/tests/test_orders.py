from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import problem, profile
from monoprune.chc import Expr, TypeEnv, child
from monoprune.orders import (
    BoolImplies,
    BvBitwise,
    BvUnsignedLeq,
    Direction,
    IntLeq,
    MatrixEntrywise,
    OrderAssignment,
    SortMismatch,
    TuplePointwise,
    analyze,
    check_monotone,
    default_candidates,
    synthesize_orders,
)
from monoprune.values import BVT, BoolMatrix, BoolT, IntT

ints = st.integers(-20, 20) | st.sampled_from([float("inf"), float("-inf")])
bv4 = st.integers(0, 15)


@st.composite
def mats(draw):
    n = 3
    return BoolMatrix(tuple(draw(st.integers(0, 7)) & ~((1 << i) - 1) for i in range(n)))


ORDERS = [
    (IntLeq(), ints),
    (BoolImplies(), st.booleans()),
    (BvBitwise(4), bv4),
    (BvUnsignedLeq(4), bv4),
    (MatrixEntrywise(3), mats()),
    (TuplePointwise((IntLeq(), BoolImplies())), st.tuples(ints, st.booleans())),
]


@pytest.mark.parametrize("order,values", ORDERS, ids=lambda o: getattr(o, "name", ""))
@given(data=st.data())
def test_lattice_axioms(order, values, data):
    a, b, c = data.draw(values), data.draw(values), data.draw(values)
    leq = order.leq
    assert leq(a, a)
    if leq(a, b) and leq(b, a):
        assert a == b
    if leq(a, b) and leq(b, c):
        assert leq(a, c)
    m, j = order.meet(a, b), order.join(a, b)
    assert leq(m, a) and leq(m, b) and leq(a, j) and leq(b, j)
    if leq(c, a) and leq(c, b):
        assert leq(c, m)
    if leq(a, c) and leq(b, c):
        assert leq(j, c)
    assert leq(order.bottom(3), a) and leq(a, order.top(3))


def test_assignment_validation():
    assert OrderAssignment.of({"bv8": "bvUnsignedLeq"}).name_for("bv8") == "bvUnsignedLeq"
    assert OrderAssignment.of().name_for("bv8") == "bvBitwise"
    with pytest.raises(SortMismatch):
        OrderAssignment.of({"int": "bvBitwise"})


def env2(t):
    return TypeEnv(IntT(), (t, t), 2)


def test_sub_directions():
    omega = OrderAssignment.of()
    sub = Expr("-", (child(1), child(2)))
    env = env2(IntT())
    assert check_monotone(sub, 1, env, omega) is Direction.INC
    assert check_monotone(sub, 2, env, omega) is Direction.DEC
    assert check_monotone(sub, 0, env, omega) is Direction.BOTH


def test_negation_is_decreasing():
    omega = OrderAssignment.of()
    assert check_monotone(Expr("not", (child(1),)), 1, env2(BoolT()), omega) is Direction.DEC


def test_non_monotone_detected():
    omega = OrderAssignment.of()
    sq = Expr("*", (child(1), child(1)))
    assert check_monotone(sq, 1, env2(IntT()), omega) is Direction.NONE
    # bitwise or is not monotone for the unsigned order
    bvor = Expr("bvor", (child(1), child(2)))
    unsigned = OrderAssignment.of({"bv8": "bvUnsignedLeq"})
    assert check_monotone(bvor, 1, env2(BVT(8)), unsigned) is Direction.NONE
    assert check_monotone(bvor, 1, env2(BVT(8)), OrderAssignment.of()) is Direction.INC


def test_imp_profile_monotone_productions():
    mono = profile("imp_swap").monotone_productions()
    assert len(mono) == 9
    minus = [e for e in profile("imp_swap").entries if e.production == "E.minus" and e.expression == "output"]
    assert minus[0].directions == (Direction.BOTH, Direction.INC, Direction.DEC)


def test_bitvec_order_synthesis():
    p = problem("bitvec_toy")
    scores = {o.name_for("bv8"): analyze(p, o).score(p) for o in default_candidates(p)}
    assert scores == {"bvBitwise": 2, "bvUnsignedLeq": 1}
    omega, prof = synthesize_orders(p)
    assert omega.name_for("bv8") == "bvBitwise"
    assert prof.score(p) == 2


def test_order_hint_pins_candidates():
    hinted = replace(problem("bitvec_toy"), order_hints={"bv8": "bvUnsignedLeq"})
    assert [o.name_for("bv8") for o in default_candidates(hinted)] == ["bvUnsignedLeq"]


def test_regex_operators_monotone():
    prof = profile("regex_matrix")
    assert set(prof.monotone_productions()) == {p.name for p in problem("regex_matrix").grammar.productions}
    neg = [e for e in prof.entries if e.production == "R.neg" and e.expression == "output"][0]
    assert neg.directions[1] is Direction.DEC


def test_recursive_production_not_claimed():
    prof = profile("imp_loop")
    assert "S.while" not in prof.monotone_productions()
