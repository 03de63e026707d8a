"""Interval abstract domain and the abstract semantics derived from a profile.

Each rule expression is lifted in one of three ways:

* ``endpoint``: every argument has a direction, so the expression is
  evaluated once on the lower endpoints chosen by the directions and once
  on the upper ones;
* ``joined``: the undirected arguments have small finite sorts, so each
  concrete instantiation is endpoint-evaluated and the results joined;
* ``top``: anything else yields the top interval of the output sort.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable

from monoprune.chc import (
    DEFAULT_FUEL,
    EvalError,
    Expr,
    FuelExhausted,
    Indeterminate,
    Problem,
    compile_expr,
    eval_term,
    expr_env,
    refs,
    typecheck,
)
from monoprune.grammar import Hole, Node, Term
from monoprune.orders import AtomicOrder, Direction, MonotonicityProfile, OrderAssignment, TuplePointwise
from monoprune.values import BVT, BoolT, SemType, finite_size, is_tuple_sort, matrix_dim, matrix_path


class OrderMismatch(TypeError):
    pass


class DirectionMissing(ValueError):
    pass


class InfiniteNonMonotoneArg(ValueError):
    pass


class Interval:
    """``[lo, hi]`` under ``order``; :data:`EMPTY` is the bottom element."""

    __slots__ = ("lo", "hi", "order")

    def __init__(self, lo, hi, order: AtomicOrder):
        self.lo = lo
        self.hi = hi
        self.order = order

    @property
    def empty(self) -> bool:
        return False

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __eq__(self, other):
        return isinstance(other, Interval) and not other.empty and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


class _Empty(Interval):
    __slots__ = ()

    def __init__(self):
        super().__init__(None, None, None)

    @property
    def empty(self) -> bool:
        return True

    @property
    def is_point(self) -> bool:
        return False

    def __eq__(self, other):
        return isinstance(other, _Empty)

    def __hash__(self):
        return hash("empty")

    def __repr__(self):
        return "EMPTY"


EMPTY = _Empty()


def point(v, order: AtomicOrder) -> Interval:
    return Interval(v, v, order)


def top(order: AtomicOrder, dim: int | None = None) -> Interval:
    return Interval(order.bottom(dim), order.top(dim), order)


def _check_orders(a: Interval, b: Interval):
    if a.order is not b.order and type(a.order) is not type(b.order):
        raise OrderMismatch(f"{a.order!r} vs {b.order!r}")


def interval_join(a: Interval, b: Interval) -> Interval:
    if a.empty:
        return b
    if b.empty:
        return a
    _check_orders(a, b)
    o = a.order
    return Interval(o.meet(a.lo, b.lo), o.join(a.hi, b.hi), o)


def interval_meet(a: Interval, b: Interval) -> Interval:
    if a.empty or b.empty:
        return EMPTY
    _check_orders(a, b)
    o = a.order
    lo, hi = o.join(a.lo, b.lo), o.meet(a.hi, b.hi)
    return Interval(lo, hi, o) if o.leq(lo, hi) else EMPTY


def interval_leq(a: Interval, b: Interval) -> bool:
    if a.empty:
        return True
    if b.empty:
        return False
    _check_orders(a, b)
    o = a.order
    return o.leq(b.lo, a.lo) and o.leq(a.hi, b.hi)


def member(v, a: Interval) -> bool:
    if a.empty:
        return False
    return a.order.leq(a.lo, v) and a.order.leq(v, a.hi)


def finite_values(sort: SemType, interval: Interval, limit: int) -> list | None:
    """Members of ``interval`` when ``sort`` is small and finite, else ``None``."""
    n = finite_size(sort)
    if n is None or n > limit or has_matrix(sort):
        return None
    return [v for v in all_values(sort) if member(v, interval)]


def has_matrix(sort: SemType) -> bool:
    return matrix_path(sort) is not None


def all_values(sort: SemType) -> list:
    if isinstance(sort, BoolT):
        return [False, True]
    if isinstance(sort, BVT):
        return list(range(1 << sort.width))
    if is_tuple_sort(sort):
        return [tuple(v) for v in itertools.product(*(all_values(c) for c in sort.components))]
    raise InfiniteNonMonotoneArg(f"sort {sort} is not finite")


# ---------------------------------------------------------------------------
# lifted expressions


def _select(dirs, lower: bool):
    """Index of the endpoint (0 = lo, 1 = hi) to use per argument."""
    out = []
    for d in dirs:
        if d is Direction.INC:
            out.append(0 if lower else 1)
        elif d is Direction.DEC:
            out.append(1 if lower else 0)
        else:
            out.append(0)
    return tuple(out)


@dataclass
class AbsExpr:
    expr: Expr
    kind: str  # "endpoint" | "joined" | "top"
    fn: Callable
    dirs: tuple[Direction, ...]
    out_order: AtomicOrder
    finite: tuple[tuple[int, SemType], ...] = ()
    used: frozenset = frozenset()

    def __post_init__(self):
        self._lo_sel = _select(self.dirs, True)
        self._hi_sel = _select(self.dirs, False)
        self._used = tuple(sorted(self.used | {0}))  # the input also carries matrix dimensions

    def apply(self, args: list[Interval | None], dim, joined_limit: int = 64) -> Interval:
        for k in self._used:
            if args[k] is EMPTY:
                return EMPTY
        kind = self.kind
        if kind == "endpoint":
            return self._endpoint(args, dim)
        if kind == "top":
            return top(self.out_order, dim)
        choices = []
        total = 1
        for k, sort in self.finite:
            vals = finite_values(sort, args[k], joined_limit)
            if vals is None:
                return top(self.out_order, dim)
            if not vals:
                return EMPTY
            total *= len(vals)
            if total > joined_limit:
                return top(self.out_order, dim)
            choices.append(vals)
        result = EMPTY
        args = list(args)
        positions = [k for k, _ in self.finite]
        for combo in itertools.product(*choices):
            for k, v in zip(positions, combo):
                args[k] = Interval(v, v, args[k].order)
            result = interval_join(result, self._endpoint(args, dim))
        return result

    def _endpoint(self, args, dim) -> Interval:
        o = self.out_order
        fn = self.fn
        n = len(args)
        used = self._used
        point = True
        for k in used:
            a = args[k]
            if a.lo is not a.hi and a.lo != a.hi:
                point = False
                break
        lo_args = [None] * n
        if point:
            for k in used:
                lo_args[k] = args[k].lo
            try:
                v = fn(lo_args[0], lo_args[1:], None)
                return Interval(v, v, o)
            except Indeterminate:
                pass
        hi_args = [None] * n
        for k in used:
            a = args[k]
            lo_args[k] = a.lo if self._lo_sel[k] == 0 else a.hi
            hi_args[k] = a.lo if self._hi_sel[k] == 0 else a.hi
        try:
            lo = fn(lo_args[0], lo_args[1:], None)
        except Indeterminate:
            lo = o.bottom(dim)
        try:
            hi = fn(hi_args[0], hi_args[1:], None)
        except Indeterminate:
            hi = o.top(dim)
        if not o.leq(lo, hi):
            return top(o, dim)
        return Interval(lo, hi, o)


def endpoint_apply(e: Expr, dirs, args: list[Interval], env, omega: OrderAssignment, dim=None) -> Interval:
    """Endpoint extension of a monotone expression (no ``none`` directions)."""
    if any(d is Direction.NONE for d in dirs):
        raise DirectionMissing("endpoint extension needs a direction for every argument")
    ae = AbsExpr(e, "endpoint", compile_expr(e, env), tuple(dirs), omega.order_for(typecheck(e, env)), used=refs(e))
    return ae.apply(list(args), dim)


def joined_apply(
    e: Expr, dirs, args: list[Interval], env, omega: OrderAssignment, dim=None, limit: int = 64
) -> Interval:
    """Join of endpoint extensions over every value of the undirected finite arguments."""
    sorts = [env.input_type, *env.child_types]
    finite = []
    for k, d in enumerate(dirs):
        if d is Direction.NONE:
            if finite_size(sorts[k]) is None or has_matrix(sorts[k]):
                raise InfiniteNonMonotoneArg(f"argument {k} of {e} has infinite sort {sorts[k]}")
            finite.append((k, sorts[k]))
    ae = AbsExpr(
        e, "joined", compile_expr(e, env), tuple(dirs), omega.order_for(typecheck(e, env)), tuple(finite), refs(e)
    )
    return ae.apply(list(args), dim, limit)


@dataclass
class AbstractRule:
    rule: Any
    guard: AbsExpr | None
    inputs: tuple[AbsExpr, ...]
    output: AbsExpr

    def __post_init__(self):
        self.out_refs = frozenset(k for k in self.output.used if k > 0)
        self.in_refs = tuple(frozenset(k for k in a.used if k > 0) for a in self.inputs)
        self._need: dict[int, frozenset] = {}

    def need_for(self, mask: int) -> frozenset:
        """:meth:`needed` with independent children given as a bitmask."""
        hit = self._need.get(mask)
        if hit is None:
            hit = self._need[mask] = self.needed(lambda i: mask >> i & 1)
        return hit

    def needed(self, independent) -> frozenset:
        """Children whose values the output depends on, given input-independent children."""
        need = set(self.out_refs)
        for i in range(len(self.inputs), 0, -1):
            if i in need and not independent(i - 1):
                need |= self.in_refs[i - 1]
        return frozenset(need)

    def kinds(self) -> dict[str, str]:
        out = {}
        if self.guard is not None:
            out["guard"] = self.guard.kind
        for i, a in enumerate(self.inputs):
            out[f"input{i + 1}"] = a.kind
        out["output"] = self.output.kind
        return out


def _lift(problem: Problem, p, ri: int, key: str, e: Expr, profile: MonotonicityProfile, limit: int, bv_width: int):
    env = expr_env(problem.grammar, p, key)
    omega = profile.omega
    out_order = omega.order_for(typecheck(e, env))
    n = 1 + p.arity
    entry = profile.entry(p.name, ri, key)
    dirs = entry.directions if entry is not None else tuple([Direction.NONE] * n)
    fn = compile_expr(e, env)
    used = refs(e)
    if p.recursive:
        return AbsExpr(e, "top", fn, dirs, out_order, used=used)
    if all(d.monotone for d in dirs):
        return AbsExpr(e, "endpoint", fn, dirs, out_order, used=used)
    sorts = [env.input_type, *env.child_types]
    finite = []
    for k, d in enumerate(dirs):
        if d is Direction.NONE:
            size = finite_size(sorts[k])
            small_bv = all(b.width <= bv_width for b in _bvs(sorts[k]))
            if size is None or size > limit or has_matrix(sorts[k]) or not small_bv:
                return AbsExpr(e, "top", fn, dirs, out_order, used=used)
            finite.append((k, sorts[k]))
    return AbsExpr(e, "joined", fn, dirs, out_order, tuple(finite), used)


def _bvs(sort):
    if is_tuple_sort(sort):
        for c in sort.components:
            yield from _bvs(c)
    elif isinstance(sort, BVT):
        yield sort


def compile_abstract(
    problem: Problem, profile: MonotonicityProfile, joined_limit: int = 64, bv_width: int = 4
) -> dict[str, list[AbstractRule]]:
    """Production name → abstract rules, in rule order."""
    problem.compile()
    out = {}
    for p in problem.grammar.productions:
        rules = []
        for ri, rule in enumerate(p.rules):
            lift = lambda key, e: _lift(problem, p, ri, key, e, profile, joined_limit, bv_width)  # noqa: E731
            rules.append(
                AbstractRule(
                    rule,
                    lift("guard", rule.guard) if rule.guard is not None else None,
                    tuple(lift(f"input{i + 1}", e) for i, e in enumerate(rule.child_inputs)),
                    lift("output", rule.output),
                )
            )
        out[p.name] = rules
    return out


# ---------------------------------------------------------------------------
# abstract evaluation of partial programs


class HoleTable:
    """Hole abstractions keyed by nonterminal and input interval."""

    def __init__(self):
        self.entries: dict[str, dict[Interval, Interval]] = {}
        self.version = 0

    def set(self, nonterminal: str, key: Interval, value: Interval):
        self.entries.setdefault(nonterminal, {})[key] = value
        self.version += 1

    def get(self, nonterminal: str, x: Interval) -> Interval | None:
        """Exact key first, then the first stored key containing ``x``."""
        table = self.entries.get(nonterminal)
        if not table:
            return None
        hit = table.get(x)
        if hit is not None:
            return hit
        for key, value in table.items():
            if interval_leq(x, key):
                return value
        return None

    def items(self):
        for nt, table in self.entries.items():
            for key, value in table.items():
                yield nt, key, value

    def __len__(self):
        return sum(len(t) for t in self.entries.values())


TOP_HOLES = HoleTable()


class AbstractSemantics:
    """Interval semantics of a problem under a monotonicity profile."""

    def __init__(self, problem: Problem, profile: MonotonicityProfile, joined_limit: int = 64):
        self.problem = problem.compile()
        self.profile = profile
        self.omega = profile.omega
        self.joined_limit = joined_limit
        self.rules = compile_abstract(problem, profile, joined_limit)
        g = problem.grammar
        self.in_order = {n: self.omega.order_for(d.input_type) for n, d in g.decls.items()}
        self.out_order = {n: self.omega.order_for(d.output_type) for n, d in g.decls.items()}
        self._paths = {n: matrix_path(d.input_type) for n, d in g.decls.items()}
        self._by_index = [self.rules[p.name] for p in g.productions]
        self._memo: dict = {}
        self._tops: dict = {}
        self._indep: dict = {}
        self.memo_limit = 200_000

    def dim_of(self, nonterminal: str, x: Interval):
        path = self._paths[nonterminal]
        if path is None or x.empty:
            return None
        return matrix_dim(x.lo, path)

    def top(self, nonterminal: str, dim=None) -> Interval:
        return top(self.out_order[nonterminal], dim)

    def input_point(self, nonterminal: str, v) -> Interval:
        return Interval(v, v, self.in_order[nonterminal])

    def hole(self, nonterminal: str, x: Interval, holes: HoleTable, dim) -> Interval:
        hit = holes.get(nonterminal, x)
        return hit if hit is not None else self.top(nonterminal, dim)

    def _indep_map(self, holes: HoleTable) -> dict[str, bool]:
        hit = self._indep.get(id(holes))
        if hit is None or hit[0] is not holes or hit[1] != holes.version:
            m = {n: self.hole_independent(n, holes) for n in self.problem.grammar.decls}
            hit = self._indep[id(holes)] = (holes, holes.version, m)
        return hit[2]

    def hole_independent(self, nonterminal: str, holes: HoleTable) -> bool:
        """True when every lookup of ``nonterminal`` in ``holes`` yields top."""
        table = holes.entries.get(nonterminal, {})
        return all(v == self.top(nonterminal, self.dim_of(nonterminal, k)) for k, v in table.items())

    def eval(
        self,
        t: Term,
        x: Interval,
        holes: HoleTable = TOP_HOLES,
        concrete: bool = False,
        fuel: int = DEFAULT_FUEL,
        dim=None,
        lazy: bool = False,
    ) -> Interval:
        """Abstract semantics of the partial program ``t`` on input interval ``x``.

        With ``concrete``, complete subterms on point inputs are run by the
        concrete evaluator instead (a failed run gives top).  With ``lazy``,
        subterms whose value cannot matter are not evaluated.
        """
        if x.empty:
            return EMPTY
        if dim is None:
            nt = t.nonterminal if isinstance(t, Hole) else t.production.lhs
            dim = self.dim_of(nt, x)
        return _Run(self, holes, concrete, fuel, lazy, dim).ev(t, x)

    def top_cached(self, nonterminal: str, dim) -> Interval:
        key = (nonterminal, dim)
        hit = self._tops.get(key)
        if hit is None:
            hit = self._tops[key] = self.top(nonterminal, dim)
        return hit

    def _concrete(self, t: Node, v, fuel: int, dim) -> Interval:
        key = (t, v, fuel)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        try:
            out = eval_term(t, v, fuel)
            hit = Interval(out, out, self.out_order[t.production.lhs])
        except (FuelExhausted, EvalError, Indeterminate, RecursionError):
            hit = self.top(t.production.lhs, dim)
        if len(self._memo) >= self.memo_limit:
            self._memo.clear()
        self._memo[key] = hit
        return hit

    def apply_rules(
        self, p, x: Interval, dim, child: Callable[[int, Interval | None], Interval], independent=None
    ) -> Interval:
        """Join over the rules of ``p``; ``child(i, xi)`` abstracts child ``i`` on ``xi``.

        With ``independent`` (a predicate on child positions), children whose
        abstraction ignores its input get ``xi = None``, and children nothing
        depends on are skipped.  Skipping only loses the empty-child check, so
        the result stays sound.
        """
        result = EMPTY
        n = p.arity
        limit = self.joined_limit
        for ar in self._by_index[p.index]:
            definite = True
            if ar.guard is not None:
                g = ar.guard.apply([x], dim, limit)
                if g.empty or not g.hi:
                    continue  # guard definitely false
                definite = bool(g.lo)
            need = None if independent is None else ar.needed(independent)
            args: list = [x] + [None] * n
            dead = False
            for i in range(n):
                if need is not None and i + 1 not in need:
                    continue
                if independent is not None and independent(i):
                    yi = child(i, None)
                else:
                    xi = ar.inputs[i].apply(args, dim, limit)
                    yi = EMPTY if xi.empty else child(i, xi)
                if yi.empty:
                    dead = True
                    break
                args[i + 1] = yi
            if not dead:
                result = interval_join(result, ar.output.apply(args, dim, limit))
            if definite:
                break
        return result


class _Run:
    """One abstract evaluation with fixed holes, options and matrix dimension."""

    __slots__ = ("sem", "holes", "concrete", "fuel", "lazy", "dim", "indep")

    def __init__(self, sem: AbstractSemantics, holes: HoleTable, concrete: bool, fuel: int, lazy: bool, dim):
        self.sem = sem
        self.holes = holes
        self.concrete = concrete
        self.fuel = fuel
        self.lazy = lazy
        self.dim = dim
        self.indep = sem._indep_map(holes) if lazy else None

    def ev(self, t: Term, x: Interval) -> Interval:
        if x is EMPTY:
            return EMPTY
        sem = self.sem
        dim = self.dim
        if type(t) is Hole:
            return sem.hole(t.nonterminal, x, self.holes, dim)
        if self.concrete and t.holes == 0 and (x.lo is x.hi or x.lo == x.hi):
            return sem._concrete(t, x.lo, self.fuel, dim)
        p = t.production
        kids = t.children
        n = len(kids)
        mask = 0
        if self.lazy:
            indep = self.indep
            for i in range(n):
                c = kids[i]
                if type(c) is Hole and indep[c.nonterminal]:
                    mask |= 1 << i
        limit = sem.joined_limit
        result = EMPTY
        for ar in sem._by_index[p.index]:
            definite = True
            if ar.guard is not None:
                g = ar.guard.apply([x], dim, limit)
                if g is EMPTY or not g.hi:
                    continue  # guard definitely false
                definite = bool(g.lo)
            need = ar.need_for(mask) if self.lazy else None
            args: list = [x] + [None] * n
            dead = False
            for i in range(n):
                if need is not None and i + 1 not in need:
                    continue
                c = kids[i]
                if mask >> i & 1:
                    yi = sem.top_cached(c.nonterminal, dim)
                else:
                    xi = ar.inputs[i].apply(args, dim, limit)
                    yi = EMPTY if xi is EMPTY else self.ev(c, xi)
                if yi is EMPTY:
                    dead = True
                    break
                args[i + 1] = yi
            if not dead:
                out = ar.output.apply(args, dim, limit)
                result = out if result is EMPTY else interval_join(result, out)
            if definite:
                break
        return result


def abstract_eval(sem: AbstractSemantics, t: Term, x: Interval, holes: HoleTable = TOP_HOLES) -> Interval:
    return sem.eval(t, x, holes)


def pointwise_tuple(*orders: AtomicOrder) -> TuplePointwise:
    return TuplePointwise(tuple(orders))
