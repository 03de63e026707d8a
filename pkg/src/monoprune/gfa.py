"""Grammar-flow analysis: over-approximate every hole by a fixpoint over the grammar.

Unknowns are pairs ``(N, key)`` where ``key`` is an input interval for
nonterminal ``N``.  The analysis starts from the example inputs at the start
symbol, discovers further unknowns as child inputs are computed, and solves
the resulting equations by Kleene iteration with threshold widening followed
by a few narrowing rounds.  The result is checked once more as a post-fixpoint;
any entry that fails the check is reset to top.
"""

from __future__ import annotations

import bisect
import time
from dataclasses import dataclass, field

from monoprune.abstract import (
    EMPTY,
    AbstractSemantics,
    HoleTable,
    Interval,
    interval_join,
    interval_leq,
    interval_meet,
)
from monoprune.orders import AtomicOrder, BvUnsignedLeq, IntLeq, TuplePointwise
from monoprune.values import INF, NEG_INF


@dataclass
class GfaConfig:
    widen_delay: int = 16
    narrow_rounds: int = 4
    max_keys: int = 16
    max_passes: int = 10_000


@dataclass
class GfaStats:
    passes: int = 0
    unknowns: int = 0
    widened: int = 0
    reset: int = 0
    elapsed_ms: float = 0.0


class _Unknown:
    __slots__ = ("nonterminal", "key", "value", "updates")

    def __init__(self, nonterminal: str, key: Interval):
        self.nonterminal = nonterminal
        self.key = key
        self.value = EMPTY
        self.updates = 0


def _widen_bound(order: AtomicOrder, old, new, lower: bool, thresholds: list):
    if isinstance(order, TuplePointwise):
        return tuple(_widen_bound(o, a, b, lower, thresholds) for o, a, b in zip(order.items, old, new))
    if isinstance(order, IntLeq):
        if lower and new < old:
            return thresholds[bisect.bisect_right(thresholds, new) - 1]
        if not lower and new > old:
            return thresholds[bisect.bisect_left(thresholds, new)]
        return old if (new >= old if lower else new <= old) else new
    if isinstance(order, BvUnsignedLeq):
        if lower and new < old:
            return order.bottom()
        if not lower and new > old:
            return order.top()
    return order.meet(old, new) if lower else order.join(old, new)


def widen(old: Interval, new: Interval, thresholds: list) -> Interval:
    """Threshold widening; finite-height components are simply joined."""
    if old.empty:
        return new
    if new.empty:
        return old
    joined = interval_join(old, new)
    o = old.order
    return Interval(
        _widen_bound(o, old.lo, joined.lo, True, thresholds),
        _widen_bound(o, old.hi, joined.hi, False, thresholds),
        o,
    )


def thresholds_for(constants) -> list:
    ts = {NEG_INF, INF, 0}
    for c in constants:
        ts.update((c, -c))
    return sorted(ts)


@dataclass
class GfaResult:
    table: HoleTable
    stats: GfaStats
    roots: list[Interval] = field(default_factory=list)


class _Solver:
    def __init__(self, sem: AbstractSemantics, cfg: GfaConfig):
        self.sem = sem
        self.cfg = cfg
        self.thresholds = thresholds_for(sem.problem.int_constants())
        self.unknowns: dict[str, list[_Unknown]] = {n: [] for n in sem.problem.grammar.decls}
        self.order: list[_Unknown] = []
        self.changed = False
        self.frozen = False
        self.stats = GfaStats()

    def find(self, nonterminal: str, x: Interval) -> _Unknown | None:
        group = self.unknowns[nonterminal]
        for u in group:
            if u.key == x:
                return u
        for u in group:
            if interval_leq(x, u.key):
                return u
        return None

    def lookup(self, nonterminal: str, x: Interval, dim) -> Interval:
        u = self.find(nonterminal, x)
        if u is not None:
            return u.value
        if self.frozen:
            return self.sem.top(nonterminal, dim)
        group = self.unknowns[nonterminal]
        self.changed = True
        if len(group) < self.cfg.max_keys:
            u = self.add(nonterminal, x)
        else:
            u = group[-1]  # the last key absorbs overflow inputs
            u.key = widen(u.key, x, self.thresholds)
        return u.value

    def add(self, nonterminal: str, x: Interval) -> _Unknown:
        u = _Unknown(nonterminal, x)
        self.unknowns[nonterminal].append(u)
        self.order.append(u)
        return u

    def transfer(self, u: _Unknown) -> Interval:
        sem = self.sem
        x = u.key
        dim = sem.dim_of(u.nonterminal, x)
        out = EMPTY
        for p in sem.problem.grammar.by_lhs[u.nonterminal]:
            kids = p.children
            out = interval_join(
                out, sem.apply_rules(p, x, dim, lambda i, xi: self.lookup(kids[i], xi, dim))
            )
        return out

    def ascend(self):
        while True:
            self.stats.passes += 1
            if self.stats.passes > self.cfg.max_passes:
                raise RuntimeError("grammar-flow analysis did not converge")
            self.changed = False
            for u in list(self.order):
                new = interval_join(u.value, self.transfer(u))
                if new == u.value:
                    continue
                u.updates += 1
                if u.updates > self.cfg.widen_delay:
                    new = widen(u.value, new, self.thresholds)
                    self.stats.widened += 1
                u.value = new
                self.changed = True
            if not self.changed:
                return

    def narrow(self):
        self.frozen = True
        for _ in range(self.cfg.narrow_rounds):
            moved = False
            for u in self.order:
                new = interval_meet(u.value, self.transfer(u))
                if new != u.value:
                    u.value = new
                    moved = True
            if not moved:
                break

    def certify(self):
        """Every entry must over-approximate its own transfer; otherwise reset to top."""
        self.frozen = True
        bad = True
        while bad:
            bad = False
            for u in self.order:
                if not interval_leq(self.transfer(u), u.value):
                    dim = self.sem.dim_of(u.nonterminal, u.key)
                    u.value = self.sem.top(u.nonterminal, dim)
                    self.stats.reset += 1
                    bad = True

    def table(self) -> HoleTable:
        t = HoleTable()
        for u in self.order:
            t.set(u.nonterminal, u.key, u.value)
        return t


def solve_holes(
    sem: AbstractSemantics, inputs: list[Interval], nonterminal: str | None = None, cfg: GfaConfig | None = None
) -> GfaResult:
    """Hole table over-approximating every nonterminal reachable from ``inputs``."""
    start = time.perf_counter()
    cfg = cfg or GfaConfig()
    s = _Solver(sem, cfg)
    nt = nonterminal or sem.problem.grammar.start
    roots = []
    for x in inputs:
        if s.find(nt, x) is None or s.find(nt, x).key != x:
            s.add(nt, x)
    s.ascend()
    s.narrow()
    s.certify()
    for x in inputs:
        roots.append(s.find(nt, x).value)
    s.stats.unknowns = len(s.order)
    s.stats.elapsed_ms = (time.perf_counter() - start) * 1000
    return GfaResult(s.table(), s.stats, roots)


def gfa_transfer(sem: AbstractSemantics, table: HoleTable, nonterminal: str, x: Interval) -> Interval:
    """One application of the grammar equations for ``nonterminal`` on ``x``."""
    dim = sem.dim_of(nonterminal, x)
    out = EMPTY
    for p in sem.problem.grammar.by_lhs[nonterminal]:
        kids = p.children
        out = interval_join(out, sem.apply_rules(p, x, dim, lambda i, xi: sem.hole(kids[i], xi, table, dim)))
    return out


def certify(sem: AbstractSemantics, table: HoleTable) -> bool:
    """True when ``table`` is a post-fixpoint of the grammar equations."""
    return all(interval_leq(gfa_transfer(sem, table, nt, key), value) for nt, key, value in table.items())


def example_inputs(sem: AbstractSemantics) -> list[Interval]:
    nt = sem.problem.grammar.start
    return [sem.input_point(nt, ex.input) for ex in sem.problem.examples]
