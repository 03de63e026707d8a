"""Top-down enumeration with abstraction-based pruning."""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum

from monoprune.abstract import TOP_HOLES, AbstractSemantics, HoleTable, Interval, member
from monoprune.chc import DEFAULT_FUEL, Problem, check_examples
from monoprune.gfa import GfaConfig, example_inputs, solve_holes
from monoprune.grammar import Hole, Node, Term, expand_unchecked, leftmost_hole
from monoprune.orders import MonotonicityProfile

log = logging.getLogger(__name__)


class Mode(str, Enum):
    OFF = "off"
    TOP = "top"
    GFA = "gfa"

    @classmethod
    def parse(cls, text: str) -> Mode:
        aliases = {"topHoles": "top", "gfaHoles": "gfa"}
        return cls(aliases.get(text, text))


@dataclass
class SearchConfig:
    max_size: int = 25
    max_candidates: int = 1_000_000
    fuel: int = DEFAULT_FUEL
    mode: Mode = Mode.GFA
    priority: str = "size"  # or "depth"

    def __post_init__(self):
        self.mode = Mode.parse(self.mode) if isinstance(self.mode, str) else self.mode
        if self.max_size < 1:
            raise ValueError("max_size must be at least 1")
        if self.priority not in ("size", "depth"):
            raise ValueError(f"unknown priority {self.priority!r}")


@dataclass
class SearchStats:
    dequeued: int = 0
    pruned: int = 0
    complete_checked: int = 0
    max_size_reached: int = 0
    enqueued: int = 0
    budget_exceeded: bool = False
    elapsed_ms: float = 0.0

    def deterministic(self) -> dict:
        """Counters only; wall-clock time is left out so reruns compare equal."""
        d = asdict(self)
        d.pop("elapsed_ms")
        return d


@dataclass
class SearchResult:
    program: Term | None
    stats: SearchStats
    mode: Mode
    root_intervals: list[Interval] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.program is not None


class Pruner:
    """Decides whether a (partial) program can be discarded for the examples."""

    def __init__(self, sem: AbstractSemantics, holes: HoleTable, fuel: int = DEFAULT_FUEL, examples=None):
        self.sem = sem
        self.holes = holes
        self.fuel = fuel
        examples = sem.problem.examples if examples is None else examples
        nt = sem.problem.grammar.start
        self.inputs = [sem.input_point(nt, ex.input) for ex in examples]
        self.outputs = [ex.output for ex in examples]

    def __call__(self, t: Term) -> bool:
        for x, o in zip(self.inputs, self.outputs):
            if not member(o, self.sem.eval(t, x, self.holes, concrete=True, fuel=self.fuel, lazy=True)):
                return True
        return False


def prune(t: Term, problem: Problem, sem: AbstractSemantics, holes: HoleTable = TOP_HOLES) -> bool:
    """True iff some example output lies outside the abstract value of ``t``."""
    return Pruner(sem, holes)(t)


def prepare(
    problem: Problem,
    mode: Mode,
    profile: MonotonicityProfile | None = None,
    table: HoleTable | None = None,
    gfa: GfaConfig | None = None,
) -> Pruner | None:
    """Build the pruning test for ``mode`` (``None`` when pruning is off)."""
    mode = Mode.parse(mode) if isinstance(mode, str) else mode
    if mode is Mode.OFF:
        return None
    if profile is None:
        from monoprune.orders import synthesize_orders

        _, profile = synthesize_orders(problem)
    sem = AbstractSemantics(problem, profile)
    if mode is Mode.TOP:
        return Pruner(sem, TOP_HOLES)
    if table is None:
        table = solve_holes(sem, example_inputs(sem), cfg=gfa).table
    return Pruner(sem, table)


def search(
    problem: Problem,
    cfg: SearchConfig | None = None,
    profile: MonotonicityProfile | None = None,
    table: HoleTable | None = None,
    pruner: Pruner | None = None,
) -> SearchResult:
    """Best-first enumeration from the start hole; returns the first consistent program."""
    cfg = cfg or SearchConfig()
    problem.compile()
    start = time.perf_counter()
    if pruner is None and cfg.mode is not Mode.OFF:
        pruner = prepare(problem, cfg.mode, profile, table)
    stats = SearchStats()
    g = problem.grammar
    examples = problem.examples
    counter = itertools.count()
    key = (lambda t: t.size) if cfg.priority == "size" else (lambda t: t.depth)
    root = Hole(g.start)
    queue: list = [(key(root), next(counter), root)]
    stats.enqueued = 1
    found = None
    while queue:
        if stats.dequeued >= cfg.max_candidates:
            stats.budget_exceeded = True
            break
        _, _, t = heapq.heappop(queue)
        stats.dequeued += 1
        if t.size > stats.max_size_reached:
            stats.max_size_reached = t.size
        if t.holes == 0:
            stats.complete_checked += 1
            if check_examples(t, examples, cfg.fuel):
                found = t
                break
            continue
        _, nt = leftmost_hole(t)
        grow = t.size
        for p in g.by_lhs[nt]:
            if grow + p.arity > cfg.max_size:
                continue
            child = expand_unchecked(t, p)
            if pruner is not None and pruner(child):
                stats.pruned += 1
                continue
            heapq.heappush(queue, (key(child), next(counter), child))
            stats.enqueued += 1
    stats.elapsed_ms = (time.perf_counter() - start) * 1000
    return SearchResult(found, stats, cfg.mode)


def compare_runs(
    problem: Problem,
    cfgs: list[SearchConfig],
    profile: MonotonicityProfile | None = None,
) -> list[SearchResult]:
    """Run ``search`` once per config; the analysis is shared between modes."""
    if profile is None and any(c.mode is not Mode.OFF for c in cfgs):
        from monoprune.orders import synthesize_orders

        _, profile = synthesize_orders(problem)
    table = None
    out = []
    for c in cfgs:
        pruner = None
        if c.mode is not Mode.OFF:
            if c.mode is Mode.GFA and table is None:
                sem = AbstractSemantics(problem, profile)
                table = solve_holes(sem, example_inputs(sem)).table
            pruner = prepare(problem, c.mode, profile, table)
        out.append(search(problem, c, pruner=pruner))
    return out


def derivation(t: Term) -> list[Term]:
    """The partial programs from the start hole down to ``t``, one expansion at a time."""
    chain = [t]
    cur = t
    while not isinstance(cur, Hole):
        cur = _unexpand_last(cur)
        chain.append(cur)
    chain.reverse()
    return chain


def _unexpand_last(t: Node) -> Term:
    """Undo the most recent leftmost-hole expansion (the last-filled node in pre-order)."""
    # the last expansion filled the deepest-rightmost node whose children are all holes
    # and which precedes every remaining hole in pre-order
    target = _last_leaf_node(t)
    return _replace_at(t, target, Hole(_node_at(t, target).production.lhs))


def _preorder_nodes(t: Term, path=()):
    yield path, t
    if isinstance(t, Node):
        for i, c in enumerate(t.children):
            yield from _preorder_nodes(c, path + (i,))


def _last_leaf_node(t: Term) -> tuple:
    # holes are filled left to right, so the latest expansion is the last node in
    # pre-order that comes before the first hole and has only holes as children
    last = None
    for path, u in _preorder_nodes(t):
        if isinstance(u, Hole):
            break
        if all(isinstance(c, Hole) for c in u.children):
            last = path
    if last is None:
        raise ValueError("no expandable node")
    return last


def _node_at(t: Term, path: tuple) -> Term:
    for i in path:
        t = t.children[i]
    return t


def _replace_at(t: Term, path: tuple, repl: Term) -> Term:
    if not path:
        return repl
    i = path[0]
    kids = t.children
    return Node(t.production, kids[:i] + (_replace_at(kids[i], path[1:], repl),) + kids[i + 1 :])
