"""Atomic orders, brute-force monotonicity checking, and order synthesis."""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Iterable, Sequence

from monoprune import kernels
from monoprune.chc import Expr, Problem, TypeEnv, compile_expr, expr_env, refs, typecheck
from monoprune.values import (
    BVT,
    INF,
    NEG_INF,
    BoolMatrix,
    BoolT,
    IntT,
    MatT,
    SemType,
    StrT,
    TupleT,
    base_sorts,
    is_tuple_sort,
)


class SortMismatch(TypeError):
    pass


# ---------------------------------------------------------------------------
# atomic orders


class AtomicOrder:
    """A partial order on one sort with lattice operations.

    ``bottom``/``top`` take the matrix dimension for sorts whose size is only
    known from the input (``dim`` is ignored otherwise).
    """

    name = "?"

    def leq(self, a, b) -> bool:
        raise NotImplementedError

    def meet(self, a, b):
        raise NotImplementedError

    def join(self, a, b):
        raise NotImplementedError

    def bottom(self, dim: int | None = None):
        raise NotImplementedError

    def top(self, dim: int | None = None):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.__dict__.items()))))

    def __repr__(self):
        return self.name


class IntLeq(AtomicOrder):
    name = "intLeq"

    def leq(self, a, b):
        return a <= b

    def meet(self, a, b):
        return a if a <= b else b

    def join(self, a, b):
        return a if a >= b else b

    def bottom(self, dim=None):
        return NEG_INF

    def top(self, dim=None):
        return INF


class BoolImplies(AtomicOrder):
    name = "boolImplies"

    def leq(self, a, b):
        return (not a) or b

    def meet(self, a, b):
        return a and b

    def join(self, a, b):
        return a or b

    def bottom(self, dim=None):
        return False

    def top(self, dim=None):
        return True


class BvBitwise(AtomicOrder):
    name = "bvBitwise"

    def __init__(self, width: int):
        self.width = width

    def leq(self, a, b):
        return a & ~b == 0

    def meet(self, a, b):
        return a & b

    def join(self, a, b):
        return a | b

    def bottom(self, dim=None):
        return 0

    def top(self, dim=None):
        return (1 << self.width) - 1


class BvUnsignedLeq(BvBitwise):
    name = "bvUnsignedLeq"

    def leq(self, a, b):
        return a <= b

    def meet(self, a, b):
        return a if a <= b else b

    def join(self, a, b):
        return a if a >= b else b


class MatrixEntrywise(AtomicOrder):
    """Entrywise implication; on regex matrices this is language inclusion."""

    name = "matrixEntrywise"

    def __init__(self, dim: int | None = None):
        self.dim = dim

    def leq(self, a, b):
        return kernels.mat_leq(a.rows, b.rows)

    def meet(self, a, b):
        return BoolMatrix(kernels.mat_and(a.rows, b.rows))

    def join(self, a, b):
        return BoolMatrix(kernels.mat_or(a.rows, b.rows))

    def bottom(self, dim=None):
        return BoolMatrix.zero(self.dim or dim)

    def top(self, dim=None):
        return BoolMatrix.ones(self.dim or dim)


class TuplePointwise(AtomicOrder):
    name = "tuplePointwise"

    def __init__(self, items: tuple[AtomicOrder, ...]):
        self.items = tuple(items)

    def leq(self, a, b):
        for o, x, y in zip(self.items, a, b):
            if not o.leq(x, y):
                return False
        return True

    def meet(self, a, b):
        return tuple([o.meet(x, y) for o, x, y in zip(self.items, a, b)])

    def join(self, a, b):
        return tuple([o.join(x, y) for o, x, y in zip(self.items, a, b)])

    def bottom(self, dim=None):
        return tuple([o.bottom(dim) for o in self.items])

    def top(self, dim=None):
        return tuple([o.top(dim) for o in self.items])

    def __repr__(self):
        return "tuplePointwise(" + ", ".join(map(repr, self.items)) + ")"


BASE_CHOICES = {
    "int": ("intLeq",),
    "bool": ("boolImplies",),
    "bv": ("bvBitwise", "bvUnsignedLeq"),
    "matrix": ("matrixEntrywise",),
}


def _family(key: str) -> str:
    return "bv" if key.startswith("bv") else key


@dataclass(frozen=True)
class OrderAssignment:
    """Maps base-sort keys (``int``, ``bool``, ``bv8``, ``matrix``) to order names.

    Keys that are absent use the first built-in choice for their family.
    """

    choices: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, mapping: dict[str, str] | None = None) -> OrderAssignment:
        mapping = dict(mapping or {})
        for key, name in mapping.items():
            fam = _family(key)
            if fam not in BASE_CHOICES or name not in BASE_CHOICES[fam]:
                raise SortMismatch(f"order {name} does not apply to sort {key}")
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.choices)

    def name_for(self, key: str) -> str:
        d = dict(self.choices)
        return d.get(key, BASE_CHOICES[_family(key)][0])

    def order_for(self, sort: SemType) -> AtomicOrder:
        if is_tuple_sort(sort):
            return TuplePointwise(tuple(self.order_for(c) for c in sort.components))
        key = sort.base_key()
        name = self.name_for(key)
        if isinstance(sort, IntT):
            return IntLeq()
        if isinstance(sort, BoolT):
            return BoolImplies()
        if isinstance(sort, BVT):
            return BvBitwise(sort.width) if name == "bvBitwise" else BvUnsignedLeq(sort.width)
        if isinstance(sort, MatT):
            return MatrixEntrywise(sort.dim)
        raise SortMismatch(f"no order for sort {sort}")

    def describe(self) -> str:
        return ", ".join(f"{k}: {v}" for k, v in self.choices) or "defaults"


def problem_sort_keys(problem: Problem) -> list[str]:
    keys = set()
    for d in problem.grammar.nonterminals:
        for t in (d.input_type, d.output_type):
            keys.update(b.base_key() for b in base_sorts(t))
    for p in problem.grammar.productions:
        if any(r.guard is not None for r in p.rules):
            keys.add("bool")
    return sorted(keys)


def default_candidates(problem: Problem) -> list[OrderAssignment]:
    """Cartesian product of the built-in orders over the problem's sorts.

    Keys fixed by the problem's ``order`` hints contribute a single choice.
    """
    keys = problem_sort_keys(problem)
    hints = dict(problem.order_hints or {})
    options = [[(k, hints[k])] if k in hints else [(k, name) for name in BASE_CHOICES[_family(k)]] for k in keys]
    return [OrderAssignment.of(dict(combo)) for combo in itertools.product(*options)]


# ---------------------------------------------------------------------------
# sample domains


@dataclass(frozen=True)
class DomainSample:
    """Finite test domain per sort for brute-force monotonicity checks."""

    int_lo: int = -3
    int_hi: int = 3
    bv_exhaustive_width: int = 3
    bv_samples: int = 12
    matrix_dims: tuple[int, ...] = (1, 2, 3)
    matrix_samples: int = 24
    tuple_limit: int = 4096
    arg_limit: int = 64
    pair_cap: int = 4096
    budget: int = 60_000
    seed: int = 0

    def describe(self) -> str:
        return (
            f"int [{self.int_lo},{self.int_hi}]; bool exhaustive; bitvec exhaustive up to width "
            f"{self.bv_exhaustive_width}, else corners plus {self.bv_samples} seeded samples; "
            f"boolmatrix dims {list(self.matrix_dims)}; tuples beyond {self.arg_limit} values sampled; budget {self.budget} evaluations; seed {self.seed}"
        )

    def values(self, sort: SemType, dim: int | None = None, limit: int | None = None) -> list:
        """Deterministic sample of ``sort``; ``dim`` sizes dynamic matrices."""
        if dim is None and any(isinstance(b, MatT) and b.dim is None for b in base_sorts(sort)):
            out = []
            for d in self.matrix_dims:
                out.extend(self.values(sort, d, limit))
            return out
        limit = limit or self.tuple_limit
        if isinstance(sort, IntT):
            return list(range(self.int_lo, self.int_hi + 1))
        if isinstance(sort, BoolT):
            return [False, True]
        if isinstance(sort, BVT):
            w = sort.width
            if w <= self.bv_exhaustive_width:
                return list(range(1 << w))
            mask = sort.mask
            corners = {0, 1, 2, 3, mask, mask - 1, mask >> 1, (mask >> 1) + 1, 0x55555555 & mask, 0xAAAAAAAA & mask}
            rng = random.Random(f"{self.seed}:bv{w}")
            while len(corners) < len({0, 1, 2, 3, mask, mask - 1}) + self.bv_samples and len(corners) < (1 << w):
                corners.add(rng.randrange(1 << w))
            return sorted(corners)
        if isinstance(sort, MatT):
            n = sort.dim or dim
            return self._matrices(n)
        if is_tuple_sort(sort):
            comps = [self.values(c, dim, limit) for c in sort.components]
            total = 1
            for c in comps:
                total *= len(c)
            if total <= limit:
                return [tuple(v) for v in itertools.product(*comps)]
            rng = random.Random(f"{self.seed}:tuple:{sort}:{dim}")
            seen = {tuple(c[0] for c in comps), tuple(c[-1] for c in comps)}
            out = list(seen)
            while len(out) < limit:
                v = tuple(rng.choice(c) for c in comps)
                if v not in seen:
                    seen.add(v)
                    out.append(v)
            return out
        raise SortMismatch(f"cannot sample sort {sort}")

    def _matrices(self, n: int) -> list[BoolMatrix]:
        cells = [(i, j) for i in range(n) for j in range(i, n)]
        if n <= 3:
            out = []
            for bits in range(1 << len(cells)):
                rows = [0] * n
                for k, (i, j) in enumerate(cells):
                    if bits >> k & 1:
                        rows[i] |= 1 << j
                out.append(BoolMatrix(tuple(rows)))
            return out
        rng = random.Random(f"{self.seed}:mat{n}")
        out = {BoolMatrix.zero(n), BoolMatrix.identity(n), BoolMatrix.ones(n)}
        while len(out) < 3 + self.matrix_samples:
            rows = [0] * n
            for i, j in cells:
                if rng.random() < 0.3:
                    rows[i] |= 1 << j
            out.add(BoolMatrix(tuple(rows)))
        return sorted(out, key=lambda m: m.rows)


# ---------------------------------------------------------------------------
# monotonicity


class Direction(Enum):
    INC = "inc"
    DEC = "dec"
    BOTH = "both"
    NONE = "none"

    @property
    def monotone(self) -> bool:
        return self is not Direction.NONE


def _arg_sorts(env: TypeEnv) -> list[SemType]:
    return [env.input_type, *env.child_types]


def _dims(env: TypeEnv, cfg: DomainSample) -> list[int | None]:
    dynamic = any(
        isinstance(b, MatT) and b.dim is None for t in _arg_sorts(env) for b in base_sorts(t)
    ) or isinstance(env.input_type, StrT)
    return list(cfg.matrix_dims) if dynamic else [None]


def _pairs(order: AtomicOrder, sample: list, cap: int, rng: random.Random) -> list[tuple[Any, Any]]:
    """Comparable pairs ``(a, a ⊔ b)`` and ``(a ⊓ b, a)``; all of them on small samples."""
    if len(sample) ** 2 > cap:
        out = []
        for _ in range(cap // 2):
            a, b = rng.choice(sample), rng.choice(sample)
            out.append((a, order.join(a, b)))
            out.append((order.meet(a, b), a))
        return out
    seen = set()
    out = []
    for a in sample:
        for b in sample:
            for pair in ((a, order.join(a, b)), (order.meet(a, b), a)):
                if pair not in seen:
                    seen.add(pair)
                    out.append(pair)
    return out


def _is_projection(e: Expr) -> bool:
    while e.op == "proj":
        e = e.args[0]
    return e.op in ("x", "y", "char")


@lru_cache(maxsize=256)
def _sample(cfg: DomainSample, sort: SemType, dim: int | None) -> list:
    return cfg.values(sort, dim, limit=cfg.arg_limit)


@lru_cache(maxsize=256)
def _sample_pairs(cfg: DomainSample, order: AtomicOrder, sort: SemType, dim: int | None) -> list:
    rng = random.Random(f"{cfg.seed}:pairs:{sort}:{dim}")
    return _pairs(order, _sample(cfg, sort, dim), cfg.pair_cap, rng)


def check_monotone(
    e: Expr,
    arg: int,
    env: TypeEnv,
    omega: OrderAssignment,
    cfg: DomainSample | None = None,
    shuffle: bool = False,
) -> Direction:
    """Brute-force direction of ``e`` in argument ``arg`` (0 = input, i = child i)."""
    cfg = cfg or DomainSample()
    used = refs(e)
    if arg not in used:
        return Direction.BOTH
    if _is_projection(e):
        return Direction.INC  # projections are monotone under pointwise orders
    out_order = omega.order_for(typecheck(e, env))
    fn = compile_expr(e, env)
    sorts = _arg_sorts(env)
    arg_order = omega.order_for(sorts[arg])
    others = sorted(used - {arg})
    inc = dec = True
    rng = random.Random(f"{cfg.seed}:{e}:{arg}")
    for dim in _dims(env, cfg):
        pairs = _sample_pairs(cfg, arg_order, sorts[arg], dim)
        frozen_samples = [_sample(cfg, sorts[k], dim) for k in others]
        combos_total = len(pairs)
        for s in frozen_samples:
            combos_total *= len(s)
        per_dim_budget = cfg.budget // len(_dims(env, cfg))
        if combos_total <= per_dim_budget:
            frozen_iter: Iterable = itertools.product(*frozen_samples)
            cases = ((f, p) for f in frozen_iter for p in pairs)
            if shuffle:
                cases = list(cases)
                rng.shuffle(cases)
        else:
            cases = (
                (tuple(rng.choice(s) for s in frozen_samples), rng.choice(pairs)) for _ in range(per_dim_budget)
            )
        ys = [None] * len(env.child_types)
        # an unreferenced input still sizes matrix constants
        x_default = omega.order_for(env.input_type).bottom(dim)
        for frozen, (v1, v2) in cases:
            x = x_default
            for k, v in zip(others, frozen):
                if k == 0:
                    x = v
                else:
                    ys[k - 1] = v
            if arg == 0:
                o1 = fn(v1, ys, None)
                o2 = fn(v2, ys, None)
            else:
                ys[arg - 1] = v1
                o1 = fn(x, ys, None)
                ys[arg - 1] = v2
                o2 = fn(x, ys, None)
            if inc and not out_order.leq(o1, o2):
                inc = False
            if dec and not out_order.leq(o2, o1):
                dec = False
            if not inc and not dec:
                return Direction.NONE
    if inc and dec:
        return Direction.BOTH
    return Direction.INC if inc else Direction.DEC


@dataclass(frozen=True)
class MonoEntry:
    production: str
    rule: int
    expression: str
    directions: tuple[Direction, ...]
    tag: str = "bruteForce"
    sample: str = ""

    @property
    def monotone(self) -> bool:
        return all(d.monotone for d in self.directions)


@dataclass
class MonotonicityProfile:
    omega: OrderAssignment
    entries: list[MonoEntry] = field(default_factory=list)

    def __post_init__(self):
        self._index = {(e.production, e.rule, e.expression): e for e in self.entries}

    def add(self, entry: MonoEntry):
        self.entries.append(entry)
        self._index[(entry.production, entry.rule, entry.expression)] = entry

    def entry(self, production: str, rule: int, expression: str) -> MonoEntry | None:
        return self._index.get((production, rule, expression))

    def production_monotone(self, production: str) -> bool:
        found = [e for e in self.entries if e.production == production]
        return bool(found) and all(e.monotone for e in found)

    def monotone_productions(self) -> list[str]:
        names = []
        for e in self.entries:
            if e.production not in names:
                names.append(e.production)
        return [n for n in names if self.production_monotone(n)]

    def score(self, problem: Problem) -> int:
        """Monotone productions that have children (leaves are trivially monotone)."""
        return sum(1 for n in self.monotone_productions() if problem.grammar.production(n).arity > 0)


def _analyze_expression(args):
    problem, p, ri, key, e, omega, cfg = args
    env = expr_env(problem.grammar, p, key)
    n = 1 + p.arity
    if p.recursive:
        used = refs(e)
        dirs = tuple(Direction.NONE if k in used else Direction.BOTH for k in range(n))
        return MonoEntry(p.name, ri, key, dirs, "bruteForce", "recursive production: not claimed monotone")
    dirs = tuple(check_monotone(e, k, env, omega, cfg) for k in range(n))
    return MonoEntry(p.name, ri, key, dirs, "bruteForce", cfg.describe())


def analyze(
    problem: Problem, omega: OrderAssignment, cfg: DomainSample | None = None, workers: int = 1
) -> MonotonicityProfile:
    """Direction vectors for every rule expression under ``omega``."""
    cfg = cfg or DomainSample()
    problem.compile()
    jobs = [
        (problem, p, ri, key, e, omega, cfg)
        for p in problem.grammar.productions
        for ri, rule in enumerate(p.rules)
        for key, e in rule.expressions()
    ]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            entries = list(pool.map(_analyze_expression, jobs))
    else:
        entries = [_analyze_expression(j) for j in jobs]
    return MonotonicityProfile(omega, entries)


def synthesize_orders(
    problem: Problem,
    candidates: Sequence[OrderAssignment] | None = None,
    cfg: DomainSample | None = None,
    workers: int = 1,
) -> tuple[OrderAssignment, MonotonicityProfile]:
    """Best assignment by number of monotone productions; first one wins ties."""
    candidates = list(candidates) if candidates else default_candidates(problem)
    best = None
    for omega in candidates:
        prof = analyze(problem, omega, cfg, workers)
        if best is None or prof.score(problem) > best[1].score(problem):
            best = (omega, prof)
    return best
