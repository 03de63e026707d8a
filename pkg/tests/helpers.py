"""Cached problem fixtures and small brute-force oracles shared by the tests."""

from __future__ import annotations

import dataclasses
import random
from functools import lru_cache

from monoprune.abstract import TOP_HOLES, AbstractSemantics
from monoprune.bench import bundled_problem
from monoprune.chc import Example, Problem, eval_term
from monoprune.gfa import example_inputs, solve_holes
from monoprune.grammar import Hole, Node, enumerate_complete
from monoprune.orders import synthesize_orders

# bundled problems small enough for exhaustive enumeration to size 7
DESK = ("gi_plus", "imp_swap", "imp_loop", "unrealizable", "regex_matrix", "csv_small", "bitvec_toy",
        "bitvec_saturating", "boolean_cnf")


@lru_cache(maxsize=None)
def problem(name: str) -> Problem:
    return bundled_problem(name).compile()


@lru_cache(maxsize=None)
def profile(name: str):
    return synthesize_orders(problem(name))[1]


@lru_cache(maxsize=None)
def semantics(name: str) -> AbstractSemantics:
    return AbstractSemantics(problem(name), profile(name))


@lru_cache(maxsize=None)
def gfa_table(name: str):
    sem = semantics(name)
    return solve_holes(sem, example_inputs(sem)).table


def tables(name: str):
    return {"top": TOP_HOLES, "gfa": gfa_table(name)}


@lru_cache(maxsize=None)
def complete_terms(name: str, max_size: int) -> tuple:
    p = problem(name)
    return tuple(enumerate_complete(p.grammar, p.grammar.start, max_size))


def with_examples(p: Problem, inputs, target) -> Problem:
    """Copy of ``p`` whose examples are ``target``'s outputs on ``inputs``."""
    exs = tuple(Example(x, eval_term(target, x)) for x in inputs)
    return dataclasses.replace(p, examples=exs)


def random_partial(rng: random.Random, t):
    """Replace a random subset of subtrees of complete ``t`` by holes."""
    if isinstance(t, Hole):
        return t
    if rng.random() < 0.25:
        return Hole(t.production.lhs)
    return Node(t.production, tuple(random_partial(rng, c) for c in t.children))


# -- endpoint precision oracle


def endpoint_expressions(name: str):
    """``(label, abs_expr, env)`` for every rule expression lifted by endpoints."""
    from monoprune.chc import expr_env

    p = problem(name)
    sem = semantics(name)
    for prod in p.grammar.productions:
        for ri, ar in enumerate(sem.rules[prod.name]):
            parts = [("guard", ar.guard)] + [(f"input{i + 1}", a) for i, a in enumerate(ar.inputs)]
            for key, ae in parts + [("output", ar.output)]:
                if ae is not None and ae.kind == "endpoint":
                    yield f"{prod.name}.r{ri}.{key}", ae, expr_env(p.grammar, prod, key)


def random_box(ae, env, omega, rng: random.Random, cfg=None):
    """Per-argument interval over the brute-force sample, plus the points to test in it.

    The points are both corners and one random sample value inside the box.
    """
    from monoprune.abstract import Interval
    from monoprune.orders import DomainSample
    from monoprune.values import has_dynamic_matrix

    cfg = cfg or DomainSample()
    sorts = [env.input_type, *env.child_types]
    dim = rng.choice(cfg.matrix_dims) if any(has_dynamic_matrix(s) for s in sorts) else None
    used = sorted(ae.used | {0})
    args, pts = [None] * len(sorts), {}
    for k in used:
        o = omega.order_for(sorts[k])
        sample = cfg.values(sorts[k], dim, limit=64)
        a, b = rng.choice(sample), rng.choice(sample)
        lo, hi = o.meet(a, b), o.join(a, b)
        inside = [v for v in sample if o.leq(lo, v) and o.leq(v, hi)]
        pts[k] = [lo, hi] + ([rng.choice(inside)] if inside else [])
        args[k] = Interval(lo, hi, o)
    return args, pts, dim


def box_outputs(ae, n_args: int, pts: dict) -> list:
    import itertools

    keys = sorted(pts)
    outs = []
    for combo in itertools.product(*(pts[k] for k in keys)):
        vals = [None] * n_args
        for k, v in zip(keys, combo):
            vals[k] = v
        outs.append(ae.fn(vals[0], vals[1:], None))
    return outs


def precision_failures(name: str, boxes: int, seed: int = 0) -> list[str]:
    """Expressions whose endpoint result misses the brute-force min or max on some box."""
    rng = random.Random(seed)
    omega = profile(name).omega
    bad = []
    for label, ae, env in endpoint_expressions(name):
        n = 1 + len(env.child_types)
        for _ in range(boxes):
            args, pts, dim = random_box(ae, env, omega, rng)
            res = ae.apply(args, dim)
            outs = box_outputs(ae, n, pts)
            o = ae.out_order
            sound = all(o.leq(res.lo, v) and o.leq(v, res.hi) for v in outs)
            if not (sound and res.lo in outs and res.hi in outs):
                bad.append(f"{name}:{label} on {args}: {res} vs {outs}")
                break
    return bad
