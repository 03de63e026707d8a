"""SMT-LIB 2 scripts that check monotonicity of one expression in one argument.

The script declares two copies of the chosen argument related by the order,
shares every other argument, and asserts that the outputs are *not* related.
``unsat`` therefore means the direction holds on the whole sort, not just on
the brute-force sample.  Tuples are flattened into one variable per component.
"""

from __future__ import annotations

from monoprune.chc import Expr, TypeEnv, typecheck
from monoprune.orders import (
    AtomicOrder,
    BoolImplies,
    BvBitwise,
    BvUnsignedLeq,
    Direction,
    IntLeq,
    OrderAssignment,
    TuplePointwise,
)
from monoprune.values import BVT, BoolT, IntT, SemType, is_tuple_sort


class UnsupportedSort(ValueError):
    pass


def _smt_sort(sort: SemType) -> str:
    if isinstance(sort, IntT):
        return "Int"
    if isinstance(sort, BoolT):
        return "Bool"
    if isinstance(sort, BVT):
        return f"(_ BitVec {sort.width})"
    raise UnsupportedSort(f"no SMT-LIB encoding for sort {sort}")


def _leaves(sort: SemType) -> list[SemType]:
    if is_tuple_sort(sort):
        return [leaf for c in sort.components for leaf in _leaves(c)]
    _smt_sort(sort)
    return [sort]


def _bv(value: int, width: int) -> str:
    return f"(_ bv{value} {width})"


def _lit(value, sort: SemType) -> list[str]:
    if is_tuple_sort(sort):
        return [t for v, c in zip(value, sort.components) for t in _lit(v, c)]
    if isinstance(sort, BoolT):
        return ["true" if value else "false"]
    if isinstance(sort, BVT):
        return [_bv(value, sort.width)]
    if isinstance(sort, IntT):
        return [str(value) if value >= 0 else f"(- {-value})"]
    raise UnsupportedSort(f"no SMT-LIB encoding for sort {sort}")


class _Encoder:
    def __init__(self, env: TypeEnv, names: list[list[str]]):
        self.env = env
        self.names = names  # flattened variable names per argument position
        self.nonlinear = False

    def sort(self, e: Expr) -> SemType:
        return typecheck(e, self.env)

    def enc(self, e: Expr) -> list[str]:
        op = e.op
        a = e.args
        if op == "const":
            value, sort = e.param
            return _lit(value, sort)
        if op == "x":
            return list(self.names[0])
        if op == "y":
            return list(self.names[e.param])
        if op == "tuple":
            return [t for arg in a for t in self.enc(arg)]
        if op == "proj":
            inner = self.sort(a[0])
            parts = self.enc(a[0])
            start = sum(len(_leaves(c)) for c in inner.components[: e.param])
            width = len(_leaves(inner.components[e.param]))
            return parts[start : start + width]
        if op in ("+", "-"):
            l, r = self.one(a[0]), self.one(a[1])
            return [f"({op} {l} {r})"]
        if op == "*":
            if a[0].op != "const" and a[1].op != "const":
                self.nonlinear = True
            return [f"(* {self.one(a[0])} {self.one(a[1])})"]
        if op in ("min", "max"):
            l, r = self.one(a[0]), self.one(a[1])
            cmp = "<=" if op == "min" else ">="
            return [f"(ite ({cmp} {l} {r}) {l} {r})"]
        if op in ("<=", "<"):
            return [f"({op} {self.one(a[0])} {self.one(a[1])})"]
        if op == "=":
            ls, rs = self.enc(a[0]), self.enc(a[1])
            return [_conj([f"(= {l} {r})" for l, r in zip(ls, rs)])]
        if op == "ite":
            c = self.one(a[0])
            return [f"(ite {c} {t} {f})" for t, f in zip(self.enc(a[1]), self.enc(a[2]))]
        if op in ("and", "or"):
            return [f"({op} " + " ".join(self.one(x) for x in a) + ")"]
        if op == "not":
            return [f"(not {self.one(a[0])})"]
        if op == "=>":
            return [f"(=> {self.one(a[0])} {self.one(a[1])})"]
        if op in ("bvand", "bvor", "bvxor", "bvadd"):
            return [f"({op} {self.one(a[0])} {self.one(a[1])})"]
        if op == "bvnot":
            return [f"(bvnot {self.one(a[0])})"]
        if op == "bvsadd":
            w = self.sort(e).width
            l, r = self.one(a[0]), self.one(a[1])
            s = f"(bvadd {l} {r})"
            return [f"(ite (bvult {s} {l}) {_bv((1 << w) - 1, w)} {s})"]
        raise UnsupportedSort(f"operator {op} has no SMT-LIB encoding")

    def one(self, e: Expr) -> str:
        out = self.enc(e)
        if len(out) != 1:
            raise UnsupportedSort(f"expected a scalar, got {len(out)} components")
        return out[0]


def _conj(terms: list[str]) -> str:
    if not terms:
        return "true"
    if len(terms) == 1:
        return terms[0]
    return "(and " + " ".join(terms) + ")"


def _leq(order: AtomicOrder, a: list[str], b: list[str]) -> str:
    if isinstance(order, TuplePointwise):
        out = []
        i = 0
        for o in order.items:
            n = _width(o)
            out.append(_leq(o, a[i : i + n], b[i : i + n]))
            i += n
        return _conj(out)
    (x,), (y,) = a, b
    if isinstance(order, IntLeq):
        return f"(<= {x} {y})"
    if isinstance(order, BoolImplies):
        return f"(=> {x} {y})"
    if isinstance(order, BvUnsignedLeq):
        return f"(bvule {x} {y})"
    if isinstance(order, BvBitwise):
        return f"(= (bvand {x} (bvnot {y})) {_bv(0, order.width)})"
    raise UnsupportedSort(f"order {order!r} has no SMT-LIB encoding")


def _width(order: AtomicOrder) -> int:
    if isinstance(order, TuplePointwise):
        return sum(_width(o) for o in order.items)
    return 1


def emit_external_check(
    e: Expr, arg: int, env: TypeEnv, omega: OrderAssignment, direction: Direction = Direction.INC
) -> str:
    """Script whose ``check-sat`` is ``unsat`` iff ``e`` is ``direction`` in argument ``arg``."""
    if direction not in (Direction.INC, Direction.DEC):
        raise ValueError("only inc and dec directions can be checked")
    sorts = [env.input_type, *env.child_types]
    out_sort = typecheck(e, env)
    for s in [*sorts, out_sort]:
        _leaves(s)
    names: list[list[str]] = []
    decls = []
    for k, s in enumerate(sorts):
        base = "x" if k == 0 else f"y{k}"
        leaves = _leaves(s)
        names.append([f"{base}_{j}" for j in range(len(leaves))])
        for n, leaf in zip(names[k], leaves):
            decls.append(f"(declare-const {n} {_smt_sort(leaf)})")
    low = [list(ns) for ns in names]
    high = [list(ns) for ns in names]
    high[arg] = [f"{n}_hi" for n in names[arg]]
    for n, leaf in zip(high[arg], _leaves(sorts[arg])):
        decls.append(f"(declare-const {n} {_smt_sort(leaf)})")
    enc_lo = _Encoder(env, low)
    enc_hi = _Encoder(env, high)
    out_lo, out_hi = enc_lo.enc(e), enc_hi.enc(e)
    arg_order = omega.order_for(sorts[arg])
    out_order = omega.order_for(out_sort)
    rel_in = _leq(arg_order, low[arg], high[arg])
    if direction is Direction.INC:
        rel_out = _leq(out_order, out_lo, out_hi)
    else:
        rel_out = _leq(out_order, out_hi, out_lo)
    leaves = [leaf for s in [*sorts, out_sort] for leaf in _leaves(s)]
    if any(isinstance(leaf, BVT) for leaf in leaves):
        logic = "ALL" if any(isinstance(leaf, IntT) for leaf in leaves) else "QF_BV"
    else:
        logic = "QF_NIA" if enc_lo.nonlinear else "QF_LIA"
    lines = [
        f"; {direction.value} in argument {arg} of {e}",
        f"(set-logic {logic})",
        *decls,
        f"(assert {rel_in})",
        f"(assert (not {rel_out}))",
        "(check-sat)",
        "(exit)",
    ]
    return "\n".join(lines) + "\n"


def emit_profile_checks(problem, omega: OrderAssignment) -> dict[str, str]:
    """One script per (production, rule, expression, argument, direction) with a supported sort."""
    from monoprune.chc import expr_env, refs

    out = {}
    for p in problem.grammar.productions:
        for ri, rule in enumerate(p.rules):
            for key, e in rule.expressions():
                env = expr_env(problem.grammar, p, key)
                for k in sorted(refs(e)):
                    for d in (Direction.INC, Direction.DEC):
                        try:
                            text = emit_external_check(e, k, env, omega, d)
                        except UnsupportedSort:
                            continue
                        out[f"{p.name}.r{ri}.{key}.arg{k}.{d.value}.smt2"] = text
    return out
