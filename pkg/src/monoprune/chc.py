"""Restricted-CHC concrete semantics.

Every production rule is a set of expressions over the parent input ``x``
and the child outputs ``(y 1) ... (y n)``: one expression per child giving
that child's input (left-to-right dataflow), an output expression, and an
optional guard over ``x``.  Expressions are type-checked once and compiled
to Python closures ``fn(x, ys, ctx)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

from monoprune import kernels
from monoprune.grammar import Grammar, Hole, Node, Term
from monoprune.values import (
    BVT,
    BoolMatrix,
    BoolT,
    IntT,
    MatT,
    SemType,
    StrT,
    TupleT,
    format_value,
    is_tuple_sort,
    matrix_path,
)

log = logging.getLogger(__name__)

DEFAULT_FUEL = 512


class ExprTypeError(TypeError):
    pass


class EvalError(TypeError):
    """Evaluation hit an ill-typed value; validation should have caught it."""


class FuelExhausted(RuntimeError):
    pass


class NoRuleApplies(EvalError):
    pass


class Indeterminate(ArithmeticError):
    """``inf + -inf`` and friends; only reachable on interval endpoints."""


@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple[Expr, ...] = ()
    param: Any = None

    def __str__(self):
        return format_expr(self)


def const(value, sort: SemType) -> Expr:
    return Expr("const", (), (value, sort))


X = Expr("x")


def child(i: int) -> Expr:
    return Expr("y", (), i)


INT_BINOPS = {"+", "-", "*", "min", "max"}
INT_CMPS = {"<=", "<"}
BOOL_NARY = {"and", "or"}
BV_BINOPS = {"bvand", "bvor", "bvxor", "bvadd", "bvsadd"}
MAT_BINOPS = {"madd", "mmul"}
MAT_UNOPS = {"mstar", "mneg"}
MAT_CONSTS = {"mzero", "mid", "mones"}
ALL_OPS = (
    INT_BINOPS
    | INT_CMPS
    | BOOL_NARY
    | BV_BINOPS
    | MAT_BINOPS
    | MAT_UNOPS
    | MAT_CONSTS
    | {"const", "x", "y", "self", "tuple", "proj", "char", "ite", "=", "not", "=>", "bvnot", "maccepts"}
)


def format_expr(e: Expr) -> str:
    op = e.op
    if op == "const":
        value, sort = e.param
        return format_value(value, sort)
    if op == "x":
        return "x"
    if op == "y":
        return f"(y {e.param})"
    if op == "proj":
        return f"(proj {format_expr(e.args[0])} {e.param})"
    if op == "char":
        from monoprune.values import quote

        return f"(char {quote(e.param)})"
    if not e.args:
        return f"({op})"
    return "(" + op + " " + " ".join(format_expr(a) for a in e.args) + ")"


def refs(e: Expr) -> frozenset[int]:
    """Argument positions read by ``e``: 0 is the input, ``i`` is child ``i``.

    Matrix constants only read the input's dimension and are not counted.
    """
    out: set[int] = set()

    def walk(u):
        if u.op == "x" or u.op == "char":
            out.add(0)
        elif u.op == "y":
            out.add(u.param)
        for a in u.args:
            walk(a)

    walk(e)
    return frozenset(out)


def uses_self(e: Expr) -> bool:
    return e.op == "self" or any(uses_self(a) for a in e.args)


def int_constants(e: Expr) -> set[int]:
    out = set()

    def walk(u):
        if u.op == "const" and isinstance(u.param[1], IntT):
            out.add(u.param[0])
        for a in u.args:
            walk(a)

    walk(e)
    return out


# ---------------------------------------------------------------------------
# type checking


@dataclass(frozen=True)
class TypeEnv:
    input_type: SemType
    child_types: tuple[SemType, ...]
    visible_children: int
    self_type: tuple[SemType, SemType] | None = None


def _mat_dim_of_input(env: TypeEnv) -> MatT:
    path = matrix_path(env.input_type)
    if path is None:
        raise ExprTypeError("matrix constant needs a matrix-carrying input sort")
    t = env.input_type
    for i in path:
        t = t.components[i]
    return t


def _same_matrix(a: SemType, b: SemType, op: str) -> MatT:
    if not isinstance(a, MatT) or not isinstance(b, MatT):
        raise ExprTypeError(f"{op} expects matrices, got {a} and {b}")
    if a.dim != b.dim:
        raise ExprTypeError(f"{op}: matrix dimensions differ ({a} vs {b})")
    return a


def typecheck(e: Expr, env: TypeEnv) -> SemType:
    op = e.op
    if op == "const":
        return e.param[1]
    if op == "x":
        return env.input_type
    if op == "y":
        i = e.param
        if not isinstance(i, int) or i < 1 or i > len(env.child_types):
            raise ExprTypeError(f"(y {i}) out of range")
        if i > env.visible_children:
            raise ExprTypeError(f"dataflow: (y {i}) is not available here")
        return env.child_types[i - 1]
    if op not in ALL_OPS:
        raise ExprTypeError(f"unknown operator {op}")
    if op == "self":
        if env.self_type is None:
            raise ExprTypeError("self is only allowed in recursive productions")
        (a,) = _arity(e, 1)
        t = typecheck(a, env)
        if t != env.self_type[0]:
            raise ExprTypeError(f"self expects {env.self_type[0]}, got {t}")
        return env.self_type[1]
    if op == "char":
        if not isinstance(env.input_type, StrT):
            raise ExprTypeError("char needs a string input sort")
        if e.param not in env.input_type.alphabet:
            raise ExprTypeError(f"character {e.param!r} is not in the alphabet")
        return MatT(None)
    if op in MAT_CONSTS:
        _arity(e, 0)
        return MatT(_mat_dim_of_input(env).dim)
    ts = [typecheck(a, env) for a in e.args]
    if op == "tuple":
        if not ts:
            raise ExprTypeError("empty tuple")
        return TupleT(tuple(ts))
    if op == "proj":
        (t,) = _arity(e, 1, ts)
        if not is_tuple_sort(t):
            raise ExprTypeError(f"proj on non-tuple {t}")
        if not isinstance(e.param, int) or not 0 <= e.param < len(t.components):
            raise ExprTypeError(f"proj index {e.param} out of range for {t}")
        return t.components[e.param]
    if op in INT_BINOPS or op in INT_CMPS:
        a, b = _arity(e, 2, ts)
        if a != IntT() or b != IntT():
            raise ExprTypeError(f"{op} expects ints, got {a} and {b}")
        return IntT() if op in INT_BINOPS else BoolT()
    if op == "=":
        a, b = _arity(e, 2, ts)
        if a != b:
            raise ExprTypeError(f"= compares {a} with {b}")
        return BoolT()
    if op == "ite":
        g, a, b = _arity(e, 3, ts)
        if g != BoolT():
            raise ExprTypeError(f"ite guard must be bool, got {g}")
        if a != b:
            raise ExprTypeError(f"ite branches differ: {a} vs {b}")
        return a
    if op in BOOL_NARY:
        if len(ts) < 2 or any(t != BoolT() for t in ts):
            raise ExprTypeError(f"{op} expects two or more bools")
        return BoolT()
    if op == "not":
        (a,) = _arity(e, 1, ts)
        if a != BoolT():
            raise ExprTypeError("not expects bool")
        return BoolT()
    if op == "=>":
        a, b = _arity(e, 2, ts)
        if a != BoolT() or b != BoolT():
            raise ExprTypeError("=> expects bools")
        return BoolT()
    if op in BV_BINOPS:
        a, b = _arity(e, 2, ts)
        if not isinstance(a, BVT) or a != b:
            raise ExprTypeError(f"{op} expects equal-width bitvectors, got {a} and {b}")
        return a
    if op == "bvnot":
        (a,) = _arity(e, 1, ts)
        if not isinstance(a, BVT):
            raise ExprTypeError("bvnot expects a bitvector")
        return a
    if op in MAT_BINOPS:
        a, b = _arity(e, 2, ts)
        return _same_matrix(a, b, op)
    if op in MAT_UNOPS:
        (a,) = _arity(e, 1, ts)
        return _same_matrix(a, a, op)
    if op == "maccepts":
        (a,) = _arity(e, 1, ts)
        _same_matrix(a, a, op)
        return BoolT()
    raise ExprTypeError(f"unhandled operator {op}")  # pragma: no cover


def _arity(e: Expr, n: int, ts=None):
    if len(e.args) != n:
        raise ExprTypeError(f"{e.op} takes {n} argument(s), got {len(e.args)}")
    return ts if ts is not None else e.args


# ---------------------------------------------------------------------------
# compilation

Fn = Callable[[Any, list, Any], Any]


def _dim_getter(input_type: SemType | None) -> Callable[[Any], int]:
    if input_type is not None:
        path = matrix_path(input_type)
        static = None
        if path is not None:
            t = input_type
            for i in path:
                t = t.components[i]
            static = t.dim
        if static is not None:
            return lambda x: static
        if path is not None:

            def get(x, path=path):
                for i in path:
                    x = x[i]
                return x.dim

            return get

    def search(x):
        stack = [x]
        while stack:
            v = stack.pop()
            if isinstance(v, BoolMatrix):
                return v.dim
            if isinstance(v, tuple):
                stack.extend(reversed(v))
        raise EvalError("no matrix in input to size a matrix constant")

    return search


@lru_cache(maxsize=None)
def compile_expr(e: Expr, env: TypeEnv | None = None) -> Fn:
    """Compile ``e`` to ``fn(x, ys, ctx)``; ``ctx`` evaluates ``self`` calls.

    ``env`` supplies the static sorts (bitvector widths, alphabet indices,
    fixed matrix sizes); without it only width-free operators compile.
    """
    return _compile(e, env)


def _bv_mask(e: Expr, env: TypeEnv | None) -> int:
    if env is None:
        raise EvalError(f"bitvector width unknown for {format_expr(e)}")
    return typecheck(e, env).mask


def _compile(e: Expr, env: TypeEnv | None) -> Fn:
    op = e.op
    input_type = env.input_type if env is not None else None
    if op == "const":
        v = e.param[0]
        return lambda x, ys, c: v
    if op == "x":
        return lambda x, ys, c: x
    if op == "y":
        i = e.param - 1
        return lambda x, ys, c: ys[i]
    if op == "self":
        fa = _compile(e.args[0], env)
        return lambda x, ys, c: c(fa(x, ys, c))
    if op == "char":
        ch = e.param
        if isinstance(input_type, StrT):
            k = input_type.alphabet.index(ch)
            return lambda x, ys, c: x[k]
        return lambda x, ys, c: x[x.alphabet.index(ch)]
    if op in MAT_CONSTS:
        dim = _dim_getter(input_type)
        if op == "mzero":
            return lambda x, ys, c: BoolMatrix.zero(dim(x))
        if op == "mid":
            return lambda x, ys, c: BoolMatrix.identity(dim(x))
        return lambda x, ys, c: BoolMatrix.ones(dim(x))
    fs = [_compile(a, env) for a in e.args]
    if op == "tuple":
        return lambda x, ys, c: tuple([f(x, ys, c) for f in fs])
    if op == "proj":
        (fa,) = fs
        k = e.param
        return lambda x, ys, c: fa(x, ys, c)[k]
    if op == "ite":
        fg, fa, fb = fs
        return lambda x, ys, c: fa(x, ys, c) if fg(x, ys, c) else fb(x, ys, c)
    if op == "not":
        (fa,) = fs
        return lambda x, ys, c: not fa(x, ys, c)
    if op == "and":
        return lambda x, ys, c: all(f(x, ys, c) for f in fs)
    if op == "or":
        return lambda x, ys, c: any(f(x, ys, c) for f in fs)
    if op == "maccepts":
        (fa,) = fs

        def accepts(x, ys, c):
            m = fa(x, ys, c)
            return bool(m.rows[0] >> (len(m.rows) - 1) & 1)

        return accepts
    if op == "mstar":
        (fa,) = fs
        return lambda x, ys, c: BoolMatrix(kernels.mat_closure(fa(x, ys, c).rows))
    if op == "mneg":
        (fa,) = fs
        return lambda x, ys, c: BoolMatrix(kernels.mat_complement(fa(x, ys, c).rows))
    if op == "bvnot":
        (fa,) = fs
        mask = _bv_mask(e, env)
        return lambda x, ys, c: ~fa(x, ys, c) & mask
    fa, fb = fs
    if op == "+":

        def add(x, ys, c):
            r = fa(x, ys, c) + fb(x, ys, c)
            if r != r:
                raise Indeterminate("inf + -inf")
            return r

        return add
    if op == "-":

        def sub(x, ys, c):
            r = fa(x, ys, c) - fb(x, ys, c)
            if r != r:
                raise Indeterminate("inf - inf")
            return r

        return sub
    if op == "*":

        def mul(x, ys, c):
            a = fa(x, ys, c)
            b = fb(x, ys, c)
            r = a * b
            if r != r:
                if a == 0 or b == 0:
                    return 0
                raise Indeterminate("inf * nan")
            return r

        return mul
    if op == "min":
        return lambda x, ys, c: min(fa(x, ys, c), fb(x, ys, c))
    if op == "max":
        return lambda x, ys, c: max(fa(x, ys, c), fb(x, ys, c))
    if op == "<=":
        return lambda x, ys, c: fa(x, ys, c) <= fb(x, ys, c)
    if op == "<":
        return lambda x, ys, c: fa(x, ys, c) < fb(x, ys, c)
    if op == "=":
        return lambda x, ys, c: fa(x, ys, c) == fb(x, ys, c)
    if op == "=>":
        return lambda x, ys, c: (not fa(x, ys, c)) or bool(fb(x, ys, c))
    if op == "bvand":
        return lambda x, ys, c: fa(x, ys, c) & fb(x, ys, c)
    if op == "bvor":
        return lambda x, ys, c: fa(x, ys, c) | fb(x, ys, c)
    if op == "bvxor":
        return lambda x, ys, c: fa(x, ys, c) ^ fb(x, ys, c)
    if op == "bvadd":
        mask = _bv_mask(e, env)
        return lambda x, ys, c: (fa(x, ys, c) + fb(x, ys, c)) & mask
    if op == "bvsadd":
        mask = _bv_mask(e, env)
        return lambda x, ys, c: min(fa(x, ys, c) + fb(x, ys, c), mask)
    if op == "madd":
        return lambda x, ys, c: BoolMatrix(kernels.mat_or(fa(x, ys, c).rows, fb(x, ys, c).rows))
    if op == "mmul":
        return lambda x, ys, c: BoolMatrix(kernels.mat_mul(fa(x, ys, c).rows, fb(x, ys, c).rows))
    raise EvalError(f"cannot compile operator {op}")


def eval_expr(e: Expr, x: Any, child_outs: list | tuple = (), env: TypeEnv | None = None, ctx=None) -> Any:
    """Evaluate one rule expression in the environment ``{x, (y i)}``."""
    try:
        return compile_expr(e, env)(x, list(child_outs), ctx)
    except (TypeError, AttributeError, IndexError) as exc:
        raise EvalError(f"evaluating {format_expr(e)}: {exc}") from exc


# ---------------------------------------------------------------------------
# rules, problems, evaluation


@dataclass(eq=False)
class ChcRule:
    child_inputs: tuple[Expr, ...]
    output: Expr
    guard: Expr | None = None
    input_fns: tuple[Fn, ...] = field(default=(), repr=False)
    output_fn: Fn | None = field(default=None, repr=False)
    guard_fn: Fn | None = field(default=None, repr=False)

    def expressions(self) -> list[tuple[str, Expr]]:
        """``(key, expr)`` pairs: ``guard``, ``input1``..``inputN``, ``output``."""
        out = []
        if self.guard is not None:
            out.append(("guard", self.guard))
        for i, e in enumerate(self.child_inputs):
            out.append((f"input{i + 1}", e))
        out.append(("output", self.output))
        return out


@dataclass(frozen=True)
class Example:
    input: Any
    output: Any


def expr_env(grammar: Grammar, production, key: str) -> TypeEnv:
    decl = grammar.decls[production.lhs]
    child_types = tuple(grammar.decls[c].output_type for c in production.children)
    if key == "guard":
        visible = 0
    elif key.startswith("input"):
        visible = int(key[5:]) - 1
    else:
        visible = len(child_types)
    self_type = (decl.input_type, decl.output_type) if production.recursive else None
    return TypeEnv(decl.input_type, child_types, visible, self_type)


def expected_type(grammar: Grammar, production, key: str) -> SemType:
    if key == "guard":
        return BoolT()
    if key.startswith("input"):
        return grammar.decls[production.children[int(key[5:]) - 1]].input_type
    return grammar.decls[production.lhs].output_type


def rule_diagnostics(grammar: Grammar) -> list[str]:
    out = []
    for p in grammar.productions:
        for ri, rule in enumerate(p.rules):
            if len(rule.child_inputs) != p.arity:
                out.append(f"{p.name} rule {ri}: {len(rule.child_inputs)} child inputs for {p.arity} children")
                continue
            for key, e in rule.expressions():
                env = expr_env(grammar, p, key)
                try:
                    t = typecheck(e, env)
                except ExprTypeError as exc:
                    out.append(f"{p.name} rule {ri} {key}: {exc}")
                    continue
                want = expected_type(grammar, p, key)
                if t != want:
                    out.append(f"{p.name} rule {ri} {key}: has sort {t}, expected {want}")
                if uses_self(e) and not p.recursive:
                    out.append(f"{p.name} rule {ri} {key}: self used in a non-recursive production")
        if len(p.rules) > 1 and sum(r.guard is None for r in p.rules[:-1]):
            out.append(f"{p.name}: only the last of several rules may omit its guard")
    return out


def compile_rules(grammar: Grammar) -> None:
    for p in grammar.productions:
        for rule in p.rules:
            fns = {key: compile_expr(e, expr_env(grammar, p, key)) for key, e in rule.expressions()}
            rule.input_fns = tuple(fns[f"input{i + 1}"] for i in range(p.arity))
            rule.output_fn = fns["output"]
            rule.guard_fn = fns.get("guard")


@dataclass(eq=False)
class Problem:
    """An example-based synthesis problem: grammar, semantics, examples."""

    name: str
    grammar: Grammar
    examples: tuple[Example, ...]
    alphabet: str | None = None
    order_hints: dict[str, str] = field(default_factory=dict)
    compiled: bool = field(default=False, repr=False)

    def compile(self) -> Problem:
        if not self.compiled:
            diags = rule_diagnostics(self.grammar)
            if diags:
                raise ExprTypeError("; ".join(diags))
            compile_rules(self.grammar)
            self.compiled = True
        return self

    @property
    def start_decl(self):
        return self.grammar.decls[self.grammar.start]

    def int_constants(self) -> list[int]:
        """Integer constants of the expressions and examples (widening thresholds)."""
        found: set[int] = set()
        for p in self.grammar.productions:
            for r in p.rules:
                for _, e in r.expressions():
                    found |= int_constants(e)
        for ex in self.examples:
            found |= _ints_in(ex.input) | _ints_in(ex.output)
        return sorted(v for v in found if not isinstance(v, bool))


def _ints_in(v) -> set[int]:
    if isinstance(v, bool) or isinstance(v, BoolMatrix):
        return set()
    if isinstance(v, int):
        return {v}
    if isinstance(v, tuple):
        out = set()
        for c in v:
            out |= _ints_in(c)
        return out
    return set()


def select_rule(production, x):
    for rule in production.rules:
        if rule.guard_fn is None or rule.guard_fn(x, [], None):
            return rule
    raise NoRuleApplies(f"no rule of {production.name} applies")


class _Evaluator:
    __slots__ = ("fuel",)

    def __init__(self, fuel: int):
        self.fuel = fuel

    def run(self, t: Term, x):
        if isinstance(t, Hole):
            raise EvalError("cannot evaluate a hole")
        p = t.production
        ctx = None
        if p.recursive:
            self.fuel -= 1
            if self.fuel < 0:
                raise FuelExhausted(p.name)

            def ctx(v, t=t):
                return self.run(t, v)

        rules = p.rules
        rule = rules[0] if len(rules) == 1 and rules[0].guard_fn is None else select_rule(p, x)
        ys: list = []
        for fn, c in zip(rule.input_fns, t.children):
            ys.append(self.run(c, fn(x, ys, ctx)))
        return rule.output_fn(x, ys, ctx)


def eval_term(t: Term, x, fuel: int = DEFAULT_FUEL):
    """Concrete semantics of a complete term on input ``x``."""
    try:
        return _Evaluator(fuel).run(t, x)
    except (FuelExhausted, EvalError, Indeterminate):
        raise
    except RecursionError:
        # the interpreter stack ran out before the fuel did; same outcome
        raise FuelExhausted("recursion depth") from None
    except (TypeError, AttributeError, IndexError) as exc:
        raise EvalError(str(exc)) from exc


def check_examples(t: Term, examples, fuel: int = DEFAULT_FUEL) -> bool:
    """``t`` is consistent with every example; evaluator failures count as misses."""
    for ex in examples:
        try:
            if eval_term(t, ex.input, fuel) != ex.output:
                return False
        except FuelExhausted:
            return False
        except (EvalError, Indeterminate, RecursionError) as exc:
            log.debug("evaluation of %s failed: %s", t, exc)
            return False
    return True
