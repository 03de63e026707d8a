"""Textual problem format: parsing, validation, and canonical printing.

A problem file is a sequence of s-expression forms::

    (problem imp_swap)
    (alphabet "01")                       ; only needed by the string sort
    (order int intLeq)                    ; optional order hints
    (nonterminal S (tuple int int) (tuple int int))
    (start S)
    (production S seq (S S)
      (rule (inputs x (y 1)) (output (y 2))))
    (example (tuple 4 2) (tuple 2 4))

A production may carry the flag ``recursive`` after its child list; its
rules may then use ``(self e)``.  A rule may start with ``(guard g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from monoprune.chc import ChcRule, Example, Expr, Problem, rule_diagnostics
from monoprune.grammar import Grammar, GrammarError, NonterminalDecl, Production
from monoprune.sexp import ParseError, SList, Str, Sym, parse_all, where
from monoprune.values import (
    BVT,
    BoolMatrix,
    BoolT,
    CharMatrices,
    IntT,
    MatT,
    SemType,
    StrT,
    TupleT,
    format_value,
    quote,
)

ORDER_NAMES = ("intLeq", "boolImplies", "bvBitwise", "bvUnsignedLeq", "matrixEntrywise")


class ProblemError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class ProductionSpec:
    lhs: str
    operator: str
    children: tuple[str, ...]
    rules: list[ChcRule]
    recursive: bool = False


@dataclass
class ProblemFile:
    """A parsed but not yet validated problem."""

    name: str = "problem"
    alphabet: str | None = None
    order_hints: dict[str, str] = field(default_factory=dict)
    nonterminals: list[tuple[str, SemType | None, SemType | None]] = field(default_factory=list)
    start: str | None = None
    productions: list[ProductionSpec] = field(default_factory=list)
    # (input, input literal sort, output, output literal sort)
    examples: list[tuple[Any, SemType | None, Any, SemType | None]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# parsing


class _Reader:
    def __init__(self, pf: ProblemFile):
        self.pf = pf

    def diag(self, sx, message):
        line, col = where(sx)
        self.pf.diagnostics.append(f"{line}:{col}: {message}")

    def sort(self, sx) -> SemType | None:
        if isinstance(sx, Sym):
            if sx == "int":
                return IntT()
            if sx == "bool":
                return BoolT()
            if sx == "boolmatrix":
                return MatT(None)
            if sx == "string":
                if self.pf.alphabet is None:
                    self.diag(sx, "the string sort needs an (alphabet ...) declaration")
                    return None
                return StrT(self.pf.alphabet)
        elif isinstance(sx, list) and sx and isinstance(sx[0], Sym):
            head = sx[0]
            if head == "bitvec" and len(sx) == 2:
                w = _int(sx[1])
                if w is not None and w >= 1:
                    return BVT(w)
            elif head == "boolmatrix" and len(sx) == 2:
                n = _int(sx[1])
                if n is not None and n >= 1:
                    return MatT(n)
            elif head == "tuple" and len(sx) >= 2:
                items = [self.sort(c) for c in sx[1:]]
                if any(i is None for i in items):
                    return None
                return TupleT(tuple(items))
        self.diag(sx, f"unknown sort {_show(sx)}")
        return None

    def value(self, sx) -> tuple[Any, SemType | None]:
        if isinstance(sx, Sym):
            if sx == "true":
                return True, BoolT()
            if sx == "false":
                return False, BoolT()
            n = _int(sx)
            if n is not None:
                return n, IntT()
        elif isinstance(sx, list) and sx and isinstance(sx[0], Sym):
            head, args = sx[0], sx[1:]
            if head == "bv" and len(args) == 2:
                w, n = _int(args[0]), _int(args[1])
                if w is not None and w >= 1 and n is not None and 0 <= n < (1 << w):
                    return n, BVT(w)
            elif head == "tuple" and args:
                parts = [self.value(a) for a in args]
                if all(t is not None for _, t in parts):
                    return tuple(v for v, _ in parts), TupleT(tuple(t for _, t in parts))
                return None, None
            elif head == "str" and len(args) == 1 and isinstance(args[0], Str):
                if self.pf.alphabet is None:
                    self.diag(sx, "string values need an (alphabet ...) declaration")
                    return None, None
                try:
                    return CharMatrices(args[0].value, self.pf.alphabet), StrT(self.pf.alphabet)
                except ValueError as exc:
                    self.diag(sx, str(exc))
                    return None, None
            elif head == "matrix" and args and all(isinstance(a, Str) for a in args):
                try:
                    m = BoolMatrix.from_bits([[int(ch) for ch in a.value] for a in args])
                    return m, MatT(m.dim)
                except ValueError as exc:
                    self.diag(sx, f"bad matrix literal: {exc}")
                    return None, None
        self.diag(sx, f"malformed value {_show(sx)}")
        return None, None

    def expr(self, sx) -> Expr:
        if isinstance(sx, Sym):
            if sx == "x":
                return Expr("x")
            if sx in ("true", "false"):
                return Expr("const", (), (sx == "true", BoolT()))
            n = _int(sx)
            if n is not None:
                return Expr("const", (), (n, IntT()))
            self.diag(sx, f"unknown variable {sx}")
            return Expr("const", (), (0, IntT()))
        if isinstance(sx, list) and sx and isinstance(sx[0], Sym):
            head, args = str(sx[0]), sx[1:]
            if head == "y" and len(args) == 1 and _int(args[0]) is not None:
                return Expr("y", (), _int(args[0]))
            if head == "proj" and len(args) == 2 and _int(args[1]) is not None:
                return Expr("proj", (self.expr(args[0]),), _int(args[1]))
            if head == "char" and len(args) == 1 and isinstance(args[0], Str) and len(args[0].value) == 1:
                return Expr("char", (), args[0].value)
            if head in ("bv", "matrix"):
                v, t = self.value(sx)
                if t is not None:
                    return Expr("const", (), (v, t))
                return Expr("const", (), (0, IntT()))
            return Expr(head, tuple(self.expr(a) for a in args))
        self.diag(sx, f"malformed expression {_show(sx)}")
        return Expr("const", (), (0, IntT()))

    def rule(self, sx) -> ChcRule | None:
        if not (isinstance(sx, list) and sx and sx[0] == "rule"):
            self.diag(sx, "expected (rule ...)")
            return None
        guard, inputs, output = None, (), None
        for part in sx[1:]:
            if not (isinstance(part, list) and part and isinstance(part[0], Sym)):
                self.diag(part, f"malformed rule clause {_show(part)}")
                continue
            key = part[0]
            if key == "guard" and len(part) == 2:
                guard = self.expr(part[1])
            elif key == "inputs":
                inputs = tuple(self.expr(e) for e in part[1:])
            elif key == "output" and len(part) == 2:
                output = self.expr(part[1])
            else:
                self.diag(part, f"unknown rule clause {_show(part)}")
        if output is None:
            self.diag(sx, "rule without (output ...)")
            return None
        return ChcRule(inputs, output, guard)

    def form(self, sx):
        pf = self.pf
        if not (isinstance(sx, list) and sx and isinstance(sx[0], Sym)):
            self.diag(sx, f"unexpected top-level form {_show(sx)}")
            return
        head, args = sx[0], sx[1:]
        if head == "problem" and len(args) == 1 and isinstance(args[0], Sym):
            pf.name = str(args[0])
        elif head == "alphabet":
            pass  # handled in the first pass
        elif head == "order" and len(args) == 2 and all(isinstance(a, Sym) for a in args):
            if args[1] not in ORDER_NAMES:
                self.diag(args[1], f"unknown order {args[1]}")
            else:
                pf.order_hints[str(args[0])] = str(args[1])
        elif head == "nonterminal" and len(args) == 3 and isinstance(args[0], Sym):
            pf.nonterminals.append((str(args[0]), self.sort(args[1]), self.sort(args[2])))
        elif head == "start" and len(args) == 1 and isinstance(args[0], Sym):
            pf.start = str(args[0])
        elif head == "production" and len(args) >= 3 and isinstance(args[0], Sym) and isinstance(args[1], Sym):
            kids = args[2]
            if not isinstance(kids, list) or not all(isinstance(k, Sym) for k in kids):
                self.diag(sx, "production children must be a list of nonterminals")
                return
            rest = list(args[3:])
            recursive = False
            if rest and rest[0] == "recursive":
                recursive = True
                rest = rest[1:]
            rules = [r for r in (self.rule(r) for r in rest) if r is not None]
            pf.productions.append(ProductionSpec(str(args[0]), str(args[1]), tuple(map(str, kids)), rules, recursive))
        elif head == "example" and len(args) == 2:
            vi, ti = self.value(args[0])
            vo, to = self.value(args[1])
            pf.examples.append((vi, ti, vo, to))
        else:
            self.diag(sx, f"unknown or malformed form {_show(sx)}")


def _int(sx) -> int | None:
    if isinstance(sx, Sym):
        try:
            return int(sx)
        except ValueError:
            return None
    return None


def _show(sx) -> str:
    if isinstance(sx, list):
        return "(" + " ".join(_show(c) for c in sx) + ")"
    if isinstance(sx, Str):
        return quote(sx.value)
    return str(sx)


def parse_problem(text: str) -> ProblemFile:
    """Parse a problem file; syntax errors raise :class:`ParseError`."""
    forms = parse_all(text)
    pf = ProblemFile()
    reader = _Reader(pf)
    for sx in forms:
        if isinstance(sx, list) and sx and sx[0] == "alphabet":
            if len(sx) == 2 and isinstance(sx[1], Str) and sx[1].value:
                pf.alphabet = sx[1].value
            else:
                reader.diag(sx, "alphabet expects one nonempty string")
    for sx in forms:
        reader.form(sx)
    return pf


# ---------------------------------------------------------------------------
# validation


def _sort_accepts(declared: SemType, literal: SemType) -> bool:
    if isinstance(declared, MatT) and isinstance(literal, MatT):
        return declared.dim is None or declared.dim == literal.dim
    if isinstance(declared, TupleT) and isinstance(literal, TupleT):
        return len(declared.items) == len(literal.items) and all(
            _sort_accepts(d, l) for d, l in zip(declared.items, literal.items)
        )
    return declared == literal


def _build_grammar(pf: ProblemFile) -> tuple[Grammar | None, list[str]]:
    diags = []
    decls = []
    for name, i, o in pf.nonterminals:
        if i is None or o is None:
            diags.append(f"nonterminal {name}: unusable sort")
            continue
        decls.append(NonterminalDecl(name, i, o))
    if pf.start is None:
        diags.append("missing (start ...) declaration")
        return None, diags
    prods = [Production(s.lhs, s.operator, s.children, tuple(s.rules), s.recursive) for s in pf.productions]
    try:
        g = Grammar(tuple(decls), pf.start, tuple(prods))
    except GrammarError as exc:
        diags.append(str(exc))
        return None, diags
    for nt in g.decls:
        if not g.by_lhs[nt]:
            diags.append(f"nonterminal {nt} has no productions")
    return g, diags


def validate(pf: ProblemFile) -> list[str]:
    """All diagnostics for ``pf``; empty means it loads."""
    diags = list(pf.diagnostics)
    g, more = _build_grammar(pf)
    diags += more
    if g is None:
        return diags
    type_diags = rule_diagnostics(g)
    diags += type_diags
    start = g.decls[g.start]
    for k, (vi, ti, vo, to) in enumerate(pf.examples):
        if ti is None or to is None:
            continue
        if not _sort_accepts(start.input_type, ti):
            diags.append(f"example {k}: input has sort {ti}, expected {start.input_type}")
        if not _sort_accepts(start.output_type, to):
            diags.append(f"example {k}: output has sort {to}, expected {start.output_type}")
    if not pf.examples:
        diags.append("problem has no examples")
    if not diags:
        diags += _guard_overlaps(pf, g)
    return diags


def _guard_overlaps(pf: ProblemFile, g: Grammar) -> list[str]:
    """At most one guard may hold; checked on each production's sample inputs."""
    from monoprune.chc import compile_rules
    from monoprune.orders import DomainSample

    guarded = [p for p in g.productions if sum(r.guard is not None for r in p.rules) > 1]
    if not guarded:
        return []
    compile_rules(g)
    sample = DomainSample()
    out = []
    for p in guarded:
        in_t = g.decls[p.lhs].input_type
        points = list(sample.values(in_t, limit=2000))
        if p.lhs == g.start:
            points += [ex[0] for ex in pf.examples]
        for x in points:
            held = [r for r in p.rules if r.guard_fn is not None and r.guard_fn(x, [], None)]
            if len(held) > 1:
                out.append(f"{p.name}: several guards hold on input {format_value(x, in_t)}")
                break
    return out


def build_problem(pf: ProblemFile) -> Problem:
    diags = validate(pf)
    if diags:
        raise ProblemError(diags)
    g, _ = _build_grammar(pf)
    examples = tuple(Example(vi, vo) for vi, _, vo, _ in pf.examples)
    return Problem(pf.name, g, examples, pf.alphabet, dict(pf.order_hints)).compile()


def load_problem(text: str) -> Problem:
    return build_problem(parse_problem(text))


def read_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return load_problem(fh.read())


# ---------------------------------------------------------------------------
# printing


def format_sort(t: SemType) -> str:
    return str(t)


def format_expr(e: Expr) -> str:
    from monoprune.chc import format_expr as fe

    return fe(e)


def print_problem(pf: ProblemFile | Problem) -> str:
    """Canonical text; ``print(parse(print(p))) == print(p)``."""
    if isinstance(pf, Problem):
        pf = problem_to_file(pf)
    lines = [f"(problem {pf.name})"]
    if pf.alphabet is not None:
        lines.append(f"(alphabet {quote(pf.alphabet)})")
    for key in sorted(pf.order_hints):
        lines.append(f"(order {key} {pf.order_hints[key]})")
    decl_sorts = {}
    for name, i, o in pf.nonterminals:
        decl_sorts[name] = (i, o)
        lines.append(f"(nonterminal {name} {_sort_text(i)} {_sort_text(o)})")
    lines.append(f"(start {pf.start})")
    for p in pf.productions:
        head = f"(production {p.lhs} {p.operator} (" + " ".join(p.children) + ")"
        if p.recursive:
            head += " recursive"
        lines.append(head)
        for k, r in enumerate(p.rules):
            parts = []
            if r.guard is not None:
                parts.append(f"(guard {format_expr(r.guard)})")
            if r.child_inputs:
                parts.append("(inputs " + " ".join(format_expr(e) for e in r.child_inputs) + ")")
            parts.append(f"(output {format_expr(r.output)})")
            close = ")" if k == len(p.rules) - 1 else ""
            lines.append("  (rule " + " ".join(parts) + ")" + close)
    start_sorts = decl_sorts.get(pf.start, (None, None))
    for vi, ti, vo, to in pf.examples:
        lines.append(f"(example {_value_text(vi, start_sorts[0] or ti)} {_value_text(vo, start_sorts[1] or to)})")
    return "\n".join(lines) + "\n"


def _sort_text(t: SemType | None) -> str:
    return "?" if t is None else str(t)


def _value_text(v, t: SemType) -> str:
    if isinstance(t, MatT) and t.dim is None:
        t = MatT(v.dim)
    if isinstance(t, TupleT):
        return "(tuple " + " ".join(_value_text(x, s) for x, s in zip(v, t.items)) + ")"
    return format_value(v, t)


def problem_to_file(p: Problem) -> ProblemFile:
    g = p.grammar
    start = g.decls[g.start]
    return ProblemFile(
        name=p.name,
        alphabet=p.alphabet,
        order_hints=dict(p.order_hints),
        nonterminals=[(d.name, d.input_type, d.output_type) for d in g.nonterminals],
        start=g.start,
        productions=[
            ProductionSpec(q.lhs, q.operator, q.children, list(q.rules), q.recursive) for q in g.productions
        ],
        examples=[(ex.input, start.input_type, ex.output, start.output_type) for ex in p.examples],
    )
