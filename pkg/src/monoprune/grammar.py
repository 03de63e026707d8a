"""Regular tree grammars, partial programs, and one-step derivation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from monoprune.values import SemType


class GrammarError(ValueError):
    pass


class NoHole(ValueError):
    pass


class NonterminalMismatch(ValueError):
    pass


@dataclass(frozen=True)
class NonterminalDecl:
    name: str
    input_type: SemType
    output_type: SemType


@dataclass(eq=False)
class Production:
    """``lhs -> operator(children...)`` with its semantic rules.

    ``rules`` holds :class:`monoprune.chc.ChcRule` objects.  ``index`` is the
    position in :attr:`Grammar.productions` and is assigned by the grammar.
    """

    lhs: str
    operator: str
    children: tuple[str, ...]
    rules: tuple[Any, ...]
    recursive: bool = False
    index: int = -1

    @property
    def name(self) -> str:
        return f"{self.lhs}.{self.operator}"

    @property
    def arity(self) -> int:
        return len(self.children)

    def __repr__(self):
        return f"<Production {self.name}({', '.join(self.children)})>"


@dataclass(eq=False)
class Grammar:
    nonterminals: tuple[NonterminalDecl, ...]
    start: str
    productions: tuple[Production, ...]
    by_lhs: dict[str, tuple[Production, ...]] = field(init=False, repr=False)
    decls: dict[str, NonterminalDecl] = field(init=False, repr=False)

    def __post_init__(self):
        self.decls = {}
        for d in self.nonterminals:
            if d.name in self.decls:
                raise GrammarError(f"nonterminal {d.name} declared twice")
            self.decls[d.name] = d
        if self.start not in self.decls:
            raise GrammarError(f"start nonterminal {self.start} is not declared")
        seen = set()
        by_lhs: dict[str, list[Production]] = {d.name: [] for d in self.nonterminals}
        for i, p in enumerate(self.productions):
            if p.lhs not in self.decls:
                raise GrammarError(f"production {p.name}: undeclared nonterminal {p.lhs}")
            for c in p.children:
                if c not in self.decls:
                    raise GrammarError(f"production {p.name}: undeclared nonterminal {c}")
            if (p.lhs, p.operator) in seen:
                raise GrammarError(f"duplicate operator {p.operator} for nonterminal {p.lhs}")
            if not p.rules:
                raise GrammarError(f"production {p.name} has no rules")
            seen.add((p.lhs, p.operator))
            p.index = i
            by_lhs[p.lhs].append(p)
        self.by_lhs = {k: tuple(v) for k, v in by_lhs.items()}

    def production(self, name: str) -> Production:
        lhs, _, op = name.partition(".")
        for p in self.by_lhs.get(lhs, ()):
            if p.operator == op:
                return p
        raise KeyError(name)

    def find(self, lhs: str, operator: str) -> Production:
        return self.production(f"{lhs}.{operator}")


class Hole:
    """An unexpanded occurrence of a nonterminal."""

    __slots__ = ("nonterminal",)
    size = 1
    holes = 1
    depth = 1

    def __init__(self, nonterminal: str):
        self.nonterminal = nonterminal

    @property
    def complete(self) -> bool:
        return False

    def __eq__(self, other):
        return isinstance(other, Hole) and other.nonterminal == self.nonterminal

    def __hash__(self):
        return hash(("?", self.nonterminal))

    def __repr__(self):
        return f"?{self.nonterminal}"


class Node:
    """Application of a production to child terms; immutable."""

    __slots__ = ("production", "children", "size", "holes", "depth", "_hash")

    def __init__(self, production: Production, children: tuple = ()):
        self.production = production
        self.children = children
        size, holes, depth = 1, 0, 0
        for c in children:
            size += c.size
            holes += c.holes
            if c.depth > depth:
                depth = c.depth
        self.size = size
        self.holes = holes
        self.depth = depth + 1
        self._hash = None

    @property
    def complete(self) -> bool:
        return self.holes == 0

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Node)
            and other.production is self.production
            and other.children == self.children
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.production.index, self.children))
        return self._hash

    def __repr__(self):
        return format_term(self)


Term = Hole | Node


def is_complete(t: Term) -> bool:
    return t.holes == 0


def size(t: Term) -> int:
    return t.size


def leftmost_hole(t: Term) -> tuple[list[int], str] | None:
    """Path (child indices) and tag of the depth-first leftmost hole."""
    path: list[int] = []
    while isinstance(t, Node):
        if t.holes == 0:
            return None
        for i, c in enumerate(t.children):
            if c.holes:
                path.append(i)
                t = c
                break
    if isinstance(t, Hole):
        return path, t.nonterminal
    return None


def _fill(t: Term, repl: Node) -> Term:
    if isinstance(t, Hole):
        return repl
    kids = t.children
    for i, c in enumerate(kids):
        if c.holes:
            return Node(t.production, kids[:i] + (_fill(c, repl),) + kids[i + 1 :])
    raise NoHole("term has no hole")


def expand(t: Term, p: Production) -> Term:
    """Replace the leftmost hole of ``t`` with ``p`` applied to fresh holes."""
    found = leftmost_hole(t)
    if found is None:
        raise NoHole("term is complete")
    if found[1] != p.lhs:
        raise NonterminalMismatch(f"leftmost hole is {found[1]}, production expands {p.lhs}")
    repl = Node(p, tuple(Hole(c) for c in p.children))
    return _fill(t, repl)


def expand_unchecked(t: Term, p: Production) -> Term:
    """:func:`expand` without validation; the caller guarantees the hole matches."""
    return _fill(t, Node(p, tuple(Hole(c) for c in p.children)))


def holes_in_order(t: Term) -> Iterator[tuple[list[int], str]]:
    """All holes in depth-first left-to-right order."""

    def walk(u, path):
        if isinstance(u, Hole):
            yield list(path), u.nonterminal
        else:
            for i, c in enumerate(u.children):
                yield from walk(c, path + [i])

    yield from walk(t, [])


def root_nonterminal(t: Term) -> str:
    return t.nonterminal if isinstance(t, Hole) else t.production.lhs


def well_formed(grammar: Grammar, t: Term, nonterminal: str | None = None) -> bool:
    """Recursive membership check of a (partial) term against the grammar."""
    nonterminal = nonterminal or grammar.start
    if isinstance(t, Hole):
        return t.nonterminal == nonterminal
    p = t.production
    if p.lhs != nonterminal or p not in grammar.by_lhs.get(nonterminal, ()):
        return False
    if len(t.children) != len(p.children):
        return False
    return all(well_formed(grammar, c, n) for c, n in zip(t.children, p.children))


def format_term(t: Term) -> str:
    if isinstance(t, Hole):
        return f"?{t.nonterminal}"
    if not t.children:
        return t.production.operator
    return "(" + t.production.operator + " " + " ".join(format_term(c) for c in t.children) + ")"


def parse_term(grammar: Grammar, text: str, nonterminal: str | None = None) -> Term:
    """Inverse of :func:`format_term`; operators are resolved per nonterminal."""
    from monoprune.sexp import parse_one, Sym

    def build(sx, nt):
        if isinstance(sx, Sym):
            name = str(sx)
            if name.startswith("?"):
                if name[1:] != nt:
                    raise GrammarError(f"hole {name} where {nt} expected")
                return Hole(nt)
            return Node(grammar.find(nt, name), ())
        if isinstance(sx, list) and sx and isinstance(sx[0], Sym):
            p = grammar.find(nt, str(sx[0]))
            if len(sx) - 1 != p.arity:
                raise GrammarError(f"{p.name} expects {p.arity} children")
            return Node(p, tuple(build(c, n) for c, n in zip(sx[1:], p.children)))
        raise GrammarError(f"malformed term {sx!r}")

    return build(parse_one(text), nonterminal or grammar.start)


def enumerate_complete(grammar: Grammar, nonterminal: str, max_size: int) -> Iterable[Term]:
    """Every complete term of ``nonterminal`` with size <= ``max_size``, by size."""
    memo: dict[tuple[str, int], list[Term]] = {}

    def exact(nt: str, n: int) -> list[Term]:
        key = (nt, n)
        if key in memo:
            return memo[key]
        out: list[Term] = []
        if n >= 1:
            for p in grammar.by_lhs[nt]:
                for kids in _splits(p.children, n - 1):
                    out.append(Node(p, kids))
        memo[key] = out
        return out

    def _splits(nts, budget):
        if not nts:
            if budget == 0:
                yield ()
            return
        rest = len(nts) - 1
        for k in range(1, budget - rest + 1):
            for first in exact(nts[0], k):
                for tail in _splits(nts[1:], budget - k):
                    yield (first,) + tail

    for n in range(1, max_size + 1):
        yield from exact(nonterminal, n)


def count_complete(grammar: Grammar, nonterminal: str, max_size: int) -> list[int]:
    """``counts[n]`` = number of complete terms of exactly size ``n`` (DP)."""
    nts = list(grammar.decls)
    table = {nt: [0] * (max_size + 1) for nt in nts}
    for n in range(1, max_size + 1):
        for nt in nts:
            total = 0
            for p in grammar.by_lhs[nt]:
                # ways to split n - 1 among the children
                ways = [1] + [0] * (n - 1)
                for c in p.children:
                    nxt = [0] * n
                    for used, w in enumerate(ways):
                        if w:
                            for k in range(1, n - used):
                                nxt[used + k] += w * table[c][k]
                    ways = nxt
                total += ways[n - 1]
            table[nt][n] = total
    return table[nonterminal]
