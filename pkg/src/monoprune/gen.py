"""Deterministic benchmark generators.

Every family returns a list of canonical problem texts.  The fixed problems
(the imperative swap, the regex and CSV problems, the bitvector toy) come
first, followed by seeded random instances.
"""

from __future__ import annotations

import itertools
import random

from monoprune.problemfile import parse_problem, print_problem
from monoprune.values import quote


class UnknownFamily(ValueError):
    pass


def _canonical(text: str) -> str:
    return print_problem(parse_problem(text))


# ---------------------------------------------------------------------------
# imperative


IMP_STATE = "(tuple int int)"

IMP_S = """
(production S assignX (E) (rule (inputs x) (output (tuple (y 1) (proj x 1)))))
(production S assignY (E) (rule (inputs x) (output (tuple (proj x 0) (y 1)))))
(production S seq (S S) (rule (inputs x (y 1)) (output (y 2))))
"""

IMP_E_LEAVES = """
(production E zero () (rule (output 0)))
(production E one () (rule (output 1)))
(production E x () (rule (output (proj x 0))))
(production E y () (rule (output (proj x 1))))
(production E plus (E E) (rule (inputs x x) (output (+ (y 1) (y 2)))))
"""

IMP_E_MINUS = """
(production E minus (E E) (rule (inputs x x) (output (- (y 1) (y 2)))))
"""


def _imp_header(name: str) -> str:
    return f"""
(problem {name})
(nonterminal S {IMP_STATE} {IMP_STATE})
(nonterminal E {IMP_STATE} int)
(start S)
"""


def imp_swap() -> str:
    return _canonical(
        _imp_header("imp_swap")
        + IMP_S
        + IMP_E_LEAVES
        + IMP_E_MINUS
        + """
(example (tuple 4 2) (tuple 2 4))
(example (tuple 3 3) (tuple 3 3))
"""
    )


def gi_plus() -> str:
    """The imperative grammar without subtraction; solution ``x := x + y``."""
    return _canonical(
        _imp_header("gi_plus")
        + IMP_S
        + IMP_E_LEAVES
        + """
(example (tuple 1 3) (tuple 4 3))
(example (tuple 2 5) (tuple 7 5))
"""
    )


def imp_loop() -> str:
    """A while loop; the loop production is never claimed monotone."""
    return _canonical(
        _imp_header("imp_loop")
        + "(nonterminal B (tuple int int) bool)\n"
        + IMP_S
        + """
(production S while (B S) recursive
  (rule (inputs x x) (output (ite (y 1) (self (y 2)) x))))
(production B lt (E E) (rule (inputs x x) (output (< (y 1) (y 2)))))
"""
        + IMP_E_LEAVES
        + """
(example (tuple 0 3) (tuple 3 3))
(example (tuple 5 2) (tuple 5 2))
(example (tuple 1 4) (tuple 4 4))
"""
    )


def unrealizable() -> str:
    """``E ::= 0 | 1 + E`` can never produce a negative number."""
    return _canonical(
        """
(problem unrealizable)
(nonterminal E int int)
(start E)
(production E zero () (rule (output 0)))
(production E succ (E) (rule (inputs x) (output (+ 1 (y 1)))))
(example 0 -1)
"""
    )


def _random_imp(rng: random.Random, index: int) -> str:
    leaves = ["zero", "one", "x", "y"]

    def expr(depth):
        if depth == 0 or rng.random() < 0.5:
            return rng.choice(leaves)
        return f"({rng.choice(['plus', 'minus'])} {expr(depth - 1)} {expr(depth - 1)})"

    stmts = [f"({rng.choice(['assignX', 'assignY'])} {expr(1)})" for _ in range(rng.randint(1, 2))]
    term = stmts[0] if len(stmts) == 1 else f"(seq {stmts[0]} {stmts[1]})"
    base = _imp_header(f"imp_random_{index}") + IMP_S + IMP_E_LEAVES + IMP_E_MINUS
    from monoprune.chc import eval_term
    from monoprune.grammar import parse_term
    from monoprune.problemfile import build_problem

    prob = build_problem(parse_problem(base + "(example (tuple 0 0) (tuple 0 0))"))
    t = parse_term(prob.grammar, term)
    examples = []
    for _ in range(3):
        a, b = rng.randint(-5, 5), rng.randint(-5, 5)
        ox, oy = eval_term(t, (a, b))
        examples.append(f"(example (tuple {a} {b}) (tuple {ox} {oy}))")
    return _canonical(base + "\n".join(examples))


def gen_imp(seed: int) -> list[str]:
    rng = random.Random(seed)
    return [imp_swap(), gi_plus(), imp_loop(), unrealizable()] + [_random_imp(rng, i) for i in range(2)]


# ---------------------------------------------------------------------------
# regular expressions over Boolean matrices

REGEX_OPS = """
(production R eps () (rule (output (mid))))
(production R empty () (rule (output (mzero))))
(production R union (R R) (rule (inputs x x) (output (madd (y 1) (y 2)))))
(production R concat (R R) (rule (inputs x x) (output (mmul (y 1) (y 2)))))
(production R star (R) (rule (inputs x) (output (mstar (y 1)))))
(production R neg (R) (rule (inputs x) (output (mneg (y 1)))))
"""


def _char_prods(nt: str, chars: str) -> str:
    return "".join(
        f"(production {nt} {_char_op(c)} () (rule (output (char {quote(c)}))))\n" for c in chars
    )


def _char_op(c: str) -> str:
    if c.isalnum():
        return f"c{c}"
    return {",": "comma", " ": "space"}.get(c, f"u{ord(c):04x}")


def _accepts_header(name: str, alphabet: str, nt: str) -> str:
    return f"""
(problem {name})
(alphabet {quote(alphabet)})
(nonterminal S string bool)
(nonterminal {nt} string boolmatrix)
(start S)
(production S accepts ({nt}) (rule (inputs x) (output (maccepts (y 1)))))
"""


def regex_matrix() -> str:
    examples = [("1", True), ("10", True), ("111", True), ("0", False), ("00", False), ("100", False)]
    return _canonical(
        _accepts_header("regex_matrix", "01", "R")
        + _char_prods("R", "01")
        + REGEX_OPS
        + "".join(f"(example (str {quote(s)}) {'true' if b else 'false'})\n" for s, b in examples)
    )


LETTERS = "abcdefghijklmnopqrstuvwxyz"
DIGITS = "0123456789"


def _csv(name: str, letters: str, digits: str, extra: str, examples) -> str:
    alphabet = letters + digits + "," + extra
    body = _accepts_header(name, alphabet, "Row")
    body += "(nonterminal Alpha string boolmatrix)\n(nonterminal Num string boolmatrix)\n"
    body += """
(production Row alpha (Alpha) (rule (inputs x) (output (y 1))))
(production Row num (Num) (rule (inputs x) (output (y 1))))
(production Row alphaRow (Alpha Row)
  (rule (inputs x x) (output (mmul (mmul (y 1) (char ",")) (y 2)))))
(production Row numRow (Num Row)
  (rule (inputs x x) (output (mmul (mmul (y 1) (char ",")) (y 2)))))
"""
    for nt, chars in (("Alpha", letters), ("Num", digits)):
        body += _char_prods(nt, chars)
        body += f"""
(production {nt} concat ({nt} {nt}) (rule (inputs x x) (output (mmul (y 1) (y 2)))))
(production {nt} union ({nt} {nt}) (rule (inputs x x) (output (madd (y 1) (y 2)))))
(production {nt} star ({nt}) (rule (inputs x) (output (mstar (y 1)))))
"""
    body += "".join(f"(example (str {quote(s)}) {'true' if b else 'false'})\n" for s, b in examples)
    return _canonical(body)


def csv_record() -> str:
    """The CSV grammar with the single positive example ``"303, name"``.

    The space is not derivable by the grammar, so the problem is
    unrealizable; it exists to exercise hole abstractions and pruning.
    """
    return _csv("csv_record", LETTERS, DIGITS, " ", [("303, name", True)])


def csv_small() -> str:
    """A solvable two-column CSV problem over a reduced alphabet."""
    examples = [("1,a", True), ("0,b", True), ("a,1", False), ("1", False), ("1,", False), (",a", False)]
    return _csv("csv_small", "ab", "01", "", examples)


def _regex_matches(term, s: str) -> bool:
    import re

    return re.fullmatch(term, s) is not None


def _random_regex(rng: random.Random, index: int) -> str:
    def build(depth):
        if depth == 0 or rng.random() < 0.35:
            c = rng.choice("01")
            return c, f"c{c}"
        op = rng.choice(["union", "concat", "star"])
        if op == "star":
            r, t = build(depth - 1)
            return f"(?:{r})*", f"(star {t})"
        (r1, t1), (r2, t2) = build(depth - 1), build(depth - 1)
        if op == "union":
            return f"(?:{r1}|{r2})", f"(union {t1} {t2})"
        return f"(?:{r1}{r2})", f"(concat {t1} {t2})"

    pattern, _ = build(3)
    strings = ["".join(p) for n in range(1, 5) for p in itertools.product("01", repeat=n)]
    rng.shuffle(strings)
    chosen = sorted(strings[:8], key=lambda s: (len(s), s))
    examples = [(s, _regex_matches(pattern, s)) for s in chosen]
    return _canonical(
        _accepts_header(f"regex_random_{index}", "01", "R")
        + _char_prods("R", "01")
        + REGEX_OPS
        + "".join(f"(example (str {quote(s)}) {'true' if b else 'false'})\n" for s, b in examples)
    )


def gen_regex(seed: int) -> list[str]:
    rng = random.Random(seed)
    return [regex_matrix(), csv_record()] + [_random_regex(rng, i) for i in range(2)]


def _random_csv(rng: random.Random, index: int) -> str:
    letters, digits = "ab", "01"

    def field_(chars):
        return "".join(rng.choice(chars) for _ in range(rng.randint(1, 2)))

    kinds = [rng.choice("AN") for _ in range(2)]
    pos = []
    for _ in range(3):
        pos.append(",".join(field_(letters if k == "A" else digits) for k in kinds))
    neg = [",".join(field_(digits if k == "A" else letters) for k in kinds), pos[0] + ","]
    examples = [(s, True) for s in sorted(set(pos))] + [(s, False) for s in neg if s not in pos]
    return _csv(f"csv_random_{index}", letters, digits, "", examples)


def gen_csv(seed: int) -> list[str]:
    rng = random.Random(seed)
    return [csv_record(), csv_small()] + [_random_csv(rng, i) for i in range(2)]


# ---------------------------------------------------------------------------
# Boolean formulas


def _bool_grammar(style: str, nvars: int) -> str:
    var_prods = "".join(f"(production V v{i} () (rule (output (proj x {i}))))\n" for i in range(nvars))
    lit = """
(production L pos (V) (rule (inputs x) (output (y 1))))
(production L neg (V) (rule (inputs x) (output (not (y 1)))))
"""
    sort = "(tuple " + " ".join(["bool"] * nvars) + ")"
    decl = lambda nt: f"(nonterminal {nt} {sort} bool)\n"  # noqa: E731
    if style == "cube":
        nts = ["F", "L", "V"]
        top = """
(production F lit (L) (rule (inputs x) (output (y 1))))
(production F and (L F) (rule (inputs x x) (output (and (y 1) (y 2)))))
"""
    else:
        outer, inner = ("and", "or") if style == "cnf" else ("or", "and")
        nts = ["F", "C", "L", "V"]
        top = f"""
(production F clause (C) (rule (inputs x) (output (y 1))))
(production F {outer} (C F) (rule (inputs x x) (output ({outer} (y 1) (y 2)))))
(production C lit (L) (rule (inputs x) (output (y 1))))
(production C {inner} (L C) (rule (inputs x x) (output ({inner} (y 1) (y 2)))))
"""
    return "".join(decl(n) for n in nts) + "(start F)\n" + top + lit + var_prods


def boolean_problem(style: str, rng: random.Random, index: int) -> str:
    nvars = rng.randint(3, 4)
    nclauses = 1 if style == "cube" else rng.randint(1, 2)
    width = rng.randint(2, 3) if style == "cube" else 2
    clauses = []
    for _ in range(nclauses):
        vs = rng.sample(range(nvars), width)
        clauses.append([(v, rng.random() < 0.5) for v in vs])

    def holds(bits):
        lits = lambda cl: [bits[v] != neg for v, neg in cl]  # noqa: E731
        if style == "cube":
            return all(lits(clauses[0]))
        if style == "cnf":
            return all(any(lits(cl)) for cl in clauses)
        return any(all(lits(cl)) for cl in clauses)

    examples = []
    for bits in itertools.product([False, True], repeat=nvars):
        vals = " ".join("true" if b else "false" for b in bits)
        examples.append(f"(example (tuple {vals}) {'true' if holds(bits) else 'false'})")
    return _canonical(f"(problem boolean_{style}_{index})\n" + _bool_grammar(style, nvars) + "\n".join(examples))


BOOLEAN_STYLES = ("cube", "cnf", "dnf")


def gen_boolean(seed: int, styles=BOOLEAN_STYLES, count: int = 2) -> list[str]:
    rng = random.Random(seed)
    return [boolean_problem(style, rng, i) for style in styles for i in range(count)]


# ---------------------------------------------------------------------------
# bitvectors


def bitvec_toy() -> str:
    """Bitvector toy grammar with saturating addition at width 8."""
    return _canonical(
        """
(problem bitvec_toy)
(nonterminal B (bitvec 8) (bitvec 8))
(start B)
(production B x () (rule (output x)))
(production B bvand (B B) (rule (inputs x x) (output (bvand (y 1) (y 2)))))
(production B bvor (B B) (rule (inputs x x) (output (bvor (y 1) (y 2)))))
(production B bvadd (B B) (rule (inputs x x) (output (bvsadd (y 1) (y 2)))))
(example (bv 8 1) (bv 8 2))
(example (bv 8 100) (bv 8 200))
(example (bv 8 200) (bv 8 255))
"""
    )


def bitvec_problem(semantics: str, rng: random.Random, index: int, width: int = 4) -> str:
    add = "bvadd" if semantics == "standard" else "bvsadd"
    sort = f"(bitvec {width})"
    text = f"""
(problem bitvec_{semantics}_{index})
(nonterminal B (tuple {sort} {sort}) {sort})
(start B)
(production B a () (rule (output (proj x 0))))
(production B b () (rule (output (proj x 1))))
(production B bvand (B B) (rule (inputs x x) (output (bvand (y 1) (y 2)))))
(production B bvor (B B) (rule (inputs x x) (output (bvor (y 1) (y 2)))))
(production B bvxor (B B) (rule (inputs x x) (output (bvxor (y 1) (y 2)))))
(production B bvnot (B) (rule (inputs x) (output (bvnot (y 1)))))
(production B add (B B) (rule (inputs x x) (output ({add} (y 1) (y 2)))))
"""
    mask = (1 << width) - 1
    ops = {
        "bvand": lambda a, b: a & b,
        "bvor": lambda a, b: a | b,
        "bvxor": lambda a, b: a ^ b,
        "add": (lambda a, b: (a + b) & mask) if semantics == "standard" else (lambda a, b: min(a + b, mask)),
    }
    leaves = {"a": lambda a, b: a, "b": lambda a, b: b}

    def build(depth):
        if depth == 0 or rng.random() < 0.4:
            return leaves[rng.choice(sorted(leaves))]
        if rng.random() < 0.2:
            f = build(depth - 1)
            return lambda a, b: ~f(a, b) & mask
        name = rng.choice(sorted(ops))
        f, g = build(depth - 1), build(depth - 1)
        return lambda a, b: ops[name](f(a, b), g(a, b))

    target = build(2)
    lines = []
    for _ in range(4):
        a, b = rng.randrange(mask + 1), rng.randrange(mask + 1)
        lines.append(f"(example (tuple (bv {width} {a}) (bv {width} {b})) (bv {width} {target(a, b)}))")
    return _canonical(text + "\n".join(lines))


def gen_bitvec(seed: int, semantics=("standard", "saturating"), count: int = 2) -> list[str]:
    rng = random.Random(seed)
    return [bitvec_toy()] + [bitvec_problem(s, rng, i) for s in semantics for i in range(count)]


FAMILIES = {
    "imp": gen_imp,
    "regexMatrix": gen_regex,
    "csv": gen_csv,
    "boolean": gen_boolean,
    "boolean-cube": lambda seed: gen_boolean(seed, ("cube",)),
    "boolean-cnf": lambda seed: gen_boolean(seed, ("cnf",)),
    "boolean-dnf": lambda seed: gen_boolean(seed, ("dnf",)),
    "bitvec": gen_bitvec,
    "bitvec-standard": lambda seed: gen_bitvec(seed, ("standard",)),
    "bitvec-saturating": lambda seed: gen_bitvec(seed, ("saturating",)),
}


def gen(family: str, seed: int = 0) -> list[str]:
    """Canonical problem texts for ``family``; deterministic in ``seed``."""
    try:
        fn = FAMILIES[family]
    except KeyError:
        raise UnknownFamily(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    return fn(seed)


def bundled_sources() -> dict[str, str]:
    """Name → canonical text of every problem shipped with the package."""
    rng = random.Random(0)
    items = {
        "imp_swap": imp_swap(),
        "gi_plus": gi_plus(),
        "imp_loop": imp_loop(),
        "unrealizable": unrealizable(),
        "regex_matrix": regex_matrix(),
        "csv_record": csv_record(),
        "csv_small": csv_small(),
        "bitvec_toy": bitvec_toy(),
    }
    items["boolean_cnf"] = boolean_problem("cnf", rng, 0).replace("boolean_cnf_0", "boolean_cnf")
    items["bitvec_saturating"] = bitvec_problem("saturating", random.Random(1), 0).replace(
        "bitvec_saturating_0", "bitvec_saturating"
    )
    return items
