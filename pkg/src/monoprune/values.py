"""Semantic sorts and the concrete value representation.

Values are plain Python objects chosen by sort:

* ``int``: Python ``int``; ``float('inf')``/``-inf`` only appear as interval
  endpoints, never as the result of concrete evaluation;
* ``bool``: Python ``bool``;
* ``bitvec(w)``: Python ``int`` in ``[0, 2**w)``;
* ``tuple(...)``: Python ``tuple``;
* ``boolmatrix``: :class:`BoolMatrix`;
* ``string``: :class:`CharMatrices`, a tuple of one character matrix per
  alphabet symbol (strings are not a sort of their own).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

from monoprune import kernels

INF = float("inf")
NEG_INF = float("-inf")


class SemType:
    """Base class for sorts."""

    __slots__ = ()

    def base_key(self) -> str | None:
        """Key used by order assignments; ``None`` for compound sorts."""
        return None

    @property
    def components(self) -> tuple[SemType, ...]:
        return ()


@dataclass(frozen=True)
class IntT(SemType):
    def base_key(self):
        return "int"

    def __str__(self):
        return "int"


@dataclass(frozen=True)
class BoolT(SemType):
    def base_key(self):
        return "bool"

    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class BVT(SemType):
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("bitvector width must be >= 1")

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    def base_key(self):
        return f"bv{self.width}"

    def __str__(self):
        return f"(bitvec {self.width})"


@dataclass(frozen=True)
class MatT(SemType):
    """Upper-triangular Boolean matrix; ``dim=None`` takes the input's size."""

    dim: int | None = None

    def __post_init__(self):
        if self.dim is not None and self.dim < 1:
            raise ValueError("matrix dimension must be >= 1")

    def base_key(self):
        return "matrix"

    def __str__(self):
        return "boolmatrix" if self.dim is None else f"(boolmatrix {self.dim})"


@dataclass(frozen=True)
class TupleT(SemType):
    items: tuple[SemType, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("tuple sorts must be nonempty")

    @property
    def components(self):
        return self.items

    def __str__(self):
        return "(tuple " + " ".join(str(t) for t in self.items) + ")"


@dataclass(frozen=True)
class StrT(SemType):
    """An input string, pre-compiled into one matrix per alphabet symbol."""

    alphabet: str

    @property
    def items(self) -> tuple[SemType, ...]:
        return (MatT(None),) * len(self.alphabet)

    @property
    def components(self):
        return self.items

    def __str__(self):
        return "string"


def is_tuple_sort(t: SemType) -> bool:
    return isinstance(t, (TupleT, StrT))


def base_sorts(t: SemType) -> Iterator[SemType]:
    """All non-compound sorts occurring in ``t``."""
    if is_tuple_sort(t):
        for c in t.components:
            yield from base_sorts(c)
    else:
        yield t


def matrix_path(t: SemType) -> tuple[int, ...] | None:
    """Projection path to the first matrix inside ``t`` (``()`` if ``t`` is one)."""
    if isinstance(t, MatT):
        return ()
    if is_tuple_sort(t):
        for i, c in enumerate(t.components):
            sub = matrix_path(c)
            if sub is not None:
                return (i,) + sub
    return None


def has_dynamic_matrix(t: SemType) -> bool:
    return any(isinstance(b, MatT) and b.dim is None for b in base_sorts(t))


def finite_size(t: SemType) -> int | None:
    """Number of values of a finite sort, or ``None`` for infinite/dim-dependent ones."""
    if isinstance(t, BoolT):
        return 2
    if isinstance(t, BVT):
        return 1 << t.width
    if isinstance(t, MatT) and t.dim is not None:
        return 1 << (t.dim * (t.dim + 1) // 2)
    if is_tuple_sort(t):
        n = 1
        for c in t.components:
            s = finite_size(c)
            if s is None:
                return None
            n *= s
        return n
    return None


class BoolMatrix:
    """Upper-triangular Boolean matrix stored as row bitmasks."""

    __slots__ = ("rows", "_hash")

    def __init__(self, rows: tuple[int, ...]):
        self.rows = rows
        self._hash = None

    @property
    def dim(self) -> int:
        return len(self.rows)

    @classmethod
    def zero(cls, n: int) -> BoolMatrix:
        return cls((0,) * n)

    @classmethod
    def identity(cls, n: int) -> BoolMatrix:
        return cls(tuple(1 << i for i in range(n)))

    @classmethod
    def ones(cls, n: int) -> BoolMatrix:
        return cls(tuple(kernels.ones_row(n, i) for i in range(n)))

    @classmethod
    def from_bits(cls, bits: list[list[int]]) -> BoolMatrix:
        n = len(bits)
        rows = []
        for i, row in enumerate(bits):
            r = 0
            for j, b in enumerate(row):
                if b:
                    if j < i:
                        raise ValueError("entries below the diagonal must be 0")
                    r |= 1 << j
            rows.append(r)
        if any(len(row) != n for row in bits):
            raise ValueError("matrix must be square")
        return cls(tuple(rows))

    def get(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def to_bits(self) -> list[str]:
        n = len(self.rows)
        return ["".join("1" if r >> j & 1 else "0" for j in range(n)) for r in self.rows]

    def __eq__(self, other):
        return isinstance(other, BoolMatrix) and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("M", self.rows))
        return self._hash

    def __repr__(self):
        return f"BoolMatrix({'/'.join(self.to_bits())})"


def char_matrix(text: str, c: str) -> BoolMatrix:
    """Entry ``(i, i+1)`` is set iff ``text[i] == c``."""
    n = len(text) + 1
    return BoolMatrix(tuple((1 << (i + 1)) if i < len(text) and text[i] == c else 0 for i in range(n)))


class CharMatrices(tuple):
    """A string compiled to per-character matrices; remembers its text."""

    text: str
    alphabet: str

    def __new__(cls, text: str, alphabet: str):
        unknown = set(text) - set(alphabet)
        if unknown:
            raise ValueError(f"characters {sorted(unknown)!r} not in alphabet {alphabet!r}")
        self = super().__new__(cls, (char_matrix(text, c) for c in alphabet))
        self.text = text
        self.alphabet = alphabet
        return self

    def __getnewargs__(self):
        return (self.text, self.alphabet)

    def __repr__(self):
        return f"CharMatrices({self.text!r})"


def matrix_dim(value: Any, path: tuple[int, ...] | None) -> int | None:
    if path is None:
        return None
    for i in path:
        value = value[i]
    return value.dim


def format_value(v: Any, t: SemType) -> str:
    """s-expression rendering used by problem files and term printing."""
    if isinstance(t, IntT):
        if v == INF:
            return "inf"
        if v == NEG_INF:
            return "-inf"
        return str(int(v))
    if isinstance(t, BoolT):
        return "true" if v else "false"
    if isinstance(t, BVT):
        return f"(bv {t.width} {v})"
    if isinstance(t, StrT):
        return "(str " + quote(v.text) + ")"
    if isinstance(t, TupleT):
        return "(tuple " + " ".join(format_value(x, s) for x, s in zip(v, t.items)) + ")"
    if isinstance(t, MatT):
        return "(matrix " + " ".join(quote(r) for r in v.to_bits()) + ")"
    raise TypeError(f"unknown sort {t!r}")


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'
