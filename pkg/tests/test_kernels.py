import importlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoprune import _pykernels as py
from monoprune import kernels
from monoprune.values import BoolMatrix, CharMatrices, char_matrix

try:
    from monoprune import _ckernels as cy
except ImportError:  # extension not built
    cy = None

BACKENDS = [py] + ([cy] if cy is not None else [])


@st.composite
def upper(draw, n=None):
    n = draw(st.integers(1, 7)) if n is None else n
    return tuple(draw(st.integers(0, (1 << n) - 1)) & ~((1 << i) - 1) for i in range(n))


@st.composite
def pair(draw):
    n = draw(st.integers(1, 7))
    return draw(upper(n)), draw(upper(n))


def dense(a):
    n = len(a)
    return [[bool(a[i] >> j & 1) for j in range(n)] for i in range(n)]


def ref_mul(a, b):
    n = len(a)
    A, B = dense(a), dense(b)
    return tuple(sum(1 << j for j in range(n) if any(A[i][k] and B[k][j] for k in range(n))) for i in range(n))


def ref_closure(a):
    n = len(a)
    reach = dense(a)
    for i in range(n):
        reach[i][i] = True
    for k in range(n):
        for i in range(n):
            for j in range(n):
                reach[i][j] = reach[i][j] or (reach[i][k] and reach[k][j])
    return tuple(sum(1 << j for j in range(n) if reach[i][j]) for i in range(n))


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
@given(ab=pair())
def test_kernels_match_dense_reference(impl, ab):
    a, b = ab
    assert impl.mat_mul(a, b) == ref_mul(a, b)
    assert impl.mat_closure(a) == ref_closure(a)
    assert impl.mat_or(a, b) == tuple(x | y for x, y in zip(a, b))
    assert impl.mat_and(a, b) == tuple(x & y for x, y in zip(a, b))
    assert impl.mat_leq(a, b) == all(x & ~y == 0 for x, y in zip(a, b))
    comp = impl.mat_complement(a)
    assert impl.mat_or(a, comp) == tuple(impl.ones_row(len(a), i) for i in range(len(a)))
    assert impl.mat_and(a, comp) == (0,) * len(a)


@pytest.mark.skipif(cy is None, reason="compiled kernels not built")
@given(ab=pair())
def test_compiled_agrees_with_pure(ab):
    a, b = ab
    for name in ("mat_or", "mat_and", "mat_mul", "mat_leq"):
        assert getattr(cy, name)(a, b) == getattr(py, name)(a, b)
    assert cy.mat_closure(a) == py.mat_closure(a)
    assert cy.mat_complement(a) == py.mat_complement(a)


def test_pure_fallback_selected_by_env(monkeypatch):
    monkeypatch.setenv("MONOPRUNE_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("MONOPRUNE_PURE_PYTHON")
        importlib.reload(kernels)


def test_char_matrix_marks_positions():
    m = char_matrix("101", "1")
    assert m.to_bits() == ["0100", "0000", "0001", "0000"]
    assert CharMatrices("10", "01")[1] == char_matrix("10", "1")
    with pytest.raises(ValueError):
        CharMatrices("2", "01")


@settings(max_examples=50)
@given(a=upper())
def test_bits_round_trip(a):
    m = BoolMatrix(a)
    assert BoolMatrix.from_bits([[int(c) for c in r] for r in m.to_bits()]) == m


def test_lower_triangle_rejected():
    with pytest.raises(ValueError):
        BoolMatrix.from_bits([[0, 0], [1, 0]])
