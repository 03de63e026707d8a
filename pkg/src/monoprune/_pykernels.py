"""Pure-Python Boolean matrix kernels.

A matrix of dimension ``n`` is a tuple of ``n`` row bitmasks; bit ``j`` of
row ``i`` is entry ``(i, j)``.  Only the upper triangle (``j >= i``) is ever
populated.
"""

BACKEND = "python"


def ones_row(n, i):
    return ((1 << n) - 1) ^ ((1 << i) - 1)


def mat_or(a, b):
    return tuple([x | y for x, y in zip(a, b)])


def mat_and(a, b):
    return tuple([x & y for x, y in zip(a, b)])


def mat_mul(a, b):
    out = []
    for r in a:
        acc = 0
        while r:
            low = r & -r
            acc |= b[low.bit_length() - 1]
            r ^= low
        out.append(acc)
    return tuple(out)


def mat_closure(a):
    # I + A + A^2 + ... + A^n, i.e. reflexive-transitive closure
    n = len(a)
    rows = list(a)
    for k in range(n):
        bit = 1 << k
        rk = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rk
    return tuple([rows[i] | (1 << i) for i in range(n)])


def mat_complement(a):
    n = len(a)
    full = (1 << n) - 1
    return tuple([(full ^ ((1 << i) - 1)) & ~r for i, r in enumerate(a)])


def mat_leq(a, b):
    for x, y in zip(a, b):
        if x & ~y:
            return False
    return True
