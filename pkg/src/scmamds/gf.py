"""
Finite field arithmetic over GF(q), q = p^m <= 256.

Elements are dense indices 0..q-1. Index 0 is the additive identity and
index 1 the multiplicative identity. For extension fields (m > 1) index 2 is
a fixed primitive element alpha and index i is alpha^(i-1), so the symbols
0, 1, alpha, alpha^2, ... map to indices 0, 1, 2, 3, ...  For prime fields
the index is the integer residue.

All arithmetic goes through precomputed tables; FieldTables is immutable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, NotPrimePower, ParamsOutOfRange

# Irreducible polynomials, coefficients low degree first, monic.
_POLY_TABLE = {
    (2, 2): (1, 1, 1),  # x^2 + x + 1
    (2, 3): (1, 1, 0, 1),  # x^3 + x + 1
    (3, 2): (1, 0, 1),  # x^2 + 1
}


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    m, r = 0, q
    while r % p == 0:
        r //= p
        m += 1
    if r != 1:
        raise NotPrimePower(f"{q} has at least two distinct prime factors")
    return p, m


def _poly_mulmod(a, b, poly, p):
    """Multiply coefficient tuples a*b modulo monic poly over GF(p)."""
    m = len(poly) - 1
    prod = [0] * (2 * m - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for d in range(len(prod) - 1, m - 1, -1):
        c = prod[d]
        if c:
            for i in range(m + 1):
                prod[d - m + i] = (prod[d - m + i] - c * poly[i]) % p
    return tuple(prod[:m])


def _is_irreducible(poly, p) -> bool:
    # no roots and no monic factor of degree <= m/2
    m = len(poly) - 1
    for d in range(1, m // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            f = low + (1,)
            if _poly_rem(poly, f, p) == (0,) * d:
                return False
    return True


def _poly_rem(a, f, p):
    a = list(a)
    d = len(f) - 1
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c:
            for j in range(d + 1):
                a[i - d + j] = (a[i - d + j] - c * f[j]) % p
    return tuple(a[:d])


def _default_poly(p: int, m: int) -> tuple[int, ...]:
    if (p, m) in _POLY_TABLE:
        return _POLY_TABLE[(p, m)]
    # lexicographically first monic irreducible, ordered by low-degree coefficients
    for high in itertools.product(range(p), repeat=m):
        poly = tuple(reversed(high)) + (1,)
        if poly[0] != 0 and _is_irreducible(poly, p):
            return poly
    raise AssertionError(f"no irreducible polynomial of degree {m} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    q: int
    p: int
    m: int
    poly: tuple[int, ...]  # low degree first; empty for prime fields


@dataclass(frozen=True, eq=False)
class FieldTables:
    """Addition, multiplication and inverse tables over element indices."""

    spec: FieldSpec
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray  # inv[0] unused (set to 0)
    primitive: int  # index of the primitive element used for power ordering

    @property
    def q(self) -> int:
        return self.spec.q

    def sub(self, a, b):
        return self.add[a, self.neg[b]]

    def power(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = int(self.mul[r, a])
        return r

    def power_order(self) -> np.ndarray:
        """Element indices listed as 0, alpha, alpha^2, ..., alpha^(q-1) = 1."""
        out = [0]
        x = 1
        for _ in range(self.q - 1):
            x = int(self.mul[x, self.primitive])
            out.append(x)
        return np.array(out, dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, FieldTables):
            return NotImplemented
        return (self.spec == other.spec and np.array_equal(self.add, other.add)
                and np.array_equal(self.mul, other.mul))

    def __hash__(self):
        return hash(self.spec)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def gf_build(q: int) -> FieldTables:
    """Build the arithmetic tables of GF(q) for a prime power 2 <= q <= 256."""
    q = int(q)
    p, m = _factor_prime_power(q)
    if q > 256:
        raise ParamsOutOfRange(f"q={q} exceeds 256")

    if m == 1:
        r = np.arange(q)
        add = (r[:, None] + r[None, :]) % q
        mul = (r[:, None] * r[None, :]) % q
        spec = FieldSpec(q, p, 1, ())
    else:
        poly = _default_poly(p, m)
        spec = FieldSpec(q, p, m, poly)
        elems = list(itertools.product(range(p), repeat=m))  # code c <-> coefficient tuple
        code = {e: i for i, e in enumerate(elems)}
        add_c = np.empty((q, q), dtype=np.int64)
        mul_c = np.empty((q, q), dtype=np.int64)
        for i, a in enumerate(elems):
            for j, b in enumerate(elems):
                add_c[i, j] = code[tuple((x + y) % p for x, y in zip(a, b))]
                mul_c[i, j] = code[_poly_mulmod(a, b, poly, p)]
        one = code[(1,) + (0,) * (m - 1)]
        alpha = None
        for c in range(q):
            if c == 0:
                continue
            x, order = c, 1
            while x != one:
                x = mul_c[x, c]
                order += 1
            if order == q - 1:
                alpha = c
                break
        # index i -> code of alpha^(i-1); index 0 -> zero code
        perm = np.empty(q, dtype=np.int64)  # perm[index] = code
        perm[0] = code[(0,) * m]
        x = one
        for i in range(1, q):
            perm[i] = x
            x = mul_c[x, alpha]
        to_index = np.empty(q, dtype=np.int64)
        to_index[perm] = np.arange(q)
        add = to_index[add_c[np.ix_(perm, perm)]]
        mul = to_index[mul_c[np.ix_(perm, perm)]]

    add = add.astype(np.int64)
    mul = mul.astype(np.int64)
    neg = np.argmax(add == 0, axis=1)
    inv = np.zeros(q, dtype=np.int64)
    inv[1:] = np.argmax(mul[1:] == 1, axis=1)
    if m == 1:
        primitive = next(g for g in range(1, q) if q == 2 or
                         len({pow(g, e, q) for e in range(1, q)}) == q - 1)
    else:
        primitive = 2
    return FieldTables(spec, _freeze(add), _freeze(mul), _freeze(neg), _freeze(inv),
                       int(primitive))


def gf_matvec(tables: FieldTables, mat, vec) -> np.ndarray:
    """Return u*G over GF(q), i.e. result[n] = sum_i vec[i]*mat[i][n]."""
    mat = np.asarray(mat, dtype=np.int64)
    vec = np.asarray(vec, dtype=np.int64)
    if mat.ndim != 2 or vec.ndim != 1 or mat.shape[0] != vec.shape[0]:
        raise DimensionMismatch(f"cannot multiply vector {vec.shape} by matrix {mat.shape}")
    q = tables.q
    if mat.size and (mat.min() < 0 or mat.max() >= q) or vec.size and (vec.min() < 0 or vec.max() >= q):
        raise DimensionMismatch(f"element index out of range for GF({q})")
    out = np.zeros(mat.shape[1], dtype=np.int64)
    for i, u in enumerate(vec):
        out = tables.add[out, tables.mul[u, mat[i]]]
    return out


def gf_matmul(tables: FieldTables, a, b) -> np.ndarray:
    """Matrix product over GF(q): rows of `a` times `b`."""
    a = np.atleast_2d(np.asarray(a, dtype=np.int64))
    b = np.asarray(b, dtype=np.int64)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} do not align")
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for i in range(b.shape[0]):
        out = tables.add[out, tables.mul[a[:, i][:, None], b[i][None, :]]]
    return out
