"""q-ary linear block codes used as codebook skeletons."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, ParamsOutOfRange, RankDeficient, WrongField
from .gf import FieldTables, gf_build

PAIRWISE_LIMIT = 4096


def row_reduce(tables: FieldTables, mat) -> tuple[np.ndarray, list[int]]:
    """Gauss-Jordan elimination over GF(q). Returns (rref, pivot columns)."""
    a = np.array(mat, dtype=np.int64, copy=True)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        a[[r, piv]] = a[[piv, r]]
        a[r] = tables.mul[tables.inv[a[r, c]], a[r]]
        for i in range(rows):
            if i != r and a[i, c]:
                f = tables.neg[a[i, c]]
                a[i] = tables.add[a[i], tables.mul[f, a[r]]]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(tables: FieldTables, mat) -> int:
    return len(row_reduce(tables, mat)[1])


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    tables: FieldTables
    entries: np.ndarray

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def q(self) -> int:
        return self.tables.q

    @property
    def is_systematic(self) -> bool:
        return bool(np.array_equal(self.entries[:, : self.k], np.eye(self.k, dtype=np.int64)))

    def to_json(self) -> dict:
        return {"q": self.q, "k": self.k, "n": self.n, "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorMatrix":
        g = explicit_generator(gf_build(int(obj["q"])), obj["entries"])
        if g.k != obj["k"] or g.n != obj["n"]:
            raise DimensionMismatch("declared k, n disagree with entries")
        return g


def explicit_generator(tables: FieldTables, entries) -> GeneratorMatrix:
    """Wrap a user-supplied k x n generator, checking indices and full rank."""
    e = np.array(entries, dtype=np.int64)
    if e.ndim != 2 or e.shape[0] < 1:
        raise DimensionMismatch(f"generator must be a non-empty 2-D array, got shape {e.shape}")
    if e.min() < 0 or e.max() >= tables.q:
        raise DimensionMismatch(f"entries must be element indices below {tables.q}")
    if rank(tables, e) != e.shape[0]:
        raise RankDeficient(f"generator rows are linearly dependent over GF({tables.q})")
    e.setflags(write=False)
    return GeneratorMatrix(tables, e)


def grs_generator(tables: FieldTables, k: int, n: int) -> GeneratorMatrix:
    """Systematic generator of a GRS code of length n <= q.

    Evaluation points are the first n field elements in index order with unit
    column multipliers; the Vandermonde generator is brought to [I | P] by
    Gauss-Jordan elimination.
    """
    q = tables.q
    if not (2 <= k < n <= q):
        raise ParamsOutOfRange(f"GRS needs 2 <= k < n <= q, got k={k}, n={n}, q={q}")
    vander = np.empty((k, n), dtype=np.int64)
    for c in range(n):
        x = 1
        for i in range(k):
            vander[i, c] = x
            x = tables.mul[x, c]
    # 0^0 = 1 for the first evaluation point
    rref, _ = row_reduce(tables, vander)
    return explicit_generator(tables, rref)


def hamming_ternary_generator(tables: FieldTables) -> GeneratorMatrix:
    """The (4, 2, 3) ternary Hamming generator [I2 | (1 1)^T | (1 2)^T]."""
    if tables.q != 3:
        raise WrongField(f"ternary Hamming code needs GF(3), got GF({tables.q})")
    return explicit_generator(tables, [[1, 0, 1, 1], [0, 1, 1, 2]])


def message_vectors(tables: FieldTables, k: int, digit_order: str = "index") -> np.ndarray:
    """All q^k messages; row i holds the base-q digits of i, least significant first.

    digit_order="index" maps digit d to element index d. digit_order="power"
    maps digits 0, 1, ..., q-1 to 0, alpha, ..., alpha^(q-1) = 1.
    """
    q = tables.q
    i = np.arange(q ** k)
    digits = (i[:, None] // q ** np.arange(k)[None, :]) % q
    if digit_order == "index":
        return digits
    if digit_order == "power":
        return tables.power_order()[digits]
    raise ValueError(f"unknown digit order {digit_order!r}")


@dataclass(frozen=True, eq=False)
class BlockCode:
    generator: GeneratorMatrix
    messages: np.ndarray
    codewords: np.ndarray
    matvecs: int  # linear-map evaluations spent spanning the code

    @property
    def k(self) -> int:
        return self.generator.k

    @property
    def n(self) -> int:
        return self.generator.n

    @property
    def q(self) -> int:
        return self.generator.q

    @cached_property
    def d_min(self) -> int:
        return min_hamming_distance(self)

    def index_of(self, message) -> int:
        hits = np.nonzero((self.messages == np.asarray(message)).all(axis=1))[0]
        if hits.size == 0:
            raise KeyError(f"message {message} not in code")
        return int(hits[0])


def span_code(G: GeneratorMatrix, digit_order: str = "index") -> BlockCode:
    """Enumerate all q^k codewords u*G in message order."""
    t = G.tables
    msgs = message_vectors(t, G.k, digit_order)
    cw = np.zeros((msgs.shape[0], G.n), dtype=np.int64)
    for i in range(G.k):
        cw = t.add[cw, t.mul[msgs[:, i][:, None], G.entries[i][None, :]]]
    msgs.setflags(write=False)
    cw.setflags(write=False)
    return BlockCode(G, msgs, cw, matvecs=msgs.shape[0])


def pairwise_min_distance(words: np.ndarray) -> int:
    words = np.asarray(words)
    m = words.shape[0]
    if m < 2:
        raise ValueError("need at least two words")
    best = words.shape[1]
    chunk = max(1, 2_000_000 // (m * words.shape[1]))
    for s in range(0, m, chunk):
        blk = words[s:s + chunk]
        d = (blk[:, None, :] != words[None, :, :]).sum(axis=2)
        rows = np.arange(blk.shape[0])
        d[rows, s + rows] = words.shape[1] + 1
        best = min(best, int(d.min()))
    return best


def min_hamming_distance(code: BlockCode) -> int:
    cw = code.codewords
    if cw.shape[0] <= PAIRWISE_LIMIT:
        return pairwise_min_distance(cw)
    w = (cw != 0).sum(axis=1)
    return int(w[w > 0].min())


def is_mds(code: BlockCode) -> bool:
    return code.d_min == code.n - code.k + 1


def save_generator(path, G: GeneratorMatrix) -> None:
    with open(path, "w") as fh:
        json.dump(G.to_json(), fh)


def load_generator(path) -> GeneratorMatrix:
    with open(path) as fh:
        return GeneratorMatrix.from_json(json.load(fh))
