"""
Sparse resource allocation: K x J binary matrix F built by progressive edge growth.

Rows of F are resources, columns are users. A user's N codeword dimensions
are placed on its resources in ascending resource order.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, IndivisibleLoad, IrregularMatrix, ParamsOutOfRange

PEG_MAX_RESTARTS = 1000


@dataclass(frozen=True, eq=False)
class MappingMatrix:
    rows: tuple  # resource index carrying codeword dimension n

    def dense(self, K: int) -> np.ndarray:
        v = np.zeros((K, len(self.rows)), dtype=np.int64)
        v[list(self.rows), np.arange(len(self.rows))] = 1
        return v


@dataclass(frozen=True, eq=False)
class AllocationMatrix:
    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=np.int64)
        if m.ndim != 2 or m.size == 0:
            raise DimensionMismatch("F must be a non-empty 2-D array")
        if not np.isin(m, (0, 1)).all():
            raise DimensionMismatch("F must be binary")
        cols, rows = m.sum(axis=0), m.sum(axis=1)
        if len(set(cols.tolist())) != 1 or len(set(rows.tolist())) != 1 or cols[0] == 0:
            raise IrregularMatrix(f"F is not regular: column degrees {sorted(set(cols.tolist()))}, "
                                  f"row degrees {sorted(set(rows.tolist()))}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def K(self) -> int:
        return self.mat.shape[0]

    @property
    def J(self) -> int:
        return self.mat.shape[1]

    @property
    def N(self) -> int:
        return int(self.mat[:, 0].sum())

    @property
    def df(self) -> int:
        return int(self.mat[0].sum())

    @property
    def density(self) -> float:
        return self.N / self.K

    @property
    def overload(self) -> float:
        return self.J / self.K

    @cached_property
    def girth(self) -> float:
        return girth(self.mat)

    def __eq__(self, other):
        return isinstance(other, AllocationMatrix) and np.array_equal(self.mat, other.mat)


def _bfs_farthest(j, user_res, res_users, available):
    """Candidate resources for user j's next edge, per progressive edge growth."""
    reached = set(user_res[j])
    seen_users = {j}
    frontier = set(reached)
    while True:
        unreached = available - reached
        users = set()
        for k in frontier:
            users |= res_users[k]
        users -= seen_users
        seen_users |= users
        new = set()
        for u in users:
            new |= user_res[u]
        new -= reached
        if not new:
            return unreached
        reached |= new
        if not (available - reached):
            return unreached
        frontier = new


def peg_design(J: int, K: int, N: int, seed: int = 0) -> AllocationMatrix:
    """Regular F with column degree N and row degree J*N/K by progressive edge growth.

    Users are processed in order. The first edge of a user goes to a
    minimum-degree resource; later edges go to a resource outside the user's
    BFS tree at the deepest level reached before the tree stops growing or
    covers every resource. Ties: lowest degree, then seeded random choice.
    Resources already at full row degree are not eligible; if a user gets
    stuck the construction restarts with the same random stream.
    """
    if J < 1 or N < 1 or N > K:
        raise ParamsOutOfRange(f"need J >= 1 and 1 <= N <= K, got J={J}, K={K}, N={N}")
    if (J * N) % K:
        raise IndivisibleLoad(f"J*N = {J * N} is not divisible by K = {K}")
    df = J * N // K
    rng = np.random.default_rng(seed)
    for _ in range(PEG_MAX_RESTARTS):
        F = _peg_attempt(J, K, N, df, rng)
        if F is not None:
            return AllocationMatrix(F)
    raise RuntimeError(f"PEG failed to build a regular ({J}, {K}, {N}) matrix")


def best_peg_design(J: int, K: int, N: int, seed: int = 0, attempts: int = 64) -> AllocationMatrix:
    """Run peg_design over `attempts` seeds derived from `seed`; keep the largest girth.

    Ties go to the earliest attempt. attempts=1 is plain peg_design(seed).
    """
    if attempts < 1:
        raise ParamsOutOfRange("attempts must be >= 1")
    best = peg_design(J, K, N, seed)
    if attempts == 1:
        return best
    seeds = np.random.SeedSequence(seed).generate_state(attempts - 1, dtype=np.uint64)
    for s in seeds:
        F = peg_design(J, K, N, int(s))
        if F.girth > best.girth:
            best = F
    return best


def _peg_attempt(J, K, N, df, rng):
    deg = np.zeros(K, dtype=np.int64)
    user_res = [set() for _ in range(J)]
    res_users = [set() for _ in range(K)]
    for j in range(J):
        for e in range(N):
            available = {k for k in range(K) if deg[k] < df and k not in user_res[j]}
            if not available:
                return None
            if e == 0:
                cand = available
            else:
                cand = _bfs_farthest(j, user_res, res_users, available) or available
            cand = sorted(cand)
            low = min(deg[k] for k in cand)
            best = [k for k in cand if deg[k] == low]
            k = best[int(rng.integers(len(best)))]
            user_res[j].add(k)
            res_users[k].add(j)
            deg[k] += 1
    F = np.zeros((K, J), dtype=np.int64)
    for j, rs in enumerate(user_res):
        F[sorted(rs), j] = 1
    return F


def _adjacency(F: np.ndarray) -> list[list[int]]:
    """Bipartite graph; users are vertices 0..J-1, resources J..J+K-1."""
    K, J = F.shape
    adj = [[] for _ in range(J + K)]
    for k, j in zip(*np.nonzero(F)):
        adj[j].append(J + int(k))
        adj[J + int(k)].append(int(j))
    return adj


def girth(F) -> float:
    """Shortest cycle length of the user-resource graph (math.inf if acyclic)."""
    F = np.asarray(F.mat if isinstance(F, AllocationMatrix) else F)
    adj = _adjacency(F)
    best = math.inf
    for root in range(len(adj)):
        dist = {root: 0}
        parent = {root: -1}
        dq = deque([root])
        while dq:
            u = dq.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    dq.append(v)
                elif parent[u] != v:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def mapping_matrices(F: AllocationMatrix) -> list[MappingMatrix]:
    return [MappingMatrix(tuple(int(k) for k in np.nonzero(F.mat[:, j])[0])) for j in range(F.J)]


def from_mappings(mappings, K: int) -> AllocationMatrix:
    F = np.zeros((K, len(mappings)), dtype=np.int64)
    for j, v in enumerate(mappings):
        F[list(v.rows), j] = 1
    return AllocationMatrix(F)


# ---------------------------------------------------------------------------
# text formats


def to_alist(F: AllocationMatrix) -> str:
    """MacKay-style alist: columns are users, rows are resources, 1-based indices."""
    lines = [f"{F.J} {F.K}", f"{F.N} {F.df}",
             " ".join([str(F.N)] * F.J), " ".join([str(F.df)] * F.K)]
    for j in range(F.J):
        lines.append(" ".join(str(k + 1) for k in np.nonzero(F.mat[:, j])[0]))
    for k in range(F.K):
        lines.append(" ".join(str(j + 1) for j in np.nonzero(F.mat[k])[0]))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> AllocationMatrix:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    try:
        J, K = map(int, rows[0])
        col_lists = rows[4:4 + J]
        row_lists = rows[4 + J:4 + J + K]
        F = np.zeros((K, J), dtype=np.int64)
        for j, ks in enumerate(col_lists):
            for k in ks:
                if int(k) > 0:  # zero padding is allowed in alist files
                    F[int(k) - 1, j] = 1
    except (ValueError, IndexError) as exc:
        raise DimensionMismatch(f"malformed alist: {exc}") from exc
    for k, js in enumerate(row_lists):
        listed = sorted(int(j) - 1 for j in js if int(j) > 0)
        if listed != np.nonzero(F[k])[0].tolist():
            raise DimensionMismatch(f"alist row {k + 1} disagrees with the column lists")
    return AllocationMatrix(F)


def to_pbm(F: AllocationMatrix) -> str:
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in F.mat)
    return f"P1\n{F.J} {F.K}\n{body}\n"


def from_pbm(text: str) -> AllocationMatrix:
    tokens = []
    for ln in text.splitlines():
        tokens.extend(ln.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P1":
        raise DimensionMismatch("not a plain PBM (P1) file")
    J, K = int(tokens[1]), int(tokens[2])
    bits = "".join(tokens[3:])
    if len(bits) != J * K:
        raise DimensionMismatch(f"PBM body has {len(bits)} pixels, expected {J * K}")
    return AllocationMatrix(np.array([int(c) for c in bits]).reshape(K, J))


def render(F: AllocationMatrix, one: str = "#", zero: str = ".") -> str:
    return "\n".join("".join(one if v else zero for v in row) for row in F.mat) + "\n"
