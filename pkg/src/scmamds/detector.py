"""
Multiuser detection on the SCMA factor graph.

The message-passing detector works in the log domain over projection
classes: a resource node only sees each neighbor through the q projections
of the dimension that neighbor places on it, so one update enumerates
q^d_f superpositions instead of M^d_f. User beliefs are folded into
per-class messages before the resource update and expanded back to
codewords afterwards, which keeps the update exact (sum-product) in
``mode="exact"``; ``mode="maxlog"`` replaces every log-sum-exp with max.

Batched inputs carry a leading frame axis: y is (B, K) and gains (B, J, N).
Gains are indexed by user and codeword dimension; dimension n of user j
sits on the n-th resource of column j of F (ascending).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .allocation import AllocationMatrix, _adjacency
from .codebook import Codebook
from .errors import DimensionMismatch, NonPositiveNoise, ShapeMismatch, TooLarge
from .labeling import Labeling

# log-probability standing in for an impossible projection class
_IMPOSSIBLE = -1e300
MAP_LIMIT = 10 ** 7


@dataclass(frozen=True, eq=False)
class ResourceGroup:
    degree: int
    resources: np.ndarray  # (R,)
    users: np.ndarray  # (R, d) neighbor users
    dims: np.ndarray  # (R, d) codeword dimension each neighbor places here


@dataclass(frozen=True, eq=False)
class FactorGraph:
    J: int
    K: int
    M: int
    q: int
    user_res: np.ndarray  # (J, N) resource of each codeword dimension
    groups: tuple  # ResourceGroup per distinct resource degree
    symbols: np.ndarray  # (N, M) projection index of codeword m in dimension n
    points: np.ndarray  # (N, q) projections, zero-padded
    valid: np.ndarray  # (N, q) which padded projections exist
    class_mask: np.ndarray  # (N, q, M) symbols[n, m] == p

    @property
    def N(self) -> int:
        return self.user_res.shape[1]

    def proj(self, j: int, k: int) -> np.ndarray:
        """Codeword index -> projection index for user j on resource k."""
        n = int(np.nonzero(self.user_res[j] == k)[0][0])
        return self.symbols[n]

    def neighbors(self, k: int) -> list[int]:
        for g in self.groups:
            hit = np.nonzero(g.resources == k)[0]
            if hit.size:
                return g.users[hit[0]].tolist()
        return []

    def enumerations_per_node(self) -> dict[int, int]:
        return {int(r): self.q ** g.degree for g in self.groups for r in g.resources}


@dataclass(frozen=True, eq=False)
class DetectionResult:
    log_posteriors: np.ndarray  # (..., J, M), natural log, normalized
    posteriors: np.ndarray
    decisions: np.ndarray  # (..., J)
    stats: dict = field(default_factory=dict)


def _as_matrix(F) -> np.ndarray:
    m = F.mat if isinstance(F, AllocationMatrix) else np.asarray(F, dtype=np.int64)
    if m.ndim != 2 or not np.isin(m, (0, 1)).all():
        raise DimensionMismatch("F must be a binary K x J matrix")
    return m


def build_factor_graph(F, cb: Codebook) -> FactorGraph:
    """Factor graph for F (regular or not, constant column degree N) and a shared codebook."""
    mat = _as_matrix(F)
    K, J = mat.shape
    cols = mat.sum(axis=0)
    if not (cols == cb.N).all():
        raise DimensionMismatch(f"column degrees {sorted(set(cols.tolist()))} differ from "
                                f"codebook dimension N={cb.N}")
    user_res = np.stack([np.nonzero(mat[:, j])[0] for j in range(J)])
    dim_of = -np.ones((K, J), dtype=np.int64)
    for j in range(J):
        dim_of[user_res[j], j] = np.arange(cb.N)
    deg = mat.sum(axis=1)
    groups = []
    for d in sorted(set(deg.tolist()) - {0}):
        res = np.nonzero(deg == d)[0]
        users = np.stack([np.nonzero(mat[k])[0] for k in res])
        dims = dim_of[res[:, None], users]
        groups.append(ResourceGroup(d, res, users, dims))
    q = cb.q
    points = np.zeros((cb.N, q), dtype=complex)
    valid = np.zeros((cb.N, q), dtype=bool)
    for n, p in enumerate(cb.projections):
        points[n, :len(p)] = p.points
        valid[n, :len(p)] = True
    class_mask = cb.symbols[:, None, :] == np.arange(q)[None, :, None]
    return FactorGraph(J, K, cb.M, q, user_res, tuple(groups), cb.symbols.copy(), points,
                       valid, class_mask)


def _lse(x: np.ndarray, axis, maxlog: bool) -> np.ndarray:
    mx = np.max(x, axis=axis, keepdims=True)
    if maxlog:
        return np.squeeze(mx, axis=axis)
    mx = np.where(np.isfinite(mx), mx, 0.0)  # all -inf slices stay -inf
    with np.errstate(divide="ignore"):
        out = mx + np.log(np.sum(np.exp(x - mx), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _check_inputs(graph: FactorGraph, y, gains, noise_var):
    y = np.asarray(y, dtype=complex)
    gains = np.asarray(gains, dtype=complex)
    batched = y.ndim == 2
    if not batched:
        y, gains = y[None], gains[None]
    if y.ndim != 2 or y.shape[1] != graph.K:
        raise ShapeMismatch(f"y must have {graph.K} entries per frame, got shape {y.shape}")
    if gains.shape != (y.shape[0], graph.J, graph.N):
        raise ShapeMismatch(f"gains must be (J, N) = ({graph.J}, {graph.N}) per frame, "
                            f"got {gains.shape[1:]}")
    if not noise_var > 0:
        raise NonPositiveNoise(f"noise variance must be positive, got {noise_var}")
    return y, gains, batched


def _resource_metrics(graph, g: ResourceGroup, y, gains, noise_var):
    """Log-likelihood of every projection combination, shape (B, R, q, ..., q)."""
    B = y.shape[0]
    d, q = g.degree, graph.q
    hp = gains[:, g.users, g.dims][..., None] * graph.points[g.dims][None]  # (B, R, d, q)
    s = np.zeros((B, len(g.resources)) + (q,) * d, dtype=complex)
    for t in range(d):
        shape = [B, len(g.resources)] + [1] * d
        shape[2 + t] = q
        s = s + hp[:, :, t, :].reshape(shape)
    r = y[:, g.resources].reshape((B, len(g.resources)) + (1,) * d)
    return -np.abs(r - s) ** 2 / noise_var


def mpa_detect(graph: FactorGraph, y, gains, noise_var: float, iterations: int = 5,
               mode: str = "exact", damping: float = 1.0) -> DetectionResult:
    """Log-domain message passing with a flooding schedule and uniform start."""
    if mode not in ("exact", "maxlog"):
        raise ValueError(f"unknown mode {mode!r}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    y, gains, batched = _check_inputs(graph, y, gains, noise_var)
    maxlog = mode == "maxlog"
    B, J, N, M, q = y.shape[0], graph.J, graph.N, graph.M, graph.q
    metrics = [_resource_metrics(graph, g, y, gains, noise_var) for g in graph.groups]
    sym_idx = np.broadcast_to(graph.symbols[None, None], (B, J, N, M))
    u2r = np.zeros((B, J, N, M))
    r2u = np.zeros((B, J, N, q))
    enumerated = 0
    per_node = set()
    for _ in range(iterations):
        # fold user->resource messages into projection classes
        folded = np.where(graph.class_mask[None, None], u2r[:, :, :, None, :], -np.inf)
        agg = _lse(folded, -1, maxlog)
        agg = np.where(np.isfinite(agg), agg, _IMPOSSIBLE)
        new = np.empty_like(r2u)
        for g, met in zip(graph.groups, metrics):
            d = g.degree
            R = len(g.resources)
            a = agg[:, g.users, g.dims, :]  # (B, R, d, q)
            total = met.copy()
            for t in range(d):
                shape = [B, R] + [1] * d
                shape[2 + t] = q
                total += a[:, :, t, :].reshape(shape)
            per_node.add(int(np.prod(met.shape[2:])))
            enumerated += R * int(np.prod(met.shape[2:]))
            for t in range(d):
                shape = [B, R] + [1] * d
                shape[2 + t] = q
                x = total - a[:, :, t, :].reshape(shape)
                x = np.moveaxis(x, 2 + t, -1).reshape(B, R, -1, q)
                out = _lse(x, 2, maxlog)
                out = np.where(graph.valid[g.dims[:, t]][None], out, _IMPOSSIBLE)
                out -= out.max(axis=-1, keepdims=True)
                new[:, g.users[:, t], g.dims[:, t], :] = out
        r2u = new if damping == 1.0 else damping * new + (1.0 - damping) * r2u
        r2u_m = np.take_along_axis(r2u, sym_idx, axis=-1)  # (B, J, N, M)
        belief = r2u_m.sum(axis=2)
        u2r = belief[:, :, None, :] - r2u_m
        u2r -= u2r.max(axis=-1, keepdims=True)
    logp = belief - _lse(belief, -1, False)[..., None]
    post = np.exp(logp)
    post /= post.sum(axis=-1, keepdims=True)
    dec = np.argmax(post, axis=-1)
    stats = {"enumerations": enumerated, "per_node": sorted(per_node),
             "iterations": iterations, "frames": B}
    if not batched:
        logp, post, dec = logp[0], post[0], dec[0]
    return DetectionResult(logp, post, dec, stats)


def map_detect(F, cb: Codebook, y, gains, noise_var: float) -> DetectionResult:
    """Exact per-user marginals by enumerating all M^J joint hypotheses."""
    mat = _as_matrix(F)
    K, J = mat.shape
    M = cb.M
    if M ** J > MAP_LIMIT:
        raise TooLarge(f"M^J = {M}^{J} exceeds {MAP_LIMIT}")
    graph = build_factor_graph(mat, cb)
    y, gains, batched = _check_inputs(graph, y, gains, noise_var)
    out_logp = []
    for yb, hb in zip(y, gains):
        contrib = np.zeros((J, M, K), dtype=complex)
        for j in range(J):
            contrib[j][:, graph.user_res[j]] = (hb[j][:, None] * cb.mat).T
        acc = np.full((J, M), -np.inf)
        total = M ** J
        chunk = max(1, min(total, 2 ** 18 // max(1, K)))
        for s in range(0, total, chunk):
            idx = np.arange(s, min(total, s + chunk))
            digits = (idx[:, None] // (M ** np.arange(J))[None, :]) % M
            yhat = np.zeros((len(idx), K), dtype=complex)
            for j in range(J):
                yhat += contrib[j][digits[:, j]]
            ll = -(np.abs(yb[None] - yhat) ** 2).sum(axis=1) / noise_var
            mx = ll.max()
            w = np.exp(ll - mx)
            for j in range(J):
                sums = np.bincount(digits[:, j], weights=w, minlength=M)
                with np.errstate(divide="ignore"):
                    acc[j] = np.logaddexp(acc[j], mx + np.log(sums))
        out_logp.append(acc - _lse(acc, -1, False)[:, None])
    logp = np.stack(out_logp)
    post = np.exp(logp)
    post /= post.sum(axis=-1, keepdims=True)
    dec = np.argmax(post, axis=-1)
    if not batched:
        logp, post, dec = logp[0], post[0], dec[0]
    return DetectionResult(logp, post, dec, {"hypotheses": M ** J})


def bits_from_result(res: DetectionResult, lab: Labeling) -> tuple[np.ndarray, np.ndarray]:
    """Per-bit LLRs log P(bit=0) - log P(bit=1) and bit decisions (0 on ties).

    Bits are label bits, most significant first. Shapes (..., J, b).
    """
    logp = res.log_posteriors
    if logp.shape[-1] != lab.M:
        raise DimensionMismatch(f"labeling for M={lab.M}, posteriors over M={logp.shape[-1]}")
    lbits = lab.bits()  # (M, b)
    llr = np.empty(logp.shape[:-1] + (lab.b,))
    for i in range(lab.b):
        zero = lbits[:, i] == 0
        with np.errstate(divide="ignore"):
            l0 = _lse(logp[..., zero], -1, False)
            l1 = _lse(logp[..., ~zero], -1, False)
        llr[..., i] = l0 - l1
    bits = (llr < 0).astype(np.int64)
    return bits, llr


def tree_iterations(F) -> int:
    """Bipartite-graph diameter (in edges), enough flooding rounds on a forest."""
    adj = _adjacency(_as_matrix(F))
    best = 0
    for root in range(len(adj)):
        dist = {root: 0}
        dq = deque([root])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    dq.append(v)
        best = max(best, max(dist.values()))
    return max(1, best)
