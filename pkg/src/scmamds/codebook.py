"""
Multidimensional SCMA codebooks lifted from q-ary block codes.

A codebook stores, for every dimension n, a set of q complex projections and
an N x M matrix of projection indices (``symbols``). The complex N x M
matrix has column m equal to codeword m. Constructors normalize to unit
average codeword energy, (1/M) sum_m ||x_m||^2 = 1.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .codes import BlockCode
from .errors import (AlphabetMismatch, DimensionMismatch, NotPowerOfTwo, SizeMismatch,
                     TargetTooLarge)

DISTINCT_TOL = 1e-12
EXHAUSTIVE_LIMIT = 10 ** 6


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        d = np.abs(pts[:, None] - pts[None, :]) + np.eye(len(pts))
        if len(pts) > 1 and d.min() <= DISTINCT_TOL:
            raise AlphabetMismatch("projection points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)


def apsk_projections(q: int, ring_sizes, ring_radii) -> ProjectionSet:
    """APSK alphabet: ring r holds ring_sizes[r] equally spaced points from phase 0."""
    ring_sizes = list(ring_sizes)
    ring_radii = [float(r) for r in ring_radii]
    if len(ring_sizes) != len(ring_radii) or sum(ring_sizes) != q or min(ring_sizes) < 1:
        raise SizeMismatch(f"ring sizes {ring_sizes} do not partition q={q}")
    if min(ring_radii) <= 0 or any(b <= a for a, b in zip(ring_radii, ring_radii[1:])):
        raise SizeMismatch("ring radii must be positive and strictly increasing")
    pts = []
    for size, rad in zip(ring_sizes, ring_radii):
        pts.extend(rad * np.exp(2j * np.pi * np.arange(size) / size))
    return ProjectionSet(np.array(pts))


@dataclass(frozen=True, eq=False)
class Codebook:
    """M codewords of dimension N over per-dimension projection sets."""

    symbols: np.ndarray  # N x M projection indices
    projections: tuple  # N ProjectionSet, already normalized
    source: dict = field(default_factory=dict)

    @classmethod
    def from_symbols(cls, symbols, projections, normalize=True, source=None) -> "Codebook":
        symbols = np.array(symbols, dtype=np.int64)
        if symbols.ndim != 2:
            raise DimensionMismatch("symbols must be N x M")
        if isinstance(projections, ProjectionSet):
            projections = [projections] * symbols.shape[0]
        projections = [p if isinstance(p, ProjectionSet) else ProjectionSet(p) for p in projections]
        if len(projections) != symbols.shape[0]:
            raise AlphabetMismatch(f"{len(projections)} projection sets for N={symbols.shape[0]}")
        for n, p in enumerate(projections):
            if symbols[n].min() < 0 or symbols[n].max() >= len(p):
                raise AlphabetMismatch(f"dimension {n} uses symbols outside its alphabet")
        if len(set(map(tuple, symbols.T))) != symbols.shape[1]:
            raise AlphabetMismatch("codewords must be pairwise distinct")
        if normalize:
            mat = np.stack([p.points[s] for p, s in zip(projections, symbols)])
            energy = np.mean(np.sum(np.abs(mat) ** 2, axis=0))
            scale = 1.0 / math.sqrt(energy)
            projections = [ProjectionSet(p.points * scale) for p in projections]
        symbols.setflags(write=False)
        return cls(symbols, tuple(projections), dict(source or {}))

    @classmethod
    def from_matrix(cls, mat, normalize=True, source=None) -> "Codebook":
        """Infer per-dimension alphabets from the distinct entries of an N x M matrix."""
        mat = np.atleast_2d(np.asarray(mat, dtype=complex))
        symbols = np.empty(mat.shape, dtype=np.int64)
        projections = []
        for n, row in enumerate(mat):
            pts: list[complex] = []
            for m, v in enumerate(row):
                for i, p in enumerate(pts):
                    if v == p or abs(v - p) <= DISTINCT_TOL:
                        symbols[n, m] = i
                        break
                else:
                    symbols[n, m] = len(pts)
                    pts.append(v)
            projections.append(np.array(pts))
        return cls.from_symbols(symbols, projections, normalize, source)

    @property
    def N(self) -> int:
        return self.symbols.shape[0]

    @property
    def M(self) -> int:
        return self.symbols.shape[1]

    @property
    def q(self) -> int:
        return max(len(p) for p in self.projections)

    @property
    def b(self) -> int:
        return int(math.log2(self.M))

    @cached_property
    def mat(self) -> np.ndarray:
        m = np.stack([p.points[s] for p, s in zip(self.projections, self.symbols)])
        m.setflags(write=False)
        return m

    @cached_property
    def mssd(self) -> int:
        return mssd(self)

    def subset(self, keep, normalize=True, source=None) -> "Codebook":
        keep = list(keep)
        src = dict(self.source)
        src.update(source or {})
        return Codebook.from_symbols(self.symbols[:, keep], self.projections, normalize, src)


def lift_code(code: BlockCode, projections) -> Codebook:
    """Replace field index i by projections[n].points[i] in every dimension n."""
    if isinstance(projections, ProjectionSet):
        projections = [projections] * code.n
    if len(projections) != code.n:
        raise AlphabetMismatch(f"{len(projections)} projection sets for code length {code.n}")
    for p in projections:
        if len(p) != code.q:
            raise AlphabetMismatch(f"projection set of size {len(p)} for GF({code.q})")
    src = {
        "generator": code.generator.to_json(),
        "messages": code.messages.tolist(),
        "kept": list(range(code.codewords.shape[0])),
    }
    return Codebook.from_symbols(code.codewords.T, projections, True, src)


def _pair_sq(cb: Codebook) -> np.ndarray:
    """Per-dimension squared distances, shape N x M x M."""
    x = cb.mat
    return np.abs(x[:, :, None] - x[:, None, :]) ** 2


def _hamming(cb: Codebook) -> np.ndarray:
    s = cb.symbols
    return (s[:, :, None] != s[:, None, :]).sum(axis=0)


def _offdiag(M: int) -> np.ndarray:
    return ~np.eye(M, dtype=bool)


def mssd(cb: Codebook) -> int:
    """Minimum number of dimensions in which two distinct codewords differ."""
    if cb.M < 2:
        raise ValueError("MSSD needs at least two codewords")
    return int(_hamming(cb)[_offdiag(cb.M)].min())


def min_euclidean_sq(cb: Codebook) -> float:
    if cb.M < 2:
        raise ValueError("need at least two codewords")
    return float(_pair_sq(cb).sum(axis=0)[_offdiag(cb.M)].min())


def min_product_distance(cb: Codebook) -> float:
    """Smallest product of unsquared per-dimension distances over pairs at Hamming distance L."""
    if cb.M < 2:
        raise ValueError("need at least two codewords")
    h = _hamming(cb)
    L = int(h[_offdiag(cb.M)].min())
    d = np.sqrt(_pair_sq(cb))
    differ = cb.symbols[:, :, None] != cb.symbols[:, None, :]
    prod = np.prod(np.where(differ, d, 1.0), axis=0)
    sel = (h == L) & _offdiag(cb.M)
    return float(prod[sel].min())


def noise_var_from_ebn0(ebn0_db: float, M: int) -> float:
    """sigma_z^2 = 1 / SNR with SNR = (Eb/N0) * log2(M) at unit codeword energy."""
    if M < 2 or M & (M - 1):
        raise NotPowerOfTwo(f"M={M} is not a power of two")
    return _noise_var(ebn0_db, M)


def _noise_var(ebn0_db: float, M: int) -> float:
    # also used for intermediate, non-power-of-two sizes during expurgation
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    return 1.0 / (10.0 ** (ebn0_db / 10.0) * math.log2(M))


def chernoff_matrix(cb: Codebook, noise_var: float) -> np.ndarray:
    """T[i, j] = prod_n (1 + |x_in - x_jn|^2 / (4 sigma^2))^-1."""
    d = _pair_sq(cb)
    if noise_var == 0.0:
        return np.all(d == 0.0, axis=0).astype(float)
    return np.prod(1.0 / (1.0 + d / (4.0 * noise_var)), axis=0)


def cutoff_rate(cb: Codebook, ebn0_db: float) -> float:
    """Rayleigh-fading Chernoff cutoff-rate figure of merit Psi in bits per codeword."""
    if cb.M < 2:
        raise ValueError("need at least two codewords")
    t = chernoff_matrix(cb, _noise_var(ebn0_db, cb.M))
    return float(math.log2(cb.M) - math.log2(t.sum() / cb.M))


def papr(cb: Codebook) -> float:
    p = np.abs(cb.mat) ** 2
    return float(p.max() / p.mean())


def expurgate(cb: Codebook, m_target: int, ebn0_db: float = 8.0, remove=None) -> Codebook:
    """Drop M - m_target codewords, maximizing the cutoff rate at ebn0_db.

    With ``remove`` given, those codeword indices are dropped verbatim.
    Otherwise all removal sets are scored when there are at most 1e6 of them
    (ties go to the lexicographically smallest set), else codewords are
    removed greedily one at a time.
    """
    M = cb.M
    if m_target > M:
        raise TargetTooLarge(f"cannot keep {m_target} of {M} codewords")
    if m_target == M and remove is None:
        return cb
    if m_target < 2 or m_target & (m_target - 1):
        raise TargetTooLarge(f"target size {m_target} is not a power of two >= 2")
    n_rm = M - m_target
    if remove is not None:
        removed = sorted(int(r) for r in remove)
        if len(removed) != n_rm or len(set(removed)) != n_rm:
            raise TargetTooLarge(f"expected {n_rm} distinct indices to remove")
    else:
        removed = _search_removal(cb, m_target, ebn0_db)
    keep = [m for m in range(M) if m not in set(removed)]
    src = {"removed": removed}
    if "kept" in cb.source:
        src["kept"] = [cb.source["kept"][m] for m in keep]
    return cb.subset(keep, source=src)


def _search_removal(cb: Codebook, m_target: int, ebn0_db: float) -> list[int]:
    M = cb.M
    n_rm = M - m_target
    if math.comb(M, n_rm) <= EXHAUSTIVE_LIMIT:
        combos = np.array(list(itertools.combinations(range(M), n_rm)), dtype=np.int64)
        scores = np.concatenate([_subset_scores(cb, c, ebn0_db)
                                 for c in np.array_split(combos, max(1, len(combos) // 4096))])
        # combinations() is lexicographic, so the first near-best entry wins ties
        best = scores.max()
        i = int(np.nonzero(scores >= best - 1e-12 * abs(best))[0][0])
        return combos[i].tolist()
    removed: list[int] = []
    for _ in range(n_rm):
        alive = [m for m in range(M) if m not in removed]
        cand = np.array([[m for m in removed] + [r] for r in alive], dtype=np.int64)
        scores = _subset_scores(cb, cand, ebn0_db)
        best = scores.max()
        removed.append(alive[int(np.nonzero(scores >= best - 1e-12 * abs(best))[0][0])])
    return sorted(removed)


def _subset_scores(cb: Codebook, removals: np.ndarray, ebn0_db: float) -> np.ndarray:
    """Cutoff rate of each renormalized codebook left after dropping a row of `removals`."""
    M = cb.M
    keep = np.ones((len(removals), M), dtype=bool)
    keep[np.arange(len(removals))[:, None], removals] = False
    size = M - removals.shape[1]
    s2 = _noise_var(ebn0_db, size)
    energy = np.sum(np.abs(cb.mat) ** 2, axis=0)
    sub_energy = (keep * energy).sum(axis=1) / size
    d = _pair_sq(cb)  # N x M x M
    t = np.prod(1.0 / (1.0 + d[None] / (4.0 * s2 * sub_energy[:, None, None, None])), axis=1)
    tot = np.einsum("ci,cij,cj->c", keep.astype(float), t, keep.astype(float))
    return math.log2(size) - np.log2(tot / size)


# ---------------------------------------------------------------------------
# JSON interchange


def _cpairs(a) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(a).ravel()]


def codebook_to_json(cb: Codebook, labels=None) -> dict:
    return {
        "M": cb.M,
        "N": cb.N,
        "q": cb.q,
        "labeling_bits": cb.b,
        "matrix": [_cpairs(row) for row in cb.mat],
        "projections": [_cpairs(p.points) for p in cb.projections],
        "symbols": cb.symbols.tolist(),
        "labels": None if labels is None else [int(x) for x in labels],
        "source": cb.source,
    }


def codebook_from_json(obj: dict) -> tuple[Codebook, list | None]:
    projections = [np.array([complex(re, im) for re, im in p]) for p in obj["projections"]]
    mat = np.array([[complex(re, im) for re, im in row] for row in obj["matrix"]])
    if "symbols" in obj and obj["symbols"] is not None:
        symbols = np.array(obj["symbols"], dtype=np.int64)
    else:
        symbols = np.empty(mat.shape, dtype=np.int64)
        for n, row in enumerate(mat):
            for m, v in enumerate(row):
                hit = np.nonzero(np.abs(projections[n] - v) <= DISTINCT_TOL)[0]
                if hit.size != 1:
                    raise AlphabetMismatch(f"entry ({n},{m}) is not in projection set {n}")
                symbols[n, m] = hit[0]
    cb = Codebook.from_symbols(symbols, projections, normalize=False, source=obj.get("source"))
    if cb.M != obj["M"] or cb.N != obj["N"]:
        raise DimensionMismatch("declared M, N disagree with the matrix")
    if np.abs(cb.mat - mat).max(initial=0.0) > DISTINCT_TOL:
        raise AlphabetMismatch("matrix entries disagree with projections and symbols")
    return cb, obj.get("labels")


def save_codebook(path, cb: Codebook, labels=None) -> None:
    with open(path, "w") as fh:
        json.dump(codebook_to_json(cb, labels), fh, indent=1)


def load_codebook(path) -> tuple[Codebook, list | None]:
    with open(path) as fh:
        return codebook_from_json(json.load(fh))
