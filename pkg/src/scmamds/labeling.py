"""Binary labeling of codewords and the binary switching algorithm (BSA)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, _pair_sq, noise_var_from_ebn0
from .errors import NotPowerOfTwo, SizeMismatch

DEFAULT_EBN0_DB = 8.0
DEFAULT_ITERATIONS = 5


@dataclass(frozen=True, eq=False)
class Labeling:
    """perm[m] is the b-bit label (as an integer) of codeword m."""

    perm: np.ndarray

    def __post_init__(self):
        p = np.array(self.perm, dtype=np.int64)
        if sorted(p.tolist()) != list(range(len(p))):
            raise SizeMismatch("labeling must be a permutation of 0..M-1")
        p.setflags(write=False)
        object.__setattr__(self, "perm", p)

    @property
    def M(self) -> int:
        return len(self.perm)

    @property
    def b(self) -> int:
        return self.M.bit_length() - 1

    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.M)
        return inv

    def bits(self) -> np.ndarray:
        """M x b array of label bits, most significant bit first."""
        shifts = np.arange(self.b - 1, -1, -1)
        return (self.perm[:, None] >> shifts[None, :]) & 1

    def __eq__(self, other):
        return isinstance(other, Labeling) and np.array_equal(self.perm, other.perm)


def natural_labeling(M: int) -> Labeling:
    if M < 1 or M & (M - 1):
        raise NotPowerOfTwo(f"M={M} is not a power of two")
    return Labeling(np.arange(M))


def _hamming_table(M: int) -> np.ndarray:
    x = np.arange(M)[:, None] ^ np.arange(M)[None, :]
    width = max(1, (M - 1).bit_length())
    return ((x[..., None] >> np.arange(width)) & 1).sum(axis=-1)


def pair_weights(cb: Codebook, noise_var: float) -> np.ndarray:
    """exp(-||x_i - x_j||^2 / (4 sigma^2)) with a zero diagonal."""
    w = np.exp(-_pair_sq(cb).sum(axis=0) / (4.0 * noise_var))
    np.fill_diagonal(w, 0.0)
    return w


def labeling_cost(cb: Codebook, lab: Labeling, noise_var: float | None = None) -> float:
    """Sum over ordered pairs i != j of H(label_i, label_j) * exp(-d_ij^2 / (4 sigma^2))."""
    if lab.M != cb.M:
        raise SizeMismatch(f"labeling for M={lab.M} applied to M={cb.M}")
    if noise_var is None:
        noise_var = noise_var_from_ebn0(DEFAULT_EBN0_DB, cb.M)
    H = _hamming_table(cb.M)[lab.perm[:, None], lab.perm[None, :]]
    return float((H * pair_weights(cb, noise_var)).sum())


def swap_deltas(H: np.ndarray, W: np.ndarray, a: int) -> np.ndarray:
    """Cost change for swapping the label of codeword a with each codeword b.

    H is the label Hamming matrix under the current labeling, W the pair
    weights. Only pairs touching a or b change; the pair (a, b) itself keeps
    its Hamming distance.
    """
    M = H.shape[0]
    diff = H - H[a][None, :]  # H(l_b, l_j) - H(l_a, l_j)
    wdiff = W[a][None, :] - W  # W_aj - W_bj
    mask = np.ones((M, M), dtype=bool)
    mask[:, a] = False
    mask[np.arange(M), np.arange(M)] = False
    return 2.0 * np.where(mask, diff * wdiff, 0.0).sum(axis=1)


def bsa(cb: Codebook, init: Labeling | None = None, iterations: int = DEFAULT_ITERATIONS,
        noise_var: float | None = None, seed: int = 0) -> Labeling:
    """Binary switching algorithm.

    Codewords are visited in decreasing order of their cost contribution
    (equal contributions ordered by a seeded shuffle). For the first codeword
    that has a strictly improving label swap, the best such swap is applied
    (lowest partner index on ties). ``iterations`` bounds the number of
    accepted swaps; the search also stops when no codeword can improve.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if init is None:
        init = natural_labeling(cb.M)
    if init.M != cb.M:
        raise SizeMismatch(f"labeling for M={init.M} applied to M={cb.M}")
    if noise_var is None:
        noise_var = noise_var_from_ebn0(DEFAULT_EBN0_DB, cb.M)
    rng = np.random.default_rng(seed)
    W = pair_weights(cb, noise_var)
    table = _hamming_table(cb.M)
    perm = init.perm.copy()
    for _ in range(iterations):
        H = table[perm[:, None], perm[None, :]]
        contrib = (H * W).sum(axis=1)
        tiebreak = rng.permutation(cb.M)
        order = np.lexsort((tiebreak, -contrib))
        thr = 1e-12 * float(contrib.sum())
        for a in order:
            delta = swap_deltas(H, W, a)
            delta[a] = 0.0
            b = int(np.argmin(delta))
            if delta[b] < -thr and delta[b] < 0.0:
                perm[a], perm[b] = perm[b], perm[a]
                break
        else:
            break
    return Labeling(perm)
