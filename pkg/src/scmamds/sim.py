"""
Monte Carlo uplink link simulation and the permutation-search benchmark codebooks.

Each frame draws fresh bits, i.i.d. CN(0, 1) gains on the support of F and
CN(0, sigma^2) noise from its own random stream, seeded by
(master_seed, Eb/N0 index, frame index). Frames are grouped in fixed-size
blocks and chunks, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .allocation import AllocationMatrix, mapping_matrices
from .codebook import (Codebook, ProjectionSet, apsk_projections, codebook_to_json,
                       noise_var_from_ebn0)
from .detector import bits_from_result, build_factor_graph, mpa_detect
from .errors import DimensionMismatch, InsufficientErrors, ScmaError
from .labeling import Labeling

__all__ = [
    "SimConfig", "BerPoint", "BerReport", "channel_draw", "noise_var_from_ebn0",
    "transmit_frame", "run_ber", "diversity_slope", "benchmark_codebook", "frame_rng",
    "rayleigh_bpsk_ber",
]


@dataclass
class SimConfig:
    F: AllocationMatrix
    cb: Codebook
    lab: Labeling
    ebn0_db: list
    min_frames: int = 100
    max_frames: int = 100_000
    min_bit_errors: int = 100
    iterations: int = 5
    mode: str = "exact"
    seed: int = 0
    damping: float = 1.0
    block_frames: int = 256
    chunk_frames: int = 64

    def __post_init__(self):
        self.ebn0_db = [float(e) for e in self.ebn0_db]
        if self.F.N != self.cb.N:
            raise DimensionMismatch(f"F has column degree {self.F.N}, codebook has N={self.cb.N}")
        if self.lab.M != self.cb.M or self.cb.M & (self.cb.M - 1):
            raise DimensionMismatch(f"labeling size {self.lab.M} vs codebook size {self.cb.M}")
        if not 1 <= self.min_frames <= self.max_frames:
            raise ScmaError("need 1 <= min_frames <= max_frames")
        if self.min_bit_errors < 1:
            raise ScmaError("min_bit_errors must be >= 1")
        if self.block_frames < 1 or self.chunk_frames < 1:
            raise ScmaError("block and chunk sizes must be positive")

    @property
    def system(self) -> dict:
        return {"J": self.F.J, "K": self.F.K, "N": self.cb.N, "M": self.cb.M, "q": self.cb.q}

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "F": self.F.mat.tolist(),
            "codebook": codebook_to_json(self.cb, self.lab.perm),
            "ebn0_db": self.ebn0_db,
            "min_frames": self.min_frames,
            "max_frames": self.max_frames,
            "min_bit_errors": self.min_bit_errors,
            "iterations": self.iterations,
            "mode": self.mode,
            "seed": self.seed,
            "damping": self.damping,
            "block_frames": self.block_frames,
            "chunk_frames": self.chunk_frames,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class BerPoint:
    ebn0_db: float
    frames: int
    bit_errors: int
    symbol_errors: int
    bits: int
    symbols: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols

    @property
    def ci95(self) -> float:
        """Normal-approximation 95% half-width of the BER estimate."""
        p = self.ber
        return 1.959963984540054 * math.sqrt(p * (1.0 - p) / self.bits)


@dataclass
class BerReport:
    points: list
    provenance: dict = field(default_factory=dict)

    def point(self, ebn0_db: float) -> BerPoint:
        for p in self.points:
            if abs(p.ebn0_db - ebn0_db) < 1e-9:
                return p
        raise KeyError(f"no point at {ebn0_db} dB")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ebn0_db", "frames", "bit_errors", "ber", "ser", "ci95"])
        for p in self.points:
            w.writerow([repr(p.ebn0_db), p.frames, p.bit_errors, repr(p.ber), repr(p.ser),
                        repr(p.ci95)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance,
            "points": [
                {"ebn0_db": p.ebn0_db, "frames": p.frames, "bit_errors": p.bit_errors,
                 "symbol_errors": p.symbol_errors, "bits": p.bits, "symbols": p.symbols,
                 "ber": p.ber, "ser": p.ser, "ci95": p.ci95}
                for p in self.points
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BerReport":
        pts = [BerPoint(p["ebn0_db"], p["frames"], p["bit_errors"], p["symbol_errors"],
                        p["bits"], p["symbols"]) for p in obj["points"]]
        return cls(pts, obj.get("provenance", {}))


def frame_rng(seed: int, point: int, frame: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, point, frame]))


def channel_draw(F: AllocationMatrix, rng: np.random.Generator) -> np.ndarray:
    """CN(0, 1) gains for each (user, codeword dimension) edge of F, shape (J, N)."""
    shape = (F.J, F.N)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def transmit_frame(bits, cb: Codebook, lab: Labeling, mappings, gains=None):
    """Superimpose every user's labeled codeword on its resources.

    Returns (y, symbols, codewords): the noiseless K-vector, the transmitted
    codeword indices (J,) and the codeword columns (J, N). ``gains`` is (J, N);
    unit gains when omitted. ``mappings`` is an AllocationMatrix or a list of
    MappingMatrix.
    """
    if isinstance(mappings, AllocationMatrix):
        K = mappings.K
        mappings = mapping_matrices(mappings)
    else:
        K = 1 + max(max(v.rows) for v in mappings)
    bits = np.asarray(bits, dtype=np.int64)
    J = len(mappings)
    if bits.shape != (J, lab.b):
        raise DimensionMismatch(f"bits must be ({J}, {lab.b}), got {bits.shape}")
    labels = bits @ (1 << np.arange(lab.b - 1, -1, -1))
    syms = lab.inverse()[labels]
    x = cb.mat[:, syms].T  # (J, N)
    if gains is None:
        gains = np.ones_like(x)
    y = np.zeros(K, dtype=complex)
    rows = np.array([v.rows for v in mappings])
    np.add.at(y, rows, np.asarray(gains) * x)
    return y, syms, x


def _draw_frame(cfg: SimConfig, mappings, noise_var: float, point: int, frame: int):
    rng = frame_rng(cfg.seed, point, frame)
    bits = rng.integers(0, 2, size=(cfg.F.J, cfg.lab.b))
    gains = channel_draw(cfg.F, rng)
    noise = (rng.standard_normal(cfg.F.K) + 1j * rng.standard_normal(cfg.F.K)) \
        * math.sqrt(noise_var / 2.0)
    y, syms, _ = transmit_frame(bits, cfg.cb, cfg.lab, mappings, gains)
    return bits, syms, gains, y + noise


def _run_chunk(cfg, graph, mappings, noise_var, point, frames, detector):
    drawn = [_draw_frame(cfg, mappings, noise_var, point, f) for f in frames]
    bits = np.stack([d[0] for d in drawn])
    syms = np.stack([d[1] for d in drawn])
    gains = np.stack([d[2] for d in drawn])
    y = np.stack([d[3] for d in drawn])
    res = detector(graph, y, gains, noise_var)
    rx_bits, _ = bits_from_result(res, cfg.lab)
    return int((rx_bits != bits).sum()), int((res.decisions != syms).sum())


def run_ber(cfg: SimConfig, threads: int = 1, detector=None) -> BerReport:
    """Simulate every Eb/N0 point of the config.

    Frames run in blocks of cfg.block_frames; after each block the point stops
    once min_frames and min_bit_errors are both reached, or at max_frames.
    ``detector(graph, y, gains, noise_var) -> DetectionResult`` replaces the
    default MPA call (used for harness self-tests).
    """
    if detector is None:
        def detector(graph, y, gains, nv):
            return mpa_detect(graph, y, gains, nv, cfg.iterations, cfg.mode, cfg.damping)
    graph = build_factor_graph(cfg.F, cfg.cb)
    mappings = mapping_matrices(cfg.F)
    J, b = cfg.F.J, cfg.lab.b
    points = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for pi, ebn0 in enumerate(cfg.ebn0_db):
            nv = noise_var_from_ebn0(ebn0, cfg.cb.M)
            frames = bit_err = sym_err = 0
            while frames < cfg.max_frames:
                stop = min(frames + cfg.block_frames, cfg.max_frames)
                chunks = [range(s, min(s + cfg.chunk_frames, stop))
                          for s in range(frames, stop, cfg.chunk_frames)]
                args = (cfg, graph, mappings, nv, pi)
                if pool is None:
                    results = [_run_chunk(*args, c, detector) for c in chunks]
                else:
                    results = list(pool.map(lambda c: _run_chunk(*args, c, detector), chunks))
                for be, se in results:
                    bit_err += be
                    sym_err += se
                frames = stop
                if frames >= cfg.min_frames and bit_err >= cfg.min_bit_errors:
                    break
            points.append(BerPoint(ebn0, frames, bit_err, sym_err, frames * J * b, frames * J))
    finally:
        if pool is not None:
            pool.shutdown()
    prov = {"seed": cfg.seed, "config_hash": cfg.digest(), "version": __version__,
            "min_bit_errors": cfg.min_bit_errors, "iterations": cfg.iterations,
            "mode": cfg.mode, "damping": cfg.damping}
    return BerReport(points, prov)


def diversity_slope(report: BerReport, window, min_bit_errors: int | None = None) -> float:
    """Empirical diversity order -d log10(BER) / d(Eb/N0 dB / 10) between two points."""
    lo, hi = (report.point(w) for w in window)
    need = min_bit_errors if min_bit_errors is not None else \
        report.provenance.get("min_bit_errors", 1)
    for p in (lo, hi):
        if p.bit_errors < need or p.bit_errors == 0:
            raise InsufficientErrors(f"{p.bit_errors} bit errors at {p.ebn0_db} dB (< {need})")
    return -(math.log10(hi.ber) - math.log10(lo.ber)) / ((hi.ebn0_db - lo.ebn0_db) / 10.0)


def rayleigh_bpsk_ber(ebn0_db: float) -> float:
    g = 10.0 ** (ebn0_db / 10.0)
    return 0.5 * (1.0 - math.sqrt(g / (1.0 + g)))


def benchmark_codebook(M: int, q: int, N: int, trials: int = 100_000, seed: int = 0,
                       ebn0_db: float = 8.0) -> Codebook:
    """Permutation-search LNCP codebook used as the comparison baseline.

    Dimension 1 carries the base sequence that spreads the M symbol slots as
    evenly as possible over the q points of a q-PSK ring (slot m -> point
    floor(m q / M)). Each further dimension keeps, out of `trials` random
    permutations of that sequence, the one maximizing the cutoff rate of the
    codebook built so far.
    """
    if M < 2 or q < 2 or N < 1 or trials < 1:
        raise ScmaError("need M, q >= 2, N >= 1 and trials >= 1")
    if M > q ** N:
        raise ScmaError(f"{M} codewords do not fit in {q}^{N} symbol sequences")
    rng = np.random.default_rng(seed)
    base = (np.arange(M) * q) // M
    pts = apsk_projections(q, [q], [1.0]).points / math.sqrt(N)  # unit average codeword energy
    nv = noise_var_from_ebn0(ebn0_db, M)
    gq = 1.0 / (1.0 + np.abs(pts[:, None] - pts[None, :]) ** 2 / (4.0 * nv))
    acc = gq[base[:, None], base[None, :]]
    rows = [base]
    batch = 8192
    for _ in range(1, N):
        best_val, best_seq = math.inf, None
        for s in range(0, trials, batch):
            n = min(batch, trials - s)
            perms = np.argsort(rng.random((n, M)), axis=1)
            seqs = base[perms]
            vals = np.einsum("ij,cij->c", acc, gq[seqs[:, :, None], seqs[:, None, :]])
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val, best_seq = vals[i], seqs[i]
        rows.append(best_seq)
        acc = acc * gq[best_seq[:, None], best_seq[None, :]]
    symbols = np.stack(rows)
    if len(set(map(tuple, symbols.T))) != M:
        raise ScmaError("search produced repeated codewords; increase trials")
    return Codebook.from_symbols(symbols, ProjectionSet(pts * math.sqrt(N)),
                                 source={"benchmark": {"trials": trials, "seed": seed,
                                                       "ebn0_db": ebn0_db}})

