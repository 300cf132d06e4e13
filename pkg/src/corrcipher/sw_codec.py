"""Random-binning prototype code for the correlated pair.

Each source sequence is mapped to two bin indices: a private one
(``w_x`` / ``w_y``) and a common one (``w_cx`` / ``w_cy``).  The decoder
searches every source pair consistent with all four indices and returns the
most probable one.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (EnumerationTooLarge, LengthMismatch, NoConsistentPair,
                     OutOfRange, RateBelowSlepianWolf, ZeroModulus)
from .source_model import (JointSource, SequencePair, SourceStats, all_sequences,
                           entropies, sample_pair, sequence_index)

# Exhaustive decoding is only attempted up to this many bits of pair space.
ENUMERATION_CAP_BITS = 26
_TOL = 1e-9


def modulus_from_bits(bits: float) -> int:
    """Ceiling of an exponent: 2**ceil(bits), tolerant of float noise."""
    if bits < -_TOL:
        raise ValueError(f"negative size exponent {bits}")
    return 1 << max(0, math.ceil(bits - _TOL))


@dataclass(frozen=True)
class CodebookConfig:
    K: int
    log_m_x: float
    log_m_y: float
    log_m_cx: float
    log_m_cy: float
    epsilon0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        for name in ("log_m_x", "log_m_y", "log_m_cx", "log_m_cy"):
            if getattr(self, name) < -_TOL:
                raise ValueError(f"{name} must be >= 0")

    @property
    def m_x(self) -> int:
        return modulus_from_bits(self.log_m_x)

    @property
    def m_y(self) -> int:
        return modulus_from_bits(self.log_m_y)

    @property
    def m_cx(self) -> int:
        return modulus_from_bits(self.log_m_cx)

    @property
    def m_cy(self) -> int:
        return modulus_from_bits(self.log_m_cy)


def corner_config(stats: SourceStats, K: int, *, alpha: float = 0.5,
                  eps0: float = 0.0, seed: int = 0) -> CodebookConfig:
    """Config at the Slepian-Wolf corner rates plus ``eps0`` bits/symbol.

    ``alpha`` is the share of the common rate carried by the X encoder.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    common = K * (stats.i_xy + eps0)
    return CodebookConfig(K=K,
                          log_m_x=K * (stats.h_x_given_y + eps0),
                          log_m_y=K * (stats.h_y_given_x + eps0),
                          log_m_cx=alpha * common,
                          log_m_cy=(1.0 - alpha) * common,
                          epsilon0=eps0, seed=seed)


@dataclass(frozen=True, eq=False)
class BinningCodebook:
    """Four bin maps, stored as lookup tables indexed by lexicographic rank."""

    src: JointSource
    cfg: CodebookConfig
    f_x: np.ndarray
    f_y: np.ndarray
    f_cx: np.ndarray
    f_cy: np.ndarray

    @property
    def K(self) -> int:
        return self.cfg.K

    @property
    def moduli(self) -> tuple[int, int, int, int]:
        c = self.cfg
        return c.m_x, c.m_y, c.m_cx, c.m_cy


@dataclass(frozen=True)
class PrototypeCodeword:
    w_x: int
    w_y: int
    w_cx: int
    w_cy: int
    m_x: int
    m_y: int
    m_cx: int
    m_cy: int

    def __post_init__(self):
        for w, m in ((self.w_x, self.m_x), (self.w_y, self.m_y),
                     (self.w_cx, self.m_cx), (self.w_cy, self.m_cy)):
            if not 0 <= w < m:
                raise OutOfRange(f"index {w} outside Z_{m}")


@dataclass(frozen=True)
class SplitCodeword:
    w1: int
    w2: int
    m1: int
    m2: int | None = None


def _check_rates(src: JointSource, cfg: CodebookConfig) -> None:
    stats = entropies(src)
    K, eps = cfg.K, cfg.epsilon0
    checks = [
        ("log_m_x >= K*H(X|Y)", cfg.log_m_x, K * stats.h_x_given_y),
        ("log_m_y >= K*H(Y|X)", cfg.log_m_y, K * stats.h_y_given_x),
        ("log_m_cx + log_m_cy >= K*I(X;Y)", cfg.log_m_cx + cfg.log_m_cy, K * stats.i_xy),
    ]
    for name, have, bound in checks:
        if have < bound - _TOL:
            raise RateBelowSlepianWolf(f"{name} violated: {have:.6f} < {bound:.6f}")
        if have < bound + K * eps - _TOL:
            warnings.warn(f"{name} holds but without the eps0 slack "
                          f"({have:.6f} < {bound + K * eps:.6f})", stacklevel=3)


def _bin_map(rng: np.random.Generator, n_symbols: int, K: int,
             log_m: float, m: int) -> np.ndarray:
    n_seq = n_symbols ** K
    if log_m >= K * math.log2(n_symbols) - _TOL:
        # full rate: enumeration-order injection
        return np.arange(n_seq, dtype=np.int64)
    return rng.integers(0, m, size=n_seq, dtype=np.int64)


def build_codebook(src: JointSource, cfg: CodebookConfig) -> BinningCodebook:
    """Draw the four seeded bin maps for ``src``.

    Raises :class:`RateBelowSlepianWolf` when a rate is strictly below its
    Slepian-Wolf bound and only warns when the ``epsilon0`` slack is missing.
    """
    bits = cfg.K * math.log2(src.nx * src.ny)
    if bits > ENUMERATION_CAP_BITS + _TOL:
        raise EnumerationTooLarge(
            f"K*log2(|X||Y|) = {bits:.2f} exceeds {ENUMERATION_CAP_BITS} bits")
    _check_rates(src, cfg)
    rngs = [np.random.default_rng(s)
            for s in np.random.SeedSequence(cfg.seed).spawn(4)]
    f_x = _bin_map(rngs[0], src.nx, cfg.K, cfg.log_m_x, cfg.m_x)
    f_y = _bin_map(rngs[1], src.ny, cfg.K, cfg.log_m_y, cfg.m_y)
    f_cx = _bin_map(rngs[2], src.nx, cfg.K, cfg.log_m_cx, cfg.m_cx)
    f_cy = _bin_map(rngs[3], src.ny, cfg.K, cfg.log_m_cy, cfg.m_cy)
    for table in (f_x, f_y, f_cx, f_cy):
        table.setflags(write=False)
    return BinningCodebook(src=src, cfg=cfg, f_x=f_x, f_y=f_y, f_cx=f_cx, f_cy=f_cy)


def _rank(seq, n_symbols: int, K: int) -> int:
    seq = np.asarray(seq)
    if seq.shape != (K,):
        raise LengthMismatch(f"expected a length-{K} sequence, got shape {seq.shape}")
    if seq.size and (seq.min() < 0 or seq.max() >= n_symbols):
        raise OutOfRange("sequence symbol outside the alphabet")
    return sequence_index(seq, n_symbols)


def encode(cb: BinningCodebook, pair: SequencePair) -> PrototypeCodeword:
    i = _rank(pair.x_seq, cb.src.nx, cb.K)
    j = _rank(pair.y_seq, cb.src.ny, cb.K)
    m_x, m_y, m_cx, m_cy = cb.moduli
    return PrototypeCodeword(w_x=int(cb.f_x[i]), w_y=int(cb.f_y[j]),
                             w_cx=int(cb.f_cx[i]), w_cy=int(cb.f_cy[j]),
                             m_x=m_x, m_y=m_y, m_cx=m_cx, m_cy=m_cy)


def _pair_log_probs(log_pmf, xs, ys, chunk_rows):
    out = np.empty((len(xs), len(ys)))
    for start in range(0, len(xs), chunk_rows):
        block = xs[start:start + chunk_rows]
        acc = np.zeros((len(block), len(ys)))
        for k in range(xs.shape[1]):
            acc += log_pmf[block[:, k][:, None], ys[:, k][None, :]]
        out[start:start + chunk_rows] = acc
    return out


def decode(cb: BinningCodebook, cw: PrototypeCodeword) -> SequencePair:
    """Most probable pair consistent with all four indices.

    Ties (within 1e-9 in log2-probability) go to the lexicographically
    smallest ``(x^K, y^K)``.
    """
    if cw.m_x != cb.cfg.m_x or cw.m_y != cb.cfg.m_y or \
            cw.m_cx != cb.cfg.m_cx or cw.m_cy != cb.cfg.m_cy:
        raise OutOfRange("codeword moduli do not match the codebook")
    cand_x = np.flatnonzero((cb.f_x == cw.w_x) & (cb.f_cx == cw.w_cx))
    cand_y = np.flatnonzero((cb.f_y == cw.w_y) & (cb.f_cy == cw.w_cy))
    if cand_x.size == 0 or cand_y.size == 0:
        raise NoConsistentPair("no sequence lies in the received bins")
    K = cb.K
    xs = all_sequences(cb.src.nx, K)[cand_x]
    ys = all_sequences(cb.src.ny, K)[cand_y]
    with np.errstate(divide="ignore"):
        log_pmf = np.log2(cb.src.pmf)
    chunk = max(1, 4_000_000 // max(1, len(ys)))
    lp = _pair_log_probs(log_pmf, xs, ys, chunk)
    best = lp.max()
    if not np.isfinite(best):
        raise NoConsistentPair("every consistent pair has probability zero")
    flat = int(np.flatnonzero(lp.ravel() >= best - _TOL)[0])
    a, b = divmod(flat, len(ys))
    return SequencePair(x_seq=xs[a].copy(), y_seq=ys[b].copy(), k1=K, k2=0)


def split(w: int, m1: int, m: int | None = None) -> SplitCodeword:
    """Divide ``w`` into ``w mod m1`` and ``(w - w1) / m1``."""
    if m1 < 1:
        raise ZeroModulus("m1 must be >= 1")
    if w < 0 or (m is not None and w >= m):
        raise OutOfRange(f"index {w} outside Z_{m}")
    w1 = w % m1
    m2 = None if m is None else -(-m // m1)
    return SplitCodeword(w1=w1, w2=(w - w1) // m1, m1=m1, m2=m2)


def unsplit(sc: SplitCodeword) -> int:
    if sc.m1 < 1:
        raise ZeroModulus("m1 must be >= 1")
    return sc.w1 + sc.m1 * sc.w2


def bin_loads(table: np.ndarray, m: int) -> np.ndarray:
    """Number of sequences assigned to each of the ``m`` bins."""
    return np.bincount(table, minlength=m)


def decoding_error_rate(src: JointSource, K: int, seeds, *, alpha: float = 0.5,
                        eps0: float = 0.15) -> float:
    """Fraction of trials where decode(encode(pair)) differs from the pair.

    Each seed draws a fresh codebook (random-coding average) and a fresh
    source pair, so the same ``seeds`` give the same batch at every K.
    """
    stats = entropies(src)
    errors = 0
    seeds = list(seeds)
    for seed in seeds:
        cb_seed, pair_seed = np.random.SeedSequence(seed).generate_state(2)
        cfg = corner_config(stats, K, alpha=alpha, eps0=eps0, seed=int(cb_seed))
        cb = build_codebook(src, cfg)
        pair = sample_pair(src, K, int(pair_seed))
        try:
            got = decode(cb, encode(cb, pair))
        except NoConsistentPair:
            errors += 1
            continue
        if not (np.array_equal(got.x_seq, pair.x_seq) and np.array_equal(got.y_seq, pair.y_seq)):
            errors += 1
    return errors / len(seeds)
