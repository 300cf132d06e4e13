"""Finite-alphabet correlated source pair.

A :class:`JointSource` holds the joint pmf p(x, y) of one (X, Y) symbol
pair; every entropy used elsewhere in the package is derived from it.
All logarithms are base 2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeProbability, NotNormalized

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class JointSource:
    """Joint pmf over ``alphabet_x`` x ``alphabet_y``.

    ``alphabet_x``/``alphabet_y`` hold the original row/column labels of the
    symbols that survived pruning; ``pruned_x``/``pruned_y`` list the labels
    that were dropped because their marginal was zero.
    """

    pmf: np.ndarray
    alphabet_x: tuple[int, ...]
    alphabet_y: tuple[int, ...]
    pruned_x: tuple[int, ...] = ()
    pruned_y: tuple[int, ...] = ()

    @property
    def nx(self) -> int:
        return self.pmf.shape[0]

    @property
    def ny(self) -> int:
        return self.pmf.shape[1]

    @property
    def px(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    @property
    def py(self) -> np.ndarray:
        return self.pmf.sum(axis=0)


@dataclass(frozen=True)
class SourceStats:
    """Per-symbol information measures, in bits."""

    h_x: float
    h_y: float
    h_x_given_y: float
    h_y_given_x: float
    h_xy: float
    i_xy: float


@dataclass(frozen=True)
class SequencePair:
    x_seq: np.ndarray
    y_seq: np.ndarray
    k1: int
    k2: int

    @property
    def K(self) -> int:
        return len(self.x_seq)

    def __eq__(self, other):
        if not isinstance(other, SequencePair):
            return NotImplemented
        return (self.k1, self.k2) == (other.k1, other.k2) and \
            np.array_equal(self.x_seq, other.x_seq) and \
            np.array_equal(self.y_seq, other.y_seq)

    __hash__ = None


@dataclass(frozen=True)
class MuComponents:
    """Common (``mu_c``) and private (``mu_y``) information carried by the
    leaked block Y^{K2}, in bits per symbol of the full block length K."""

    mu_c: float
    mu_y: float

    @property
    def total(self) -> float:
        return self.mu_c + self.mu_y


def entropy_bits(p) -> float:
    """Shannon entropy of a probability vector (any shape), in bits."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def build_source(pmf_entries) -> JointSource:
    """Validate a probability matrix and return a :class:`JointSource`.

    Rows and columns whose marginal is exactly zero are removed; their
    original indices are reported in ``pruned_x`` / ``pruned_y``.

    Raises
    ------
    NegativeProbability
        If any entry is negative.
    NotNormalized
        If the entries do not sum to one within 1e-9.
    """
    pmf = np.array(pmf_entries, dtype=float)
    if pmf.ndim != 2 or pmf.size == 0:
        raise ValueError("pmf must be a non-empty rectangular matrix")
    if not np.all(np.isfinite(pmf)):
        raise ValueError("pmf entries must be finite")
    if np.any(pmf < 0):
        raise NegativeProbability(f"negative entry {pmf.min()!r} in pmf")
    total = pmf.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"pmf sums to {total!r}, expected 1")

    keep_x = np.flatnonzero(pmf.sum(axis=1) > 0)
    keep_y = np.flatnonzero(pmf.sum(axis=0) > 0)
    pruned_x = tuple(int(i) for i in np.setdiff1d(np.arange(pmf.shape[0]), keep_x))
    pruned_y = tuple(int(j) for j in np.setdiff1d(np.arange(pmf.shape[1]), keep_y))
    pmf = pmf[np.ix_(keep_x, keep_y)]
    # absorb the (<= 1e-9) normalization residue
    pmf = pmf / pmf.sum()
    pmf.setflags(write=False)
    return JointSource(pmf=pmf,
                       alphabet_x=tuple(int(i) for i in keep_x),
                       alphabet_y=tuple(int(j) for j in keep_y),
                       pruned_x=pruned_x, pruned_y=pruned_y)


def dsbs(p: float) -> JointSource:
    """Doubly symmetric binary source with crossover probability ``p``."""
    return build_source([[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]])


def entropies(src: JointSource) -> SourceStats:
    h_x = entropy_bits(src.px)
    h_y = entropy_bits(src.py)
    h_xy = entropy_bits(src.pmf)
    return SourceStats(h_x=h_x, h_y=h_y,
                       h_x_given_y=h_xy - h_y,
                       h_y_given_x=h_xy - h_x,
                       h_xy=h_xy,
                       i_xy=h_x + h_y - h_xy)


def sample_pair(src: JointSource, K: int, seed: int, k2: int = 0) -> SequencePair:
    """Draw K i.i.d. symbol pairs; the last ``k2`` positions form the leaked block."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 <= k2 <= K:
        raise ValueError("k2 must lie in [0, K]")
    rng = np.random.default_rng(seed)
    flat = rng.choice(src.pmf.size, size=K, p=src.pmf.ravel())
    x_seq, y_seq = np.divmod(flat, src.ny)
    return SequencePair(x_seq=x_seq.astype(np.int64), y_seq=y_seq.astype(np.int64),
                        k1=K - k2, k2=k2)


def mu_components(stats: SourceStats, K: int, K2: int) -> MuComponents:
    """Proportional share of common and private information in Y^{K2}."""
    if not 0 <= K2 <= K or K < 1:
        raise ValueError(f"need 0 <= K2 <= K, got K={K}, K2={K2}")
    frac = K2 / K
    return MuComponents(mu_c=frac * max(stats.i_xy, 0.0),
                        mu_y=frac * max(stats.h_y_given_x, 0.0))


def empirical_joint_entropy(pair: SequencePair, nx: int, ny: int) -> float:
    """Plug-in estimate of H(X,Y) from the symbol pairs of one sample."""
    counts = np.bincount(pair.x_seq * ny + pair.y_seq, minlength=nx * ny)
    return entropy_bits(counts / counts.sum())


def all_sequences(n_symbols: int, K: int) -> np.ndarray:
    """Every length-K sequence over ``range(n_symbols)`` in lexicographic order.

    Row ``i`` is the base-``n_symbols`` expansion of ``i`` (most significant
    symbol first), so row order equals lexicographic order.
    """
    idx = np.arange(n_symbols ** K, dtype=np.int64)
    powers = n_symbols ** np.arange(K - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % n_symbols


def sequence_index(seq, n_symbols: int) -> int:
    """Inverse of :func:`all_sequences`: lexicographic rank of ``seq``."""
    out = 0
    for s in np.asarray(seq, dtype=np.int64):
        out = out * n_symbols + int(s)
    return out

