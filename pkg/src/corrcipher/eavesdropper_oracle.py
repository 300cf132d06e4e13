"""Exact wiretapper equivocation by exhaustive enumeration.

Every source pair (x^K, y^K) of positive probability is combined with every
value of every key component; the observation seen by the wiretapper is a
deterministic function of that configuration, so all conditional entropies
follow from a single weighted table.  No sampling is involved.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .cipher import (SLOT_NAMES, KeyPlan, KeySchedule, SecurityTarget, assemble_slots,
                     build_transmission, chain_mask)
from .errors import EnumerationTooLarge, SlotNotKeyed
from .source_model import (MuComponents, all_sequences, entropies, entropy_bits,
                           mu_components)
from .sw_codec import BinningCodebook, PrototypeCodeword

ENUMERATION_CAP_BITS = 26


def default_slack(K: int) -> float:
    """Finite-block slack eps0' in bits/symbol."""
    return 0.25 if K <= 4 else 0.15


@dataclass(frozen=True)
class ObservationSpec:
    """What the wiretapper sees.

    ``slot_visibility`` overrides the per-word flags for individual slots,
    e.g. ``{"x1": False}`` hides one slot of W_1.
    """

    include_w1: bool = True
    include_w2: bool = True
    leaked_y_positions: tuple[int, ...] = ()
    slot_visibility: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        pos = tuple(int(p) for p in self.leaked_y_positions)
        if len(set(pos)) != len(pos):
            raise ValueError("leaked positions must be distinct")
        object.__setattr__(self, "leaked_y_positions", tuple(sorted(pos)))
        unknown = set(self.slot_visibility) - set(SLOT_NAMES)
        if unknown:
            raise ValueError(f"unknown slots {sorted(unknown)}")
        object.__setattr__(self, "slot_visibility",
                           MappingProxyType(dict(self.slot_visibility)))

    @classmethod
    def full(cls, K: int, K2: int) -> "ObservationSpec":
        """(W_1, W_2, Y^{K2}) with the leaked block at the last K2 positions."""
        return cls(True, True, tuple(range(K - K2, K)))

    @classmethod
    def nothing(cls) -> "ObservationSpec":
        return cls(False, False, ())

    def visible_slots(self) -> tuple[str, ...]:
        out = []
        for name in SLOT_NAMES:
            default = self.include_w1 if name in SLOT_NAMES[:3] else self.include_w2
            if self.slot_visibility.get(name, default):
                out.append(name)
        return tuple(out)


@dataclass(frozen=True)
class LeakageReport:
    """Per-symbol equivocations of the wiretapper (bits/symbol of K)."""

    K: int
    h_x_given_obs: float
    h_y_given_obs: float
    h_xy_given_obs: float
    h_x: float
    h_y: float
    h_xy: float
    mu: MuComponents
    target: SecurityTarget | None = None
    bounds: Mapping[str, float] = field(default_factory=dict)
    passed: Mapping[str, bool] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())


@dataclass
class _Table:
    prob: np.ndarray
    i: np.ndarray
    j: np.ndarray
    slots: dict
    plain: dict
    ys: np.ndarray


def _key_grid(plan: KeyPlan):
    names = list(plan.key_moduli)
    if not names:
        return names, np.zeros((0, 1), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(plan.key_moduli[n]) for n in names], indexing="ij")
    return names, np.stack([g.ravel() for g in grids])


def _check_budget(cb: BinningCodebook, plan: KeyPlan | None) -> None:
    bits = cb.K * math.log2(cb.src.nx * cb.src.ny)
    if plan is not None:
        bits += plan.key_bits
    if bits > ENUMERATION_CAP_BITS + 1e-9:
        raise EnumerationTooLarge(f"{bits:.2f} bits of enumeration space exceeds "
                                  f"{ENUMERATION_CAP_BITS}")


def _pair_table(cb: BinningCodebook):
    K, src = cb.K, cb.src
    xs = all_sequences(src.nx, K)
    ys = all_sequences(src.ny, K)
    prob = np.ones((len(xs), len(ys)))
    for k in range(K):
        prob *= src.pmf[xs[:, k][:, None], ys[:, k][None, :]]
    i, j = np.nonzero(prob > 0)
    return prob[i, j], i, j, ys


def _enumerate(cb: BinningCodebook, plan: KeyPlan | None,
               chains: tuple[tuple[str, str], ...] = ()) -> _Table:
    _check_budget(cb, plan)
    p, i, j, ys = _pair_table(cb)
    if plan is None:
        plan = plain_plan(cb)
    names, grid = _key_grid(plan)
    nk = grid.shape[1]
    prob = np.repeat(p / nk, nk)
    i = np.repeat(i, nk)
    j = np.repeat(j, nk)
    keys = {n: np.tile(grid[r], len(p)) for r, n in enumerate(names)}
    slots = assemble_slots(cb.f_x[i], cb.f_y[j], cb.f_cx[i], cb.f_cy[j], keys, plan,
                           cb.cfg.m_x, cb.cfg.m_y, chains)
    plain = assemble_slots(cb.f_x[i], cb.f_y[j], cb.f_cx[i], cb.f_cy[j], {},
                           _unkeyed(plan), cb.cfg.m_x, cb.cfg.m_y)
    return _Table(prob, i, j, slots, plain, ys)


def plain_plan(cb: BinningCodebook) -> KeyPlan:
    """No keys and no split: W_X travels whole in the ``x2`` slot."""
    return KeyPlan(1, "none", cb.K, 1, 1, cb.cfg.m_cx, cb.cfg.m_cy, {}, {}, 0.0,
                   0.0, 0.0, cb.cfg.log_m_cx, cb.cfg.log_m_cy)


def _unkeyed(plan: KeyPlan) -> KeyPlan:
    return replace(plan, slot_keys={}, key_moduli={})


def _labels(columns: list[tuple[np.ndarray, int]], n: int) -> np.ndarray:
    """Dense integer label of each row of the given (values, radix) columns."""
    if not columns:
        return np.zeros(n, dtype=np.int64)
    if sum(math.log2(max(r, 1)) for _, r in columns) < 62:
        code = np.zeros(n, dtype=np.int64)
        for v, r in columns:
            code = code * r + np.asarray(v, dtype=np.int64)
        _, inv = np.unique(code, return_inverse=True)
    else:
        _, inv = np.unique(np.stack([np.asarray(v) for v, _ in columns], axis=1),
                           axis=0, return_inverse=True)
    return inv.ravel()


def _entropy_of_labels(labels: np.ndarray, prob: np.ndarray) -> float:
    return entropy_bits(np.bincount(labels, weights=prob))


def conditional_entropy(prob, secret_cols, obs_cols) -> float:
    """H(S | O) in bits from a weighted table of deterministic columns."""
    n = len(prob)
    so = _labels(secret_cols + obs_cols, n)
    o = _labels(obs_cols, n)
    return max(0.0, _entropy_of_labels(so, prob) - _entropy_of_labels(o, prob))


def _obs_columns(t: _Table, spec: ObservationSpec, cb: BinningCodebook):
    cols = [t.slots[s] for s in spec.visible_slots()]
    for pos in spec.leaked_y_positions:
        if not 0 <= pos < cb.K:
            raise ValueError(f"leaked position {pos} outside 0..{cb.K - 1}")
        cols.append((t.ys[t.j, pos], cb.src.ny))
    return cols


def security_bounds(target: SecurityTarget, plan: KeyPlan, mu: MuComponents,
                    eps_prime: float) -> dict[str, float]:
    """Lower bounds the achievability constructions guarantee, per secret."""
    if target.case_id == 1:
        h = target.h_xy
        if plan.subcase == "1-low":
            return {"xy": h - mu.mu_c - eps_prime}
        return {"xy": h - mu.mu_c - mu.mu_y - eps_prime}
    t = target.as_case2()
    y_bound = t.h_y - mu.mu_c - mu.mu_y - eps_prime
    if target.case_id == 3:
        return {"y": y_bound}
    return {"x": t.h_x - eps_prime, "y": y_bound}


def exact_leakage(src, codebook: BinningCodebook, plan: KeyPlan | None,
                  spec: ObservationSpec, *, chains=(), target: SecurityTarget | None = None,
                  mu: MuComponents | None = None,
                  eps_prime: float | None = None) -> LeakageReport:
    """Exact (1/K)H(. | observation) for X^K, Y^K and the pair.

    When ``target`` is given, the report carries the construction's lower
    bounds and a pass flag per secret.  ``mu`` defaults to the proportional
    share of the leaked positions.
    """
    if codebook.src is not src and not np.array_equal(codebook.src.pmf, src.pmf):
        raise ValueError("codebook was built for a different source")
    K = codebook.K
    t = _enumerate(codebook, plan, tuple(chains))
    obs = _obs_columns(t, spec, codebook)
    xcol = [(t.i, src.nx ** K)]
    ycol = [(t.j, src.ny ** K)]
    hx = conditional_entropy(t.prob, xcol, obs) / K
    hy = conditional_entropy(t.prob, ycol, obs) / K
    hxy = conditional_entropy(t.prob, xcol + ycol, obs) / K
    stats = entropies(src)
    if mu is None:
        mu = mu_components(stats, K, len(spec.leaked_y_positions))
    bounds, passed = {}, {}
    if target is not None:
        if plan is None:
            raise ValueError("a target needs a plan")
        eps = default_slack(K) if eps_prime is None else eps_prime
        bounds = security_bounds(target, plan, mu, eps)
        got = {"x": hx, "y": hy, "xy": hxy}
        passed = {k: got[k] >= b - 1e-9 for k, b in bounds.items()}
    return LeakageReport(K, hx, hy, hxy, stats.h_x, stats.h_y, stats.h_xy, mu,
                         target, MappingProxyType(bounds), MappingProxyType(passed))


def slot_equivocation(src, codebook: BinningCodebook, plan: KeyPlan, spec: ObservationSpec,
                      slot: str, *, chains=()) -> float:
    """H(plaintext of ``slot`` | observation) in bits (not normalized)."""
    t = _enumerate(codebook, plan, tuple(chains))
    return conditional_entropy(t.prob, [t.plain[slot]], _obs_columns(t, spec, codebook))


def slot_information(src, codebook: BinningCodebook, plan: KeyPlan, slot: str, *,
                     chains=()) -> float:
    """I(ciphertext of ``slot`` ; X^K, Y^K, every other slot not sharing its key)."""
    t = _enumerate(codebook, plan, tuple(chains))
    c, m = t.slots[slot]
    key = plan.slot_keys.get(slot)
    others = []
    for s in SLOT_NAMES:
        if s == slot or (key is not None and plan.slot_keys.get(s) == key):
            continue
        # a slot chained from this one carries its plaintext, not its key
        others.append(t.slots[s])
    n = len(t.prob)
    z = [(t.i, src.nx ** codebook.K), (t.j, src.ny ** codebook.K)] + others
    hc = _entropy_of_labels(_labels([(c, m)], n), t.prob)
    hz = _entropy_of_labels(_labels(z, n), t.prob)
    hcz = _entropy_of_labels(_labels([(c, m)] + z, n), t.prob)
    return max(0.0, hc + hz - hcz)


def pad_independence_check(src, codebook: BinningCodebook, plan: KeyPlan, slot: str, *,
                           chains=()) -> float:
    """Exact mutual information between a padded slot and everything it must hide.

    A modulus-1 slot carries nothing and returns 0; any other slot must be
    padded by a key component, otherwise :class:`SlotNotKeyed` is raised.
    """
    m = {"x1": plan.m_x1, "y1": plan.m_y1, "cx": plan.m_cx, "cy": plan.m_cy,
         "x2": -(-codebook.cfg.m_x // plan.m_x1),
         "y2": -(-codebook.cfg.m_y // plan.m_y1)}[slot]
    if m == 1:
        return 0.0
    if slot not in plan.slot_keys or any(tg == slot for tg, _ in chains):
        raise SlotNotKeyed(f"slot {slot} is not padded by a fresh key")
    return slot_information(src, codebook, plan, slot, chains=chains)


# --------------------------------------------------------------------------
# Uncertainty inequalities of the prototype code


@dataclass(frozen=True)
class InequalityResult:
    ineq_id: str
    lhs: float
    rhs: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def size_exponents(codebook: BinningCodebook, plan: KeyPlan, rates: str = "nominal"):
    """log2 of every component size, in bits.

    ``"realized"`` uses the rounded moduli actually drawn; ``"nominal"`` uses
    the exponents before rounding up.  A split part never exceeds the index
    it is cut from.
    """
    cfg = codebook.cfg
    if rates == "realized":
        lx, ly = math.log2(cfg.m_x), math.log2(cfg.m_y)
        x1 = min(math.log2(plan.m_x1), lx)
        y1 = min(math.log2(plan.m_y1), ly)
        x2 = math.log2(-(-cfg.m_x // plan.m_x1))
        y2 = math.log2(-(-cfg.m_y // plan.m_y1))
        return dict(x=lx, y=ly, x1=x1, x2=x2, y1=y1, y2=y2,
                    cx=math.log2(cfg.m_cx), cy=math.log2(cfg.m_cy))
    if rates != "nominal":
        raise ValueError(f"unknown rates mode {rates!r}")
    x1 = min(plan.x1_bits, cfg.log_m_x)
    y1 = min(plan.y1_bits, cfg.log_m_y)
    return dict(x=cfg.log_m_x, y=cfg.log_m_y, x1=x1, x2=cfg.log_m_x - x1,
                y1=y1, y2=cfg.log_m_y - y1, cx=cfg.log_m_cx, cy=cfg.log_m_cy)


def inequality_suite(src, codebook: BinningCodebook, plan: KeyPlan, *,
                     k2: int | None = None, eps_prime: float = 0.25,
                     rates: str = "nominal") -> list[InequalityResult]:
    """Evaluate the twelve wiretap uncertainty inequalities exactly.

    Left-hand sides are (1/K)H(secret | components) of the unpadded
    prototype code with the plan's split moduli.  Component sizes on the
    right-hand side come from :func:`size_exponents`.  ``ineq_7`` is
    evaluated in the form H(Y^K | W_X, W_CX) >= H(Y|X) + (1/K) log M_CY,
    the mirror image of ``ineq_6``; see :func:`printed_ineq_7`.
    """
    K = codebook.K
    if k2 is None:
        k2 = max(1, K // 4)
    t = _enumerate(codebook, plan)
    stats = entropies(src)
    mu = mu_components(stats, K, k2)
    I = stats.i_xy
    c = dict(t.plain)
    c["wx"] = (codebook.f_x[t.i], codebook.cfg.m_x)
    c["wy"] = (codebook.f_y[t.j], codebook.cfg.m_y)
    c["wcx"], c["wcy"] = c.pop("cx"), c.pop("cy")
    e = {k: v / K for k, v in size_exponents(codebook, plan, rates).items()}
    X = [(t.i, src.nx ** K)]
    Y = [(t.j, src.ny ** K)]

    def h(secret, names):
        return conditional_entropy(t.prob, secret, [c[n] for n in names]) / K

    rows = [
        ("ineq_1", h(X, ["x2", "wy"]), I + e["x1"]),
        ("ineq_2", h(Y, ["wx", "y2"]), I + e["y1"]),
        ("ineq_3", h(X, ["wx", "y2"]), I),
        ("ineq_4", h(X, ["wx", "wy", "wcy"]), e["cx"]),
        ("ineq_5", h(Y, ["wx", "wy", "wcy"]), e["cx"]),
        ("ineq_6", h(X, ["wy", "wcy"]), stats.h_x_given_y + e["cx"]),
        ("ineq_7", h(Y, ["wx", "wcx"]), stats.h_y_given_x + e["cy"]),
    ]
    # i.i.d. symbols: (1/K2) H(Y^{K2}) = H(Y)
    h_leak = stats.h_y if k2 > 0 else 0.0
    rows.append(("ineq_7.1", h_leak, mu.mu_c + mu.mu_y))
    rows += [
        ("ineq_8", h(Y, ["wx", "wcx", "wcy", "y2"]), e["y1"]),
        ("ineq_9", h(Y, ["wx", "wcx", "wcy"]), e["y1"] + e["y2"]),
        ("ineq_10", h(X, ["x2", "wcy"]), e["x1"] + e["cx"]),
        ("ineq_11", h(Y, ["x2", "wcy"]), e["y1"] + e["y2"] + e["cx"]),
    ]
    return [InequalityResult(name, lhs, rhs, lhs >= rhs - eps_prime - 1e-9)
            for name, lhs, rhs in rows]


def printed_ineq_7(src, codebook: BinningCodebook, plan: KeyPlan) -> tuple[float, float]:
    """(lhs, rhs) of H(Y^K | W_Y, W_CY) >= H(Y|X) + (1/K) log M_CX, literally."""
    K = codebook.K
    t = _enumerate(codebook, plan)
    stats = entropies(src)
    lhs = conditional_entropy(t.prob, [(t.j, src.ny ** K)],
                              [(codebook.f_y[t.j], codebook.cfg.m_y), t.plain["cy"]]) / K
    return lhs, stats.h_y_given_x + math.log2(codebook.cfg.m_cx) / K


# --------------------------------------------------------------------------
# Reference enumeration: scalar, observation-first


def exact_leakage_reference(src, codebook: BinningCodebook, plan: KeyPlan,
                            spec: ObservationSpec, *, chains=()) -> tuple[float, float, float]:
    """Slow second route to (h_x, h_y, h_xy | observation) per symbol.

    Walks every configuration through the scalar transmission API, groups the
    posterior mass by observation and sums p(o) H(S | O = o).
    """
    K = codebook.K
    xs = all_sequences(src.nx, K)
    ys = all_sequences(src.ny, K)
    names = list(plan.key_moduli)
    n_keys = math.prod(plan.key_moduli.values())
    visible = spec.visible_slots()
    posterior = defaultdict(lambda: defaultdict(float))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            p = float(np.prod(src.pmf[x, y]))
            if p == 0.0:
                continue
            cw = PrototypeCodeword(int(codebook.f_x[i]), int(codebook.f_y[j]),
                                   int(codebook.f_cx[i]), int(codebook.f_cy[j]),
                                   *codebook.moduli)
            for combo in itertools.product(*[range(plan.key_moduli[n]) for n in names]):
                keys = KeySchedule(dict(zip(names, combo)), plan.key_moduli)
                tp = build_transmission(cw, plan, keys)
                for target, source in chains:
                    tp = chain_mask(tp, plan, keys, target=target, source=source)
                o = tuple(tp.slot(s).value for s in visible) + \
                    tuple(int(y[pos]) for pos in spec.leaked_y_positions)
                posterior[o][(i, j)] += p / n_keys

    totals = [0.0, 0.0, 0.0]
    for dist in posterior.values():
        p_o = sum(dist.values())
        by_x, by_y = defaultdict(float), defaultdict(float)
        for (i, j), q in dist.items():
            by_x[i] += q
            by_y[j] += q
        for slot_, d in enumerate((by_x, by_y, dist)):
            cond = np.array(list(d.values())) / p_o
            totals[slot_] += p_o * entropy_bits(cond)
    return totals[0] / K, totals[1] / K, totals[2] / K
