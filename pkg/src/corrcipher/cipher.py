"""Key planning, one-time padding and assembly of the transmitted words.

The padding operation is addition modulo the slot modulus.  A plan decides
which of the six transmitted slots

    W_1 = (x1, x2, cx)        W_2 = (y1, y2, cy)

are padded and by which key component.  Key components are named ``kx1``,
``ky1``, ``kcx`` and ``kcy``; ``ky1`` pads both ``x1`` and ``y1`` in the
high sub-cases, exactly as the construction prescribes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import (NoKeyedSlotAvailable, OutOfRange, PlanMismatch,
                     TargetOutOfRange, ZeroModulus)
from .source_model import MuComponents, SourceStats
from .sw_codec import (CodebookConfig, PrototypeCodeword, SplitCodeword, modulus_from_bits,
                       split, unsplit)

SLOT_NAMES = ("x1", "x2", "cx", "y1", "y2", "cy")
KEY_NAMES = ("kx1", "ky1", "kcx", "kcy")
_TOL = 1e-9


@dataclass(frozen=True)
class SecurityTarget:
    """Required security level(s) in bits/symbol.

    case 1 uses ``h_xy``; case 2 uses ``h_x`` and ``h_y``; case 3 uses only
    ``h_y`` and is treated as case 2 with ``h_x = 0``.
    """

    case_id: int
    h_xy: float | None = None
    h_x: float | None = None
    h_y: float | None = None

    def __post_init__(self):
        if self.case_id not in (1, 2, 3):
            raise ValueError(f"unknown case {self.case_id}")
        if self.case_id == 1 and self.h_xy is None:
            raise ValueError("case 1 needs h_xy")
        if self.case_id == 2 and (self.h_x is None or self.h_y is None):
            raise ValueError("case 2 needs h_x and h_y")
        if self.case_id == 3 and self.h_y is None:
            raise ValueError("case 3 needs h_y")

    def as_case2(self) -> "SecurityTarget":
        if self.case_id == 3:
            return SecurityTarget(2, h_x=0.0, h_y=self.h_y)
        return self

    @property
    def key_rate(self) -> float:
        """Minimum total key rate demanded of the region."""
        if self.case_id == 1:
            return self.h_xy
        t = self.as_case2()
        return max(t.h_x, t.h_y)

    def validate(self, stats: SourceStats, mu: MuComponents | None = None) -> None:
        mu = mu or MuComponents(0.0, 0.0)
        if self.case_id == 1:
            _check_range("h_xy", self.h_xy, stats.h_xy - mu.mu_c - mu.mu_y)
        else:
            t = self.as_case2()
            _check_range("h_x", t.h_x, stats.h_x - mu.mu_c)
            _check_range("h_y", t.h_y, stats.h_y - mu.mu_c - mu.mu_y)


def _check_range(name, value, upper):
    if not (-_TOL <= value <= upper + _TOL):
        raise TargetOutOfRange(f"{name}={value} outside [0, {upper:.9f}]")


@dataclass(frozen=True, eq=False)
class KeyPlan:
    """Moduli and key assignment for one construction.

    ``m_cx`` / ``m_cy`` are the common-bin sizes the codebook must use;
    ``slot_keys`` maps each padded slot to the key component covering it.
    """

    case_id: int
    subcase: str
    K: int
    m_x1: int
    m_y1: int
    m_cx: int
    m_cy: int
    slot_keys: Mapping[str, str]
    key_moduli: Mapping[str, int]
    target_key_rate: float
    # exponents before rounding up, in bits
    x1_bits: float = 0.0
    y1_bits: float = 0.0
    cx_bits: float = 0.0
    cy_bits: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "slot_keys", MappingProxyType(dict(self.slot_keys)))
        object.__setattr__(self, "key_moduli", MappingProxyType(dict(self.key_moduli)))

    def _key(self):
        return (self.case_id, self.subcase, self.K, self.m_x1, self.m_y1, self.m_cx,
                self.m_cy, tuple(sorted(self.slot_keys.items())),
                tuple(sorted(self.key_moduli.items())), self.target_key_rate,
                self.x1_bits, self.y1_bits, self.cx_bits, self.cy_bits)

    def __hash__(self):
        return hash(self._key())

    def __eq__(self, other):
        if not isinstance(other, KeyPlan):
            return NotImplemented
        return self._key() == other._key()

    @property
    def keyed_slots(self) -> tuple[str, ...]:
        return tuple(s for s in SLOT_NAMES if s in self.slot_keys)

    @property
    def m_cx_keyed(self) -> int:
        return self.m_cx if "cx" in self.slot_keys else 1

    @property
    def m_cy_keyed(self) -> int:
        return self.m_cy if "cy" in self.slot_keys else 1

    @property
    def key_bits(self) -> float:
        return sum(math.log2(m) for m in self.key_moduli.values())

    @property
    def achieved_key_rate(self) -> float:
        return self.key_bits / self.K

    @property
    def key_rate_slack(self) -> float:
        """Allowed ceiling overshoot: one bit per key component."""
        return len(self.key_moduli) / self.K

    def key_rate_split(self) -> tuple[float, float]:
        """(R_kX, R_kY): key components allocated by each encoder."""
        kx = sum(math.log2(self.key_moduli[k]) for k in ("kx1", "kcx") if k in self.key_moduli)
        ky = sum(math.log2(self.key_moduli[k]) for k in ("ky1", "kcy") if k in self.key_moduli)
        return kx / self.K, ky / self.K


def _common_split(stats: SourceStats, K: int, alpha: float,
                  eps0: float = 0.0) -> tuple[float, float]:
    bits = K * (stats.i_xy + eps0)
    return alpha * bits, (1 - alpha) * bits


def _low_common(stats: SourceStats, K: int, h: float,
                eps0: float = 0.0) -> tuple[float, float]:
    return K * h, max(0.0, K * (stats.i_xy + eps0 - h))


def _plan(case_id, subcase, K, x1_bits, y1_bits, common, slot_keys, key_slots, rate):
    """Round every exponent up and attach key moduli to the named slots."""
    m = modulus_from_bits
    cx_bits, cy_bits = common
    moduli = {"x1": m(x1_bits), "y1": m(y1_bits), "cx": m(cx_bits), "cy": m(cy_bits)}
    key_moduli = {k: moduli[slot] for k, slot in key_slots.items()}
    return KeyPlan(case_id, subcase, K, moduli["x1"], moduli["y1"], moduli["cx"],
                   moduli["cy"], slot_keys, key_moduli, rate,
                   x1_bits, y1_bits, cx_bits, cy_bits)


def plan_keys(stats: SourceStats, K: int, target: SecurityTarget,
              mu: MuComponents | None = None, alpha: float = 0.5,
              eps0: float = 0.0) -> KeyPlan:
    """Size the split moduli and key components for ``target``.

    The sub-case is chosen by comparing the target with I(X;Y).  Key
    exponents are rounded up to whole bits.  Case 2 constructions are stated
    for h_x <= h_y; the ``-mirror`` sub-cases swap the roles of X and Y.

    ``eps0`` widens the common bins by that many bits/symbol, matching a
    codebook built with the same slack.  Keyed common slots then carry the
    extra bits too, so the achieved key rate exceeds the target by up to
    ``eps0`` on top of the rounding slack.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if eps0 < 0:
        raise ValueError("eps0 must be >= 0")
    target.validate(stats, mu)
    I = stats.i_xy
    pos = lambda bits: max(0.0, bits)  # noqa: E731
    both = {"x1": "ky1", "y1": "ky1", "cx": "kcx", "cy": "kcy"}
    both_keys = {"ky1": "y1", "kcx": "cx", "kcy": "cy"}

    if target.case_id == 1:
        h = target.h_xy
        if h > I:
            y1 = pos(K * (h - I))
            x1 = min(K * stats.h_x_given_y, y1)
            return _plan(1, "1-high", K, x1, y1, _common_split(stats, K, alpha, eps0),
                         both, both_keys, h)
        return _plan(1, "1-low", K, 0.0, 0.0, _low_common(stats, K, h, eps0),
                     {"cx": "kcx"}, {"kcx": "cx"}, h)

    t = target.as_case2()
    h_x, h_y = t.h_x, t.h_y
    h_max, h_min = max(h_x, h_y), min(h_x, h_y)
    cid = target.case_id
    common = _common_split(stats, K, alpha, eps0)
    if h_min > I:
        if h_y >= h_x:
            y1 = pos(K * (h_max - I))
            x1 = min(K * stats.h_x_given_y, y1)
            return _plan(cid, "2-A", K, x1, y1, common, both, both_keys, h_max)
        x1 = pos(K * (h_max - I))
        y1 = min(K * stats.h_y_given_x, x1)
        return _plan(cid, "2-A-mirror", K, x1, y1, common,
                     {"x1": "kx1", "y1": "kx1", "cx": "kcx", "cy": "kcy"},
                     {"kx1": "x1", "kcx": "cx", "kcy": "cy"}, h_max)
    if h_max > I:
        bits = pos(K * (h_max - I))
        if h_y >= h_x:
            return _plan(cid, "2-B", K, 0.0, bits, common,
                         {"y1": "ky1", "cx": "kcx", "cy": "kcy"}, both_keys, h_max)
        return _plan(cid, "2-B-mirror", K, bits, 0.0, common,
                     {"x1": "kx1", "cx": "kcx", "cy": "kcy"},
                     {"kx1": "x1", "kcx": "cx", "kcy": "cy"}, h_max)
    return _plan(cid, "2-C", K, 0.0, 0.0, _low_common(stats, K, h_max, eps0),
                 {"cx": "kcx"}, {"kcx": "cx"}, h_max)


def codebook_config_for_plan(stats: SourceStats, plan: KeyPlan, *, eps0: float = 0.0,
                             seed: int = 0) -> CodebookConfig:
    """Codebook whose common bins have exactly the plan's moduli."""
    K = plan.K
    return CodebookConfig(K=K,
                          log_m_x=K * (stats.h_x_given_y + eps0),
                          log_m_y=K * (stats.h_y_given_x + eps0),
                          log_m_cx=plan.cx_bits,
                          log_m_cy=plan.cy_bits,
                          epsilon0=eps0, seed=seed)


@dataclass(frozen=True)
class KeySchedule:
    values: Mapping[str, int]
    moduli: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        object.__setattr__(self, "moduli", MappingProxyType(dict(self.moduli)))

    def __eq__(self, other):
        if not isinstance(other, KeySchedule):
            return NotImplemented
        return dict(self.values) == dict(other.values) and dict(self.moduli) == dict(other.moduli)

    __hash__ = None

    def present(self, name: str) -> bool:
        return name in self.values

    @property
    def w_kx(self) -> tuple[int, ...]:
        return tuple(self.values[k] for k in ("kx1", "kcx") if k in self.values)

    @property
    def w_ky(self) -> tuple[int, ...]:
        return tuple(self.values[k] for k in ("ky1", "kcy") if k in self.values)


def generate_keys(plan: KeyPlan, seed: int) -> KeySchedule:
    """Independent uniform key components, one generator stream per name."""
    values = {}
    for name in KEY_NAMES:
        if name not in plan.key_moduli:
            continue
        # one stream per component name keeps components independent of which others exist
        rng = np.random.default_rng([seed, KEY_NAMES.index(name)])
        values[name] = int(rng.integers(0, plan.key_moduli[name]))
    return KeySchedule(values, plan.key_moduli)


def _check_index(v, m):
    if m < 1:
        raise ZeroModulus("modulus must be >= 1")
    if not 0 <= v < m:
        raise OutOfRange(f"{v} outside Z_{m}")


def mask(w: int, k: int, M: int) -> int:
    _check_index(w, M)
    _check_index(k, M)
    return (w + k) % M


def unmask(c: int, k: int, M: int) -> int:
    _check_index(c, M)
    _check_index(k, M)
    return (c - k) % M


@dataclass(frozen=True)
class Slot:
    """One transmitted component.

    ``key`` names the key component padding it; ``chained_from`` names the
    keyed slot whose plaintext additionally pads it.
    """

    name: str
    value: int
    modulus: int
    key: str | None = None
    chained_from: str | None = None


@dataclass(frozen=True)
class TransmittedPair:
    w1: tuple[Slot, Slot, Slot]
    w2: tuple[Slot, Slot, Slot]
    m_x: int
    m_y: int

    @property
    def slots(self) -> tuple[Slot, ...]:
        return self.w1 + self.w2

    def slot(self, name: str) -> Slot:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)

    def with_slot(self, new: Slot) -> "TransmittedPair":
        w1 = tuple(new if s.name == new.name else s for s in self.w1)
        w2 = tuple(new if s.name == new.name else s for s in self.w2)
        return replace(self, w1=w1, w2=w2)


def _key_for_slot(keys: KeySchedule, key_name: str, modulus: int) -> int:
    # key moduli are powers of two >= the slot modulus, so the reduction stays uniform
    return keys.values[key_name] % modulus


def _check_keys(plan: KeyPlan, keys: KeySchedule) -> None:
    if dict(keys.moduli) != dict(plan.key_moduli) or set(keys.values) != set(plan.key_moduli):
        raise PlanMismatch("key schedule does not match the plan")


def build_transmission(cw: PrototypeCodeword, plan: KeyPlan, keys: KeySchedule) -> TransmittedPair:
    """Split the private indices and pad the slots the plan marks as keyed."""
    if cw.m_cx != plan.m_cx or cw.m_cy != plan.m_cy:
        raise PlanMismatch(f"codebook common moduli ({cw.m_cx}, {cw.m_cy}) differ from "
                           f"the plan's ({plan.m_cx}, {plan.m_cy})")
    _check_keys(plan, keys)
    sx = split(cw.w_x, plan.m_x1, cw.m_x)
    sy = split(cw.w_y, plan.m_y1, cw.m_y)
    plain = {"x1": (sx.w1, sx.m1), "x2": (sx.w2, sx.m2), "cx": (cw.w_cx, cw.m_cx),
             "y1": (sy.w1, sy.m1), "y2": (sy.w2, sy.m2), "cy": (cw.w_cy, cw.m_cy)}
    out = []
    for name in SLOT_NAMES:
        value, modulus = plain[name]
        key_name = plan.slot_keys.get(name)
        if key_name is not None:
            value = mask(value, _key_for_slot(keys, key_name, modulus), modulus)
        out.append(Slot(name, value, modulus, key_name))
    return TransmittedPair(tuple(out[:3]), tuple(out[3:]), cw.m_x, cw.m_y)


def _check_tp(tp: TransmittedPair, plan: KeyPlan) -> None:
    expect = {"x1": plan.m_x1, "y1": plan.m_y1, "cx": plan.m_cx, "cy": plan.m_cy,
              "x2": -(-tp.m_x // plan.m_x1), "y2": -(-tp.m_y // plan.m_y1)}
    for s in tp.slots:
        if s.modulus != expect[s.name] or s.key != plan.slot_keys.get(s.name):
            raise PlanMismatch(f"slot {s.name} does not match the plan")


def _source_plaintext(tp: TransmittedPair, keys: KeySchedule, name: str) -> int:
    s = tp.slot(name)
    return unmask(s.value, _key_for_slot(keys, s.key, s.modulus), s.modulus)


def unchain_mask(tp: TransmittedPair, keys: KeySchedule) -> TransmittedPair:
    """Remove every chain pad, leaving only the fresh-key pads."""
    for s in tp.slots:
        if s.chained_from is None:
            continue
        pad = _source_plaintext(tp, keys, s.chained_from) % s.modulus
        tp = tp.with_slot(replace(s, value=(s.value - pad) % s.modulus, chained_from=None))
    return tp


def receiver_decrypt(tp: TransmittedPair, plan: KeyPlan, keys: KeySchedule) -> PrototypeCodeword:
    """Invert :func:`build_transmission` (and any chain masking)."""
    _check_tp(tp, plan)
    _check_keys(plan, keys)
    tp = unchain_mask(tp, keys)
    plain = {}
    for s in tp.slots:
        v = s.value
        if s.key is not None:
            v = unmask(v, _key_for_slot(keys, s.key, s.modulus), s.modulus)
        plain[s.name] = v
    w_x = unsplit(SplitCodeword(plain["x1"], plain["x2"], plan.m_x1))
    w_y = unsplit(SplitCodeword(plain["y1"], plain["y2"], plan.m_y1))
    if w_x >= tp.m_x or w_y >= tp.m_y:
        raise OutOfRange("decrypted private index outside its modulus")
    return PrototypeCodeword(w_x, w_y, plain["cx"], plain["cy"],
                             tp.m_x, tp.m_y, plan.m_cx, plan.m_cy)


def chain_mask(tp: TransmittedPair, plan: KeyPlan, keys: KeySchedule,
               target: str | None = None, source: str | None = None) -> TransmittedPair:
    """Pad an unkeyed slot with the plaintext of an already keyed slot.

    Only slots padded by a key component (and not chained themselves) may
    act as ``source``, and the source modulus must be at least the target
    modulus.  Without ``target``, the first eligible unkeyed slot of modulus
    > 1 is used; without ``source``, the eligible keyed slot of largest
    modulus.  No new key material is consumed.
    """
    _check_tp(tp, plan)
    keyed = [s for s in tp.slots if s.key is not None and s.chained_from is None]
    if not keyed:
        raise NoKeyedSlotAvailable("transmission has no keyed slot to chain from")

    def sources_for(t: Slot):
        cands = [s for s in keyed if s.modulus >= t.modulus]
        if source is not None:
            cands = [s for s in cands if s.name == source]
        return sorted(cands, key=lambda s: -s.modulus)

    if target is None:
        targets = [s for s in tp.slots if s.key is None and s.chained_from is None
                   and s.modulus > 1 and sources_for(s)]
        if not targets:
            raise NoKeyedSlotAvailable("no unkeyed slot can be covered by a keyed slot")
        t = targets[0]
    else:
        t = tp.slot(target)
        if t.key is not None or t.chained_from is not None:
            raise ValueError(f"slot {target} is already covered")
    srcs = sources_for(t)
    if not srcs:
        raise NoKeyedSlotAvailable(f"no keyed slot with modulus >= {t.modulus}")
    src = srcs[0]
    pad = _source_plaintext(tp, keys, src.name) % t.modulus
    return tp.with_slot(replace(t, value=(t.value + pad) % t.modulus, chained_from=src.name))


def assemble_slots(wx, wy, wcx, wcy, key_values: Mapping[str, np.ndarray], plan: KeyPlan,
                   m_x: int, m_y: int, chains: tuple[tuple[str, str], ...] = ()):
    """Vectorised transmission for the exhaustive oracle.

    Takes integer arrays (broadcastable) of prototype indices and key values;
    returns ``{slot: (ciphertext, modulus)}``.  ``chains`` holds
    ``(target, source)`` pairs applied after the key pads.
    """
    m_x2 = -(-m_x // plan.m_x1)
    m_y2 = -(-m_y // plan.m_y1)
    plain = {"x1": (wx % plan.m_x1, plan.m_x1), "x2": (wx // plan.m_x1, m_x2),
             "cx": (wcx, plan.m_cx),
             "y1": (wy % plan.m_y1, plan.m_y1), "y2": (wy // plan.m_y1, m_y2),
             "cy": (wcy, plan.m_cy)}
    out = {}
    for name, (v, m) in plain.items():
        key_name = plan.slot_keys.get(name)
        if key_name is not None:
            v = (v + key_values[key_name] % m) % m
        out[name] = (v, m)
    for target, source in chains:
        v, m = out[target]
        out[target] = ((v + plain[source][0] % m) % m, m)
    return out
