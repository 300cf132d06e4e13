"""Closed-form admissible rate regions and key-rate lower bounds.

Every region is a handful of linear constraints on
(R_X, R_Y, R_kX, R_kY).  Verdicts carry the signed margin of each violated
constraint so callers can see how far outside the region a point lies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cipher import SecurityTarget
from .source_model import MuComponents, SourceStats

MARGIN_TOL = 1e-9


@dataclass(frozen=True)
class RatePoint:
    r_x: float
    r_y: float
    r_kx: float
    r_ky: float

    def __post_init__(self):
        for name in ("r_x", "r_y", "r_kx", "r_ky"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a finite non-negative rate, got {v}")


@dataclass(frozen=True)
class RegionVerdict:
    """``violated`` lists (constraint name, margin) pairs with margin < 0."""

    margins: tuple[tuple[str, float], ...]
    violated: tuple[tuple[str, float], ...]

    @property
    def member(self) -> bool:
        return not self.violated

    def margin(self, name: str) -> float:
        return dict(self.margins)[name]


def _verdict(checks) -> RegionVerdict:
    margins = tuple((name, float(have - need)) for name, have, need in checks)
    violated = tuple((n, m) for n, m in margins if m < -MARGIN_TOL)
    return RegionVerdict(margins=margins, violated=violated)


def _channel_checks(p: RatePoint, stats: SourceStats):
    return [
        ("R_X >= H(X|Y)", p.r_x, stats.h_x_given_y),
        ("R_Y >= H(Y|X)", p.r_y, stats.h_y_given_x),
        ("R_X + R_Y >= H(X,Y)", p.r_x + p.r_y, stats.h_xy),
    ]


def in_region_case1(p: RatePoint, stats: SourceStats, h_xy: float,
                    mu: MuComponents | None = None) -> RegionVerdict:
    """Joint secrecy of (X, Y): the key sum must cover ``h_xy``."""
    SecurityTarget(1, h_xy=h_xy).validate(stats, mu)
    return _verdict(_channel_checks(p, stats) +
                    [("R_kX + R_kY >= h_XY", p.r_kx + p.r_ky, h_xy)])


def in_region_case2(p: RatePoint, stats: SourceStats, h_x: float, h_y: float,
                    mu: MuComponents | None = None) -> RegionVerdict:
    """Separate secrecy of X and Y: the key sum must cover the larger level."""
    SecurityTarget(2, h_x=h_x, h_y=h_y).validate(stats, mu)
    return _verdict(_channel_checks(p, stats) +
                    [("R_kX + R_kY >= max(h_X, h_Y)", p.r_kx + p.r_ky, max(h_x, h_y))])


def in_region_case3(p: RatePoint, stats: SourceStats, h_y: float,
                    mu: MuComponents | None = None) -> RegionVerdict:
    return in_region_case2(p, stats, 0.0, h_y, mu)


def in_region(p: RatePoint, stats: SourceStats, target: SecurityTarget,
              mu: MuComponents | None = None) -> RegionVerdict:
    if target.case_id == 1:
        return in_region_case1(p, stats, target.h_xy, mu)
    if target.case_id == 3:
        return in_region_case3(p, stats, target.h_y, mu)
    return in_region_case2(p, stats, target.h_x, target.h_y, mu)


def converse_key_bounds(stats: SourceStats, target: SecurityTarget,
                        mu: MuComponents | None = None) -> tuple[float, float]:
    """Lower bounds (r_kx_min, r_ky_min) on the key rates of each encoder."""
    mu = mu or MuComponents(0.0, 0.0)
    target.validate(stats, mu)
    if target.case_id == 1:
        return (max(0.0, target.h_xy - mu.mu_c),
                max(0.0, target.h_xy - mu.mu_c - mu.mu_y))
    t = target.as_case2()
    return max(0.0, t.h_x - mu.mu_c), max(0.0, t.h_y - mu.mu_c - mu.mu_y)


@dataclass(frozen=True)
class SweepRow:
    case_id: int
    h: float
    min_key_sum: float
    r_kx_min: float
    r_ky_min: float
    # the two Slepian-Wolf corner points
    corner_x_first: tuple[float, float]
    corner_y_first: tuple[float, float]


def max_level(stats: SourceStats, case_id: int, mu: MuComponents | None = None) -> float:
    """Largest admissible level swept for ``case_id``.

    Case 2 sweeps h_x = h_y = h, so its ceiling is the smaller of the two
    individual ranges.
    """
    mu = mu or MuComponents(0.0, 0.0)
    top_y = stats.h_y - mu.mu_c - mu.mu_y
    if case_id == 1:
        return max(0.0, stats.h_xy - mu.mu_c - mu.mu_y)
    if case_id == 2:
        return max(0.0, min(stats.h_x - mu.mu_c, top_y))
    if case_id == 3:
        return max(0.0, top_y)
    raise ValueError(f"unknown case {case_id}")


def _target(case_id: int, h: float) -> SecurityTarget:
    if case_id == 1:
        return SecurityTarget(1, h_xy=h)
    if case_id == 2:
        return SecurityTarget(2, h_x=h, h_y=h)
    return SecurityTarget(3, h_y=h)


def boundary_sweep(stats: SourceStats, case_id: int, resolution: int,
                   mu: MuComponents | None = None) -> list[SweepRow]:
    """Minimal key sum and converse bounds on an even grid of levels."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    corner_x = (stats.h_x, stats.h_y_given_x)
    corner_y = (stats.h_x_given_y, stats.h_y)
    rows = []
    for h in np.linspace(0.0, max_level(stats, case_id, mu), resolution):
        h = float(h)
        t = _target(case_id, h)
        kx, ky = converse_key_bounds(stats, t, mu)
        rows.append(SweepRow(case_id, h, t.key_rate, kx, ky, corner_x, corner_y))
    return rows
