"""Seeded experiment runner and report writer.

A run wires source -> codebook -> key plan -> transmission -> exact
wiretapper leakage -> region check, once per seed, and emits one
:class:`ReportRow` per seed.  Configs are TOML files parsed strictly:
unknown sections or keys are rejected.

    python -m corrcipher run experiment.toml --format json --out report.json
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, get_type_hints

import numpy as np
import tomli

from . import cipher, eavesdropper_oracle as oracle, rate_region, sw_codec
from .cipher import SecurityTarget
from .errors import ConfigInvalid, CorrCipherError, IoFailure, NoConsistentPair
from .source_model import JointSource, build_source, entropies, mu_components, sample_pair

FLOAT_DIGITS = 9
_TOL = 1e-9

_SCHEMA = {
    "experiment": {"id": str, "seeds": list, "threads": int},
    "source": {"pmf": list},
    "block": {"K": int, "K1": int, "K2": int},
    "target": {"case": int, "h_xy": float, "h_x": float, "h_y": float},
    "code": {"alpha": float, "eps0": float, "eps_prime": float, "chain_mask": bool},
    "sweep": {"resolution": int},
    "region": {"r_x": float, "r_y": float, "r_kx": float, "r_ky": float},
    "output": {"path": str, "format": str},
}
_REQUIRED = {"experiment": ("id", "seeds"), "source": ("pmf",), "block": ("K", "K2"),
             "target": ("case",)}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    pmf: tuple[tuple[float, ...], ...]
    K: int
    K1: int
    K2: int
    target: SecurityTarget
    seeds: tuple[int, ...]
    alpha: float = 0.5
    eps0: float = 0.0
    eps_prime: float | None = None
    chain_mask: bool = False
    threads: int = 1
    sweep_resolution: int = 5
    region_point: rate_region.RatePoint | None = None
    output_path: str | None = None
    output_format: str = "csv"

    @property
    def source(self) -> JointSource:
        return build_source(self.pmf)

    @property
    def slack(self) -> float:
        return oracle.default_slack(self.K) if self.eps_prime is None else self.eps_prime


def _typed(section: str, key: str, value):
    want = _SCHEMA[section][key]
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if want is int and isinstance(value, bool) or not isinstance(value, want):
        raise ConfigInvalid(f"[{section}] {key} must be {want.__name__}, got {value!r}")
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a parsed config mapping; every problem raises ConfigInvalid."""
    for section, body in data.items():
        if section not in _SCHEMA:
            raise ConfigInvalid(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigInvalid(f"[{section}] must be a table")
        for key in body:
            if key not in _SCHEMA[section]:
                raise ConfigInvalid(f"unknown key {key!r} in [{section}]")
    for section, keys in _REQUIRED.items():
        for key in keys:
            if key not in data.get(section, {}):
                raise ConfigInvalid(f"missing [{section}] {key}")
    get = lambda s, k, d=None: _typed(s, k, data[s][k]) if k in data.get(s, {}) else d  # noqa: E731

    K, K2 = get("block", "K"), get("block", "K2")
    K1 = get("block", "K1", K - K2)
    if K < 1 or K2 < 0 or K1 < 0 or K1 + K2 != K:
        raise ConfigInvalid(f"need K1 + K2 = K with non-negative parts, got {K1}+{K2} != {K}")
    seeds = get("experiment", "seeds")
    if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0
                            for s in seeds):
        raise ConfigInvalid("seeds must be a non-empty list of non-negative integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigInvalid("seeds must be distinct")
    try:
        src = build_source(get("source", "pmf"))
        target = SecurityTarget(get("target", "case"), h_xy=get("target", "h_xy"),
                                h_x=get("target", "h_x"), h_y=get("target", "h_y"))
        stats = entropies(src)
        target.validate(stats, mu_components(stats, K, K2))
    except (ValueError, CorrCipherError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    alpha = get("code", "alpha", 0.5)
    if not 0.0 <= alpha <= 1.0:
        raise ConfigInvalid("alpha must lie in [0, 1]")
    region = None
    if "region" in data:
        try:
            region = rate_region.RatePoint(**{k: get("region", k) for k in
                                              ("r_x", "r_y", "r_kx", "r_ky")})
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"[region] {exc}") from exc
    fmt = get("output", "format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigInvalid(f"unknown output format {fmt!r}")
    threads = get("experiment", "threads", 1)
    resolution = get("sweep", "resolution", 5)
    if threads < 1 or resolution < 2:
        raise ConfigInvalid("threads must be >= 1 and sweep resolution >= 2")
    return ExperimentConfig(
        experiment_id=get("experiment", "id"),
        pmf=tuple(tuple(float(v) for v in row) for row in get("source", "pmf")),
        K=K, K1=K1, K2=K2, target=target, seeds=tuple(seeds), alpha=alpha,
        eps0=get("code", "eps0", 0.0), eps_prime=get("code", "eps_prime"),
        chain_mask=get("code", "chain_mask", False), threads=threads,
        sweep_resolution=resolution, region_point=region,
        output_path=get("output", "path"), output_format=fmt)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigInvalid(f"{path}: {exc}") from exc
    return config_from_dict(data)


@dataclass(frozen=True)
class ReportRow:
    """One seeded trial.  Inapplicable targets and bounds are ``None``."""

    experiment_id: str
    seed: int
    case_id: int
    subcase: str
    K: int
    K2: int
    src_h_x: float
    src_h_y: float
    src_h_xy: float
    r_x: float
    r_y: float
    r_kx: float
    r_ky: float
    target_key_rate: float
    achieved_key_rate: float
    key_rate_slack: float
    target_xy: float | None
    target_x: float | None
    target_y: float | None
    h_xy_given_obs: float
    h_x_given_obs: float
    h_y_given_obs: float
    bound_xy: float | None
    bound_x: float | None
    bound_y: float | None
    pass_xy: bool | None
    pass_x: bool | None
    pass_y: bool | None
    region_pass: bool
    key_rate_pass: bool
    decoded: bool
    chain: str
    passed: bool
    wall_time: float | None = None


@dataclass(frozen=True)
class SweepRecord:
    experiment_id: str
    case_id: int
    h: float
    min_key_sum: float
    r_kx_min: float
    r_ky_min: float
    corner_x_first_r_x: float
    corner_x_first_r_y: float
    corner_y_first_r_x: float
    corner_y_first_r_y: float


@dataclass(frozen=True)
class RegionRecord:
    experiment_id: str
    case_id: int
    r_x: float
    r_y: float
    r_kx: float
    r_ky: float
    margin_r_x: float
    margin_r_y: float
    margin_sum_rate: float
    margin_key_sum: float
    passed: bool


def _trial(cfg: ExperimentConfig, seed: int, timing: bool) -> ReportRow:
    start = time.perf_counter()
    src = cfg.source
    stats = entropies(src)
    mu = mu_components(stats, cfg.K, cfg.K2)
    cb_seed, key_seed, pair_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(3))
    plan = cipher.plan_keys(stats, cfg.K, cfg.target, mu, alpha=cfg.alpha, eps0=cfg.eps0)
    cb = sw_codec.build_codebook(src, cipher.codebook_config_for_plan(
        stats, plan, eps0=cfg.eps0, seed=cb_seed))

    # one concrete transmission through the receiver pipeline
    pair = sample_pair(src, cfg.K, pair_seed, k2=cfg.K2)
    keys = cipher.generate_keys(plan, key_seed)
    tp = cipher.build_transmission(sw_codec.encode(cb, pair), plan, keys)
    chains = ()
    if cfg.chain_mask:
        tp = cipher.chain_mask(tp, plan, keys)
        chains = tuple((s.name, s.chained_from) for s in tp.slots if s.chained_from)
    try:
        got = sw_codec.decode(cb, cipher.receiver_decrypt(tp, plan, keys))
        decoded = bool(np.array_equal(got.x_seq, pair.x_seq) and
                       np.array_equal(got.y_seq, pair.y_seq))
    except NoConsistentPair:
        decoded = False

    rep = oracle.exact_leakage(src, cb, plan, oracle.ObservationSpec.full(cfg.K, cfg.K2),
                               chains=chains, target=cfg.target, mu=mu,
                               eps_prime=cfg.slack)
    m_x, m_y, m_cx, m_cy = cb.moduli
    r_x = (math.log2(m_x) + math.log2(m_cx)) / cfg.K
    r_y = (math.log2(m_y) + math.log2(m_cy)) / cfg.K
    r_kx, r_ky = plan.key_rate_split()
    verdict = rate_region.in_region(rate_region.RatePoint(r_x, r_y, r_kx, r_ky),
                                    stats, cfg.target, mu)
    # widened common bins may add up to eps0 of key on top of the rounding slack
    key_ok = plan.target_key_rate - _TOL <= plan.achieved_key_rate \
        <= plan.target_key_rate + plan.key_rate_slack + cfg.eps0 + _TOL
    t2 = cfg.target.as_case2() if cfg.target.case_id != 1 else None
    flags = {k: rep.passed.get(k) for k in ("xy", "x", "y")}
    passed = all(v for v in flags.values() if v is not None) and verdict.member and key_ok
    return ReportRow(
        experiment_id=cfg.experiment_id, seed=seed, case_id=cfg.target.case_id,
        subcase=plan.subcase, K=cfg.K, K2=cfg.K2,
        src_h_x=stats.h_x, src_h_y=stats.h_y, src_h_xy=stats.h_xy,
        r_x=r_x, r_y=r_y, r_kx=r_kx, r_ky=r_ky,
        target_key_rate=plan.target_key_rate, achieved_key_rate=plan.achieved_key_rate,
        key_rate_slack=plan.key_rate_slack,
        target_xy=cfg.target.h_xy if t2 is None else None,
        target_x=t2.h_x if t2 is not None and cfg.target.case_id == 2 else None,
        target_y=t2.h_y if t2 is not None else None,
        h_xy_given_obs=rep.h_xy_given_obs, h_x_given_obs=rep.h_x_given_obs,
        h_y_given_obs=rep.h_y_given_obs,
        bound_xy=rep.bounds.get("xy"), bound_x=rep.bounds.get("x"),
        bound_y=rep.bounds.get("y"),
        pass_xy=flags["xy"], pass_x=flags["x"], pass_y=flags["y"],
        region_pass=verdict.member, key_rate_pass=key_ok, decoded=decoded,
        chain=";".join(f"{t}<{s}" for t, s in chains), passed=passed,
        wall_time=time.perf_counter() - start if timing else None)


def round_trip_error_rate(src: JointSource, K: int, seeds, target: SecurityTarget, *,
                          alpha: float = 0.5, eps0: float = 0.15) -> float:
    """Fraction of seeds where encrypt -> decrypt -> decode misses the pair.

    Each seed draws its own codebook, keys and source pair; codebook and pair
    seeds match :func:`sw_codec.decoding_error_rate` for the same seed.
    """
    stats = entropies(src)
    seeds = list(seeds)
    plan = cipher.plan_keys(stats, K, target, alpha=alpha, eps0=eps0)
    errors = 0
    for seed in seeds:
        cb_seed, pair_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
        cb = sw_codec.build_codebook(src, cipher.codebook_config_for_plan(
            stats, plan, eps0=eps0, seed=cb_seed))
        pair = sample_pair(src, K, pair_seed)
        keys = cipher.generate_keys(plan, seed)
        tp = cipher.build_transmission(sw_codec.encode(cb, pair), plan, keys)
        try:
            got = sw_codec.decode(cb, cipher.receiver_decrypt(tp, plan, keys))
        except NoConsistentPair:
            errors += 1
            continue
        errors += not (np.array_equal(got.x_seq, pair.x_seq) and
                       np.array_equal(got.y_seq, pair.y_seq))
    return errors / len(seeds)


def underprovisioned_plan(stats, K: int, target: SecurityTarget, mu=None, *,
                          shortfall: float = 0.2, alpha: float = 0.5) -> cipher.KeyPlan:
    """Plan whose achieved key rate is at least ``shortfall`` below the converse.

    Rounding to whole bits pushes achieved rates up, so the plan is made for
    the largest reduced level of the same case whose rounded key rate still
    falls short of the converse bound by ``shortfall``.
    """
    limit = max(rate_region.converse_key_bounds(stats, target, mu)) - shortfall
    if limit < 0:
        raise ValueError("converse bound is already below the shortfall")
    for h in np.linspace(limit, 0.0, 401):
        h = float(h)
        if target.case_id == 1:
            t = SecurityTarget(1, h_xy=h)
        else:
            t2 = target.as_case2()
            t = SecurityTarget(target.case_id, h_x=min(t2.h_x, h) if target.case_id == 2
                               else None, h_y=min(t2.h_y, h))
        plan = cipher.plan_keys(stats, K, t, mu, alpha=alpha)
        if plan.achieved_key_rate <= limit + _TOL:
            return plan
    raise ValueError("no plan falls below the shortfall")


def run_experiment(cfg: ExperimentConfig, *, threads: int | None = None,
                   timing: bool = False) -> list[ReportRow]:
    """One row per seed, in seed-list order whatever the thread count.

    ``timing`` fills ``wall_time``; it is off by default so that reports
    stay byte-identical across runs.
    """
    n = cfg.threads if threads is None else threads
    if n < 1:
        raise ConfigInvalid("threads must be >= 1")
    if n == 1:
        return [_trial(cfg, s, timing) for s in cfg.seeds]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda s: _trial(cfg, s, timing), cfg.seeds))


def run_sweep(cfg: ExperimentConfig) -> list[SweepRecord]:
    stats = entropies(cfg.source)
    mu = mu_components(stats, cfg.K, cfg.K2)
    return [SweepRecord(cfg.experiment_id, r.case_id, r.h, r.min_key_sum, r.r_kx_min,
                        r.r_ky_min, *r.corner_x_first, *r.corner_y_first)
            for r in rate_region.boundary_sweep(stats, cfg.target.case_id,
                                                cfg.sweep_resolution, mu)]


def check_region(cfg: ExperimentConfig) -> list[RegionRecord]:
    if cfg.region_point is None:
        raise ConfigInvalid("check-region needs a [region] section")
    stats = entropies(cfg.source)
    p = cfg.region_point
    v = rate_region.in_region(p, stats, cfg.target, mu_components(stats, cfg.K, cfg.K2))
    margins = [m for _, m in v.margins]
    return [RegionRecord(cfg.experiment_id, cfg.target.case_id, p.r_x, p.r_y, p.r_kx,
                         p.r_ky, *margins, passed=v.member)]


# --- serialization -----------------------------------------------------------

def _columns(row_type) -> list[tuple[str, str]]:
    hints = get_type_hints(row_type)
    out = []
    for f in dataclasses.fields(row_type):
        h = str(hints[f.name])
        kind = "bool" if "bool" in h else "int" if "int" in h else \
            "float" if "float" in h else "str"
        out.append((f.name, kind))
    return out


def _cell(value, kind) -> str:
    if value is None:
        return ""
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v} in report")
        return format(v, f".{FLOAT_DIGITS}g")
    return str(value)


def _json_cell(value, kind) -> str:
    if value is None:
        return "null"
    if kind == "str":
        return json.dumps(value)
    return _cell(value, kind)


def render_report(rows: Sequence, fmt: str = "csv", *, include_timing: bool = False) -> str:
    """Text of a CSV or JSON report; all rows must share one record type."""
    if not rows:
        raise ValueError("no rows to report")
    row_type = type(rows[0])
    if any(type(r) is not row_type for r in rows):
        raise ValueError("rows of mixed record types")
    cols = _columns(row_type)
    if not include_timing:
        cols = [c for c in cols if c[0] != "wall_time"]
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(name for name, _ in cols) + "\n")
        for r in rows:
            buf.write(",".join(_csv_quote(_cell(getattr(r, n), k)) for n, k in cols) + "\n")
        return buf.getvalue()
    if fmt == "json":
        recs = []
        for r in rows:
            body = ", ".join(f"{json.dumps(n)}: {_json_cell(getattr(r, n), k)}" for n, k in cols)
            recs.append("  {" + body + "}")
        return "[\n" + ",\n".join(recs) + "\n]\n"
    raise ValueError(f"unknown report format {fmt!r}")


def _csv_quote(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def emit_report(rows: Sequence, fmt: str, path, *, include_timing: bool = False) -> Path:
    """Write the report to ``path``.  Nothing is created when ``rows`` is empty."""
    text = render_report(rows, fmt, include_timing=include_timing)
    path = Path(path)
    try:
        path.write_bytes(text.encode("utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def _parse(text, kind):
    if text is None or text == "":
        return None if kind != "str" else ""
    if kind == "bool":
        return text if isinstance(text, bool) else {"true": True, "false": False}[text]
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return str(text)


def load_report(path, row_type=ReportRow) -> list:
    """Read a CSV or JSON report back into records (format from the suffix)."""
    path = Path(path)
    cols = dict(_columns(row_type))
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        recs = json.loads(text)
    else:
        recs = list(csv.DictReader(io.StringIO(text)))
    out = []
    for rec in recs:
        fields = {}
        for name, value in rec.items():
            fields[name] = _parse(value, cols[name])
        out.append(row_type(**fields))
    return out


def all_passed(rows) -> bool:
    return all(getattr(r, "passed", True) for r in rows)


# --- command line ------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="corrcipher", description="Run seeded secrecy experiments from a TOML config.")
    parser.add_argument("command", choices=("run", "sweep", "check-region"))
    parser.add_argument("config")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--out", default=None, help="report path; '-' for stdout")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            rows = run_experiment(cfg, threads=args.threads)
        elif args.command == "sweep":
            rows = run_sweep(cfg)
        else:
            rows = check_region(cfg)
        fmt = args.format or cfg.output_format
        out = args.out or cfg.output_path or "-"
        if out == "-":
            sys.stdout.write(render_report(rows, fmt))
        else:
            emit_report(rows, fmt, out)
    except CorrCipherError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if all_passed(rows) else 1


if __name__ == "__main__":
    sys.exit(main())
