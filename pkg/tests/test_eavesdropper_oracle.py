import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrcipher import (CodebookConfig, EnumerationTooLarge, ObservationSpec, SecurityTarget,
                        SlotNotKeyed, build_codebook, build_source, codebook_config_for_plan,
                        dsbs, entropies, exact_leakage, inequality_suite, mu_components,
                        pad_independence_check, plan_keys, slot_information)
from corrcipher.cipher import SLOT_NAMES
from corrcipher.eavesdropper_oracle import (conditional_entropy, default_slack,
                                            exact_leakage_reference, printed_ineq_7,
                                            security_bounds, size_exponents)

DSBS = dsbs(0.25)
STATS = entropies(DSBS)


def setup(target, K=4, seed=0, src=DSBS, alpha=0.5):
    stats = entropies(src)
    plan = plan_keys(stats, K, target, alpha=alpha)
    cb = build_codebook(src, codebook_config_for_plan(stats, plan, seed=seed))
    return plan, cb


def test_observing_nothing_leaves_full_entropy():
    plan, cb = setup(SecurityTarget(1, h_xy=0.5))
    rep = exact_leakage(DSBS, cb, plan, ObservationSpec.nothing())
    assert rep.h_xy_given_obs == pytest.approx(STATS.h_xy, abs=1e-12)
    assert rep.h_x_given_obs == pytest.approx(STATS.h_x, abs=1e-12)


def test_injective_unkeyed_code_reveals_everything():
    cb = build_codebook(DSBS, CodebookConfig(3, 3, 3, 3, 3))
    rep = exact_leakage(DSBS, cb, None, ObservationSpec(True, True, ()))
    assert rep.h_x_given_obs == rep.h_y_given_obs == rep.h_xy_given_obs == 0.0


def test_low_subcase_regression():
    t = SecurityTarget(1, h_xy=0.1)
    plan, cb = setup(t)
    mu = mu_components(STATS, 4, 1)
    rep = exact_leakage(DSBS, cb, plan, ObservationSpec.full(4, 1), target=t, mu=mu)
    assert rep.h_xy_given_obs == pytest.approx(0.13467048291629347, abs=1e-9)
    assert rep.h_xy_given_obs >= 0.1 - mu.mu_c - 0.2
    assert rep.all_passed


def test_report_entropies_bounded():
    plan, cb = setup(SecurityTarget(2, h_x=0.3, h_y=0.6))
    rep = exact_leakage(DSBS, cb, plan, ObservationSpec.full(4, 1))
    for got, top in ((rep.h_x_given_obs, rep.h_x), (rep.h_y_given_obs, rep.h_y),
                     (rep.h_xy_given_obs, rep.h_xy)):
        assert -1e-12 <= got <= top + 1e-9


TARGETS = [SecurityTarget(1, h_xy=0.1), SecurityTarget(1, h_xy=0.75),
           SecurityTarget(2, h_x=0.4, h_y=0.7), SecurityTarget(2, h_x=0.1, h_y=0.7),
           SecurityTarget(2, h_x=0.1, h_y=0.15), SecurityTarget(2, h_x=0.7, h_y=0.3),
           SecurityTarget(2, h_x=0.7, h_y=0.1), SecurityTarget(3, h_y=0.5)]


@pytest.mark.parametrize("target", TARGETS, ids=str)
def test_fresh_keyed_slots_are_independent(target):
    plan, cb = setup(target)
    for slot in plan.keyed_slots:
        shared = [s for s in plan.keyed_slots if plan.slot_keys[s] == plan.slot_keys[slot]]
        if len(shared) > 1:
            continue
        assert pad_independence_check(DSBS, cb, plan, slot) == pytest.approx(0.0, abs=1e-12)


def test_unkeyed_private_slot_leaks():
    plan, cb = setup(SecurityTarget(1, h_xy=0.0), K=2)
    assert slot_information(DSBS, cb, plan, "x2") > 0.1
    with pytest.raises(SlotNotKeyed):
        pad_independence_check(DSBS, cb, plan, "x2")


def test_modulus_one_slot_carries_nothing():
    plan, cb = setup(SecurityTarget(1, h_xy=0.0), K=2)
    assert plan.m_cx == 1
    assert pad_independence_check(DSBS, cb, plan, "cx") == 0.0


def test_chained_slot_is_not_a_fresh_pad():
    plan, cb = setup(SecurityTarget(1, h_xy=0.5))
    with pytest.raises(SlotNotKeyed):
        pad_independence_check(DSBS, cb, plan, "x2", chains=(("x2", "x1"),))


def test_enumeration_cap():
    src = build_source(np.full((4, 4), 1 / 16))
    stats = entropies(src)
    plan = plan_keys(stats, 6, SecurityTarget(1, h_xy=1.5))
    cb = build_codebook(src, codebook_config_for_plan(stats, plan))
    with pytest.raises(EnumerationTooLarge):
        exact_leakage(src, cb, plan, ObservationSpec.full(6, 1))


specs = st.builds(
    lambda w1, w2, pos, vis: ObservationSpec(w1, w2, tuple(pos), vis),
    st.booleans(), st.booleans(), st.sets(st.integers(0, 3), max_size=4),
    st.dictionaries(st.sampled_from(SLOT_NAMES), st.booleans(), max_size=3))


def _superset(spec, extra_pos, extra_slots):
    vis = dict(spec.slot_visibility)
    for s in spec.visible_slots() + tuple(extra_slots):
        vis[s] = True
    return ObservationSpec(spec.include_w1, spec.include_w2,
                           tuple(set(spec.leaked_y_positions) | set(extra_pos)), vis)


_PLAN, _CB = setup(SecurityTarget(1, h_xy=0.75))


@given(specs, st.sets(st.integers(0, 3)), st.sets(st.sampled_from(SLOT_NAMES)))
def test_conditioning_never_increases_entropy(spec, extra_pos, extra_slots):
    big = _superset(spec, extra_pos, extra_slots)
    a = exact_leakage(DSBS, _CB, _PLAN, spec)
    b = exact_leakage(DSBS, _CB, _PLAN, big)
    assert b.h_xy_given_obs <= a.h_xy_given_obs + 1e-9
    assert b.h_x_given_obs <= a.h_x_given_obs + 1e-9
    assert b.h_y_given_obs <= a.h_y_given_obs + 1e-9


@pytest.mark.parametrize("target", TARGETS[:4], ids=str)
@pytest.mark.parametrize("spec", [ObservationSpec.full(4, 1), ObservationSpec(True, False, (0,)),
                                  ObservationSpec(False, True, (), {"x2": True})])
def test_matches_reference_enumeration(target, spec):
    plan, cb = setup(target)
    rep = exact_leakage(DSBS, cb, plan, spec)
    hx, hy, hxy = exact_leakage_reference(DSBS, cb, plan, spec)
    assert (rep.h_x_given_obs, rep.h_y_given_obs, rep.h_xy_given_obs) == \
        pytest.approx((hx, hy, hxy), abs=1e-9)


def test_reference_agrees_with_chaining():
    plan, cb = setup(SecurityTarget(1, h_xy=0.5))
    chains = (("x2", "x1"),)
    spec = ObservationSpec.full(4, 1)
    rep = exact_leakage(DSBS, cb, plan, spec, chains=chains)
    assert (rep.h_x_given_obs, rep.h_y_given_obs, rep.h_xy_given_obs) == \
        pytest.approx(exact_leakage_reference(DSBS, cb, plan, spec, chains=chains), abs=1e-9)


def test_conditional_entropy_of_independent_columns():
    prob = np.full(4, 0.25)
    a, b = np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1])
    assert conditional_entropy(prob, [(a, 2)], [(b, 2)]) == pytest.approx(1.0)
    assert conditional_entropy(prob, [(a, 2)], [(a, 2)]) == pytest.approx(0.0)


def test_security_bounds_shape():
    mu = mu_components(STATS, 4, 1)
    low = plan_keys(STATS, 4, SecurityTarget(1, h_xy=0.1))
    assert security_bounds(SecurityTarget(1, h_xy=0.1), low, mu, 0.25) == \
        pytest.approx({"xy": 0.1 - mu.mu_c - 0.25})
    case3 = plan_keys(STATS, 4, SecurityTarget(3, h_y=0.5))
    assert set(security_bounds(SecurityTarget(3, h_y=0.5), case3, mu, 0.25)) == {"y"}


def test_default_slack():
    assert default_slack(2) == default_slack(4) == 0.25
    assert default_slack(8) == 0.15


def test_independent_source_common_inequality_is_trivial(independent):
    stats = entropies(independent)
    plan, cb = setup(SecurityTarget(1, h_xy=0.3), src=independent)
    rows = {r.ineq_id: r for r in inequality_suite(independent, cb, plan)}
    assert rows["ineq_3"].rhs == pytest.approx(stats.i_xy, abs=1e-12)
    assert rows["ineq_3"].passed


def test_leaked_block_entropy_correlated_source(correlated):
    plan, cb = setup(SecurityTarget(1, h_xy=0.3), src=correlated)
    rows = {r.ineq_id: r for r in inequality_suite(correlated, cb, plan)}
    assert rows["ineq_7.1"].lhs == pytest.approx(1.0)
    assert rows["ineq_7.1"].passed


# frozen from the first enumeration run: DSBS(0.25), K=4, alpha=0.5,
# case 1 target 0.3, codebook seed 0
SUITE_BASELINE = {
    "ineq_1": 0.2514920987400082, "ineq_2": 0.2681155002047302, "ineq_3": 0.1378501690210696,
    "ineq_4": 0.1221810024953216, "ineq_5": 0.10508743921960839, "ineq_6": 0.8578765223287916,
    "ineq_7": 0.855195908928047, "ineq_7.1": 1.0, "ineq_8": 0.11968224266707228,
    "ineq_9": 0.6111398970768309, "ineq_10": 0.3081814845891413,
    "ineq_11": 0.6723003435802231,
}


def test_suite_regression_dsbs_k4():
    plan, cb = setup(SecurityTarget(1, h_xy=0.3))
    rows = inequality_suite(DSBS, cb, plan)
    assert [r.ineq_id for r in rows] == list(SUITE_BASELINE)
    for r in rows:
        assert r.lhs == pytest.approx(SUITE_BASELINE[r.ineq_id], abs=1e-9)
        assert r.passed, (r.ineq_id, r.margin)


def test_realized_sizes_are_whole_bits():
    plan, cb = setup(SecurityTarget(1, h_xy=0.3))
    real = size_exponents(cb, plan, "realized")
    nominal = size_exponents(cb, plan, "nominal")
    assert all(float(v).is_integer() for v in real.values())
    assert all(real[k] >= nominal[k] - 1e-9 for k in ("x", "y", "cx", "cy"))
    with pytest.raises(ValueError):
        size_exponents(cb, plan, "exact")


def test_printed_form_of_seventh_inequality_fails(independent):
    # the literal form conditions on the Y indices, which for an injective
    # private Y bin leaves nothing; the mirror of the sixth inequality holds
    plan, cb = setup(SecurityTarget(1, h_xy=0.3), src=independent)
    lhs, rhs = printed_ineq_7(independent, cb, plan)
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert rhs == pytest.approx(1.0)
    assert lhs < rhs - 0.25
    row = [r for r in inequality_suite(independent, cb, plan) if r.ineq_id == "ineq_7"][0]
    assert row.passed


def test_slot_information_for_unkeyed_common_slot():
    plan, cb = setup(SecurityTarget(1, h_xy=0.1))
    assert plan.slot_keys.get("cy") is None
    info = slot_information(DSBS, cb, plan, "cy")
    assert 0.0 < info <= math.log2(plan.m_cy) + 1e-9


# Finite-block behaviour at the top of the target range.  These pin down why
# the K=4 achievability grid has failing points and that they recover at K=6.

def test_high_subcase_saturates_at_k4():
    mu = mu_components(STATS, 4, 1)
    spec = ObservationSpec.full(4, 1)
    vals = []
    for h in (1.0, 1.2, 1.5):
        t = SecurityTarget(1, h_xy=h)
        plan = plan_keys(STATS, 4, t, mu)
        cb = build_codebook(DSBS, codebook_config_for_plan(STATS, plan, seed=0))
        vals.append(exact_leakage(DSBS, cb, plan, spec).h_xy_given_obs)
        # once M_Y1 passes M_Y the extra key bits have nothing left to pad
        assert plan.m_x1 == cb.cfg.m_x and plan.m_y1 >= cb.cfg.m_y
    assert vals == pytest.approx([0.6018401223898242] * 3, abs=1e-9)
    assert vals[1] < 1.2 - mu.total - 0.25


def test_top_targets_recover_at_k6():
    mu = mu_components(STATS, 6, 1)
    spec = ObservationSpec.full(6, 1)
    t = SecurityTarget(1, h_xy=1.2)
    plan, cb = setup(t, K=6)
    rep = exact_leakage(DSBS, cb, plan, spec, target=t, mu=mu, eps_prime=0.25)
    assert rep.h_xy_given_obs == pytest.approx(0.8171846406725489, abs=1e-9)
    assert rep.all_passed
    t = SecurityTarget(2, h_x=0.715, h_y=0.75)
    plan, cb = setup(t, K=6)
    rep = exact_leakage(DSBS, cb, plan, spec, target=t, mu=mu, eps_prime=0.25)
    assert rep.h_x_given_obs == pytest.approx(0.5891673524735991, abs=1e-9)
    assert rep.all_passed


def test_private_y_inequality_rarely_holds_at_k2():
    # H(Y^2 | W_X, W_CX, W_CY) against the full private Y rate: with two
    # symbols the bins cannot hide enough of Y
    holds = 0
    for seed in range(20):
        plan, cb = setup(SecurityTarget(1, h_xy=0.3), K=2, seed=seed)
        rows = {r.ineq_id: r for r in inequality_suite(DSBS, cb, plan)}
        holds += rows["ineq_9"].passed
        if seed == 0:
            assert rows["ineq_9"].lhs == pytest.approx(0.3698500926131085, abs=1e-9)
            assert not rows["ineq_9"].passed
    assert holds <= 2
