"""Case 1 end to end on a doubly symmetric binary source.

Build the source, plan keys for a joint secrecy level, push one sampled
pair through encode -> pad -> decrypt -> decode, then ask the exact oracle
what the wiretapper still does not know.
"""
import warnings

import numpy as np

from corrcipher import (ObservationSpec, SecurityTarget, build_codebook, build_transmission,
                        codebook_config_for_plan, decode, dsbs, encode, entropies, exact_leakage,
                        generate_keys, mu_components, plan_keys, receiver_decrypt, sample_pair)

warnings.simplefilter("ignore")  # the corner rates sit right on the eps0 boundary

src = dsbs(0.25)
stats = entropies(src)
print(f"H(X)={stats.h_x:.4f}  H(Y|X)={stats.h_y_given_x:.4f}  I={stats.i_xy:.4f}")

K, K2 = 4, 1
mu = mu_components(stats, K, K2)
print(f"leaked block of {K2} symbol(s): mu_C={mu.mu_c:.4f} mu_Y={mu.mu_y:.4f}")

# low sub-case: the key only needs to cover part of the common bins
target = SecurityTarget(1, h_xy=0.1)
plan = plan_keys(stats, K, target, mu)
print(plan.subcase, "key rate", plan.achieved_key_rate, "keyed slots", dict(plan.slot_keys))

cb = build_codebook(src, codebook_config_for_plan(stats, plan, seed=0))
pair = sample_pair(src, K, seed=3)
keys = generate_keys(plan, seed=7)
cw = encode(cb, pair)
tp = build_transmission(cw, plan, keys)
print("W1:", [(s.name, s.value, s.modulus) for s in tp.w1])
print("W2:", [(s.name, s.value, s.modulus) for s in tp.w2])

got = decode(cb, receiver_decrypt(tp, plan, keys))
print("recovered:", np.array_equal(got.x_seq, pair.x_seq) and np.array_equal(got.y_seq, pair.y_seq))

rep = exact_leakage(src, cb, plan, ObservationSpec.full(K, K2), target=target, mu=mu)
print(f"H(X,Y | W1, W2, Y^K2)/K = {rep.h_xy_given_obs:.4f}  bound {rep.bounds['xy']:.4f}")
print("pass:", rep.all_passed)

# the same question with nothing padded
bare = exact_leakage(src, cb, None, ObservationSpec.full(K, K2))
print(f"without keys: {bare.h_xy_given_obs:.4f}")
