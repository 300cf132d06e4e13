"""Covering an unkeyed slot with an already padded one.

In the case 1 low sub-case only the common slots get key material, so the
private slot x2 goes out in the clear.  Chaining pads it with the
plaintext of the keyed slot x1 instead of a fresh key.
"""
import warnings

from corrcipher import (ObservationSpec, PrototypeCodeword, SecurityTarget, build_codebook,
                        build_transmission, chain_mask, codebook_config_for_plan, dsbs, entropies,
                        generate_keys, plan_keys, receiver_decrypt)
from corrcipher.eavesdropper_oracle import slot_equivocation

warnings.simplefilter("ignore")

src = dsbs(0.25)
stats = entropies(src)
plan = plan_keys(stats, 4, SecurityTarget(1, h_xy=0.5))
keys = generate_keys(plan, 1)

cw = PrototypeCodeword(7, 3, 0, 1, 16, 16, plan.m_cx, plan.m_cy)
tp = build_transmission(cw, plan, keys)
chained = chain_mask(tp, plan, keys, target="x2", source="x1")
for before, after in zip(tp.slots, chained.slots):
    print(f"{before.name:>3}  {before.value:>3} -> {after.value:>3}  key={before.key}  "
          f"chained_from={after.chained_from}")
print("receiver still decrypts:", receiver_decrypt(chained, plan, keys) == cw)

cb = build_codebook(src, codebook_config_for_plan(stats, plan, seed=0))
spec = ObservationSpec.full(4, 1)
print("H(x2 | obs) plain  :", round(slot_equivocation(src, cb, plan, spec, "x2"), 4))
print("H(x2 | obs) chained:", round(slot_equivocation(src, cb, plan, spec, "x2",
                                                       chains=(("x2", "x1"),)), 4))
