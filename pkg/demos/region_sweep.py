"""Admissible regions and the minimal key sum across secrecy levels."""
from corrcipher import (RatePoint, boundary_sweep, converse_key_bounds, dsbs, entropies,
                        in_region_case1, mu_components)
from corrcipher.cipher import SecurityTarget

stats = entropies(dsbs(0.11))
mu = mu_components(stats, 8, 2)

for case_id in (1, 2, 3):
    rows = boundary_sweep(stats, case_id, 5, mu)
    print(f"case {case_id}")
    for r in rows:
        print(f"  h={r.h:.3f}  key sum >= {r.min_key_sum:.3f}  "
              f"R_kX >= {r.r_kx_min:.3f}  R_kY >= {r.r_ky_min:.3f}")

# a point at the X-first corner, keys just enough for h_xy = 0.8
h = 0.8
kx, ky = converse_key_bounds(stats, SecurityTarget(1, h_xy=h), mu)
p = RatePoint(stats.h_x, stats.h_y_given_x, h / 2, h / 2)
v = in_region_case1(p, stats, h, mu)
print("corner point member:", v.member, "key margin", round(v.margin("R_kX + R_kY >= h_XY"), 6))
print(f"converse per-encoder floors: {kx:.3f}, {ky:.3f}")

# drop the Y rate below H(Y|X)
v = in_region_case1(RatePoint(stats.h_x, 0.3, 0.4, 0.4), stats, h, mu)
print("violated:", v.violated)
