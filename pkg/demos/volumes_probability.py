# Weil-Petersson volumes and short separating multicurves
#
# The bundled table holds log V_{g,n} for 2g - 2 + n <= 20.  We compare it
# with the large-genus asymptotic, then run the estimate for the expected
# number of short separating multicurves on a random surface.

# %%
import math

from hypspec import multicurves, volumes

table = volumes.load_volume_table()
print("V_{1,1} =", table.value(1, 1), "= pi^2/12 =", math.pi ** 2 / 12)
print("V_{2,0} =", table.value(2, 0))

# %% V_g sqrt(g) / ((2g-3)! (4 pi^2)^{2g-3}) settles down as g grows
for g, ratio in volumes.mz_ratio_profile(table):
    print(g, round(ratio, 5))
print("fitted C =", table.fitted_C, " (1/sqrt(pi) =", 1 / math.sqrt(math.pi), ")")

# %% Exchanging two boundary components for a handle barely changes the volume
vmax, where, _ = volumes.volume_relation_sweep(table)
print("largest V_{g,n} / V_{g+i,n-2i}:", vmax, "at (g, n, i) =", where)

# %% Expected number of short separating multicurves, c = d = 0.01
b, c, d = 0.004, 0.01, 0.01
delta, rows = multicurves.fit_delta(table, c, d, b)
print("fitted delta =", delta, " fitted D =", table.fitted_D)
for g, lexp in rows:
    p = multicurves.ProbabilityParams(g, b, c, d, delta_univ=delta, D=table.fitted_D)
    res = multicurves.expected_multicurve_bound(p, table)
    print(f"g = {g:2d}  log explicit {lexp:8.3f}  log envelope {res.log_envelope:8.3f}")

# %% The failure probability for the L^p bound decays like g^{-1/2 + delta(c+b)} + g^{-2b}
for g in (10 ** 3, 10 ** 6, 10 ** 12):
    pb = multicurves.final_probability_bound(multicurves.ProbabilityParams(g, 0.2, 0.05, delta_univ=1.0))
    print(g, pb.value)
