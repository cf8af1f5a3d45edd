# Selberg transforms of the kernels h_t
#
# h_t(r) = cos(rt) / cosh(pi r / 2) is the spectral side of a radial kernel
# k_t on the hyperbolic plane.  We build k_t numerically, push it back through
# the forward transform, and look at how its size decays with t.

# %%
import math

import numpy as np

from hypspec import kernels, selberg

t = 2.0
k = kernels.build_bl_kernel(t)
rho = np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0])
print("k_2 at", rho)
print(k(rho))

# %% Round trip: forward(inverse(h_t)) should give h_t back
h = selberg.forward_transform(k)
r = np.linspace(0, 10, 11)
print("max |h - forward(inverse h)| =", np.max(np.abs(h(r) - kernels.eval_h(t, r))))
print("at r = i/2 (integral of k over H):", h(0.5j).real, "exact", math.sqrt(2) * math.cosh(1))

# %% The product identity j_t j_s = (h_{t+s} + h_{|t-s|}) / 2
print("residual", kernels.linearisation_residual(1.3, 0.4, 2.7))
print("residual, imaginary r", kernels.linearisation_residual(2.0, 1.0, 0.3j))

# %% Size of k_t: sup |k_t| e^{t/2} and the tail beyond 4t times e^t stay bounded
for row in kernels.bl_check([1, 2, 3, 4], workers=4):
    print(f"t = {row.t:.0f}  sup ratio {row.ratio_sup:.4f}  tail ratio {row.ratio_tail:.4f}")

# %% The ball kernel and its transform at r = i/2 (the normalised ball area)
for t in (1.0, 2.0, 4.0):
    hb = selberg.forward_transform(selberg.ball_kernel(t))
    print(t, hb(0.5j).real, kernels.ball_area_transform(t))
