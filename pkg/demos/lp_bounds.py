# L^p bounds for eigenfunctions on hyperbolic surfaces
#
# Every bound is a BoundReport whose value is the product of itemised
# factors, so the constant each step assumed stays visible.

# %%
import math

from hypspec import bounds
from hypspec.kernels import EigenvalueParams, OperatorBoundInputs

lam = EigenvalueParams.from_lambda(0.25)
for R in (16.0, 64.0, 256.0, 1024.0):
    rep = bounds.tempered_bound(OperatorBoundInputs(1.0, R, R / 8, math.inf, 0.01), lam)
    print(f"R = {R:6.0f}  bound {rep.bound_value:.5f}  bound * sqrt(R) {rep.bound_value * math.sqrt(R):.5f}")

# %% The factor ledger of one report
rep = bounds.tempered_bound(OperatorBoundInputs(1.0, 64.0, 8.0, 6.0, 0.01), EigenvalueParams.from_lambda(2.0))
for name, value, source in rep.rows():
    print(f"{name:24s} {value:12.6g}  {source}")
print("product check:", rep.check_product())

# %% Below 1/4 the ball-averaging operator gives exponential decay in R
low = EigenvalueParams.from_lambda(0.0, epsilon=0.25)
for R in (5.0, 10.0, 20.0):
    rep = bounds.untempered_bound(OperatorBoundInputs(1.0, R, R / 8, math.inf, 0.01), low)
    print(R, rep.bound_value, 1 / math.expm1(0.49 * R))

# %% Random surfaces of large genus: R = c log g, C(X) = 1 / InjRad
for g in (10 ** 6, 10 ** 12, 10 ** 24):
    rep = bounds.random_surface_report(g, 1e-9, 8.0, EigenvalueParams.from_lambda(1.0), math.inf)
    print(g, rep.bound_value, rep.bound_value * math.sqrt(math.log(g)))
