# Lattice points of the Bolza surface
#
# The Bolza surface is the genus 2 surface glued from a regular hyperbolic
# octagon with angles pi/4.  Its group is bundled with the package.  This
# script counts group elements in hyperbolic balls and looks at the shortest
# loops through the centre of the octagon.

# %%
import math

import numpy as np

from hypspec import fuchsian
from hypspec.hyperbolic import Point

G = fuchsian.load_surface_spec(fuchsian.bundled_surface_path())
print(G.label, "genus", G.genus, "with", len(G.generators), "generators")
print("domain diameter", G.domain_diameter)

# %% [markdown]
# All eight generators translate by the systole 2 arccosh(1 + sqrt 2).

# %%
systole = 2 * math.acosh(1 + math.sqrt(2))
print("shortest generator translation", G.min_translation_length, "vs", systole)

# %% Ball counts grow like e^r: a ball has area 2 pi (cosh r - 1) ~ pi e^r and
# the surface has area 4 pi, so count e^-r should drift towards 1/4
z = G.base_point
A, counts = fuchsian.fit_growth_constant(G, z, np.arange(1.0, 5.51, 0.5))
for r, c in zip(np.arange(1.0, 5.51, 0.5), counts):
    print(f"r = {r:3.1f}  count = {c:4d}  count e^-r = {c * math.exp(-r):.4f}")
print("fitted A =", A)

# %% The loops through the centre of length below 3.1 are exactly the systolic ones
census = fuchsian.loop_census(G, z, 3.1)
print(census.count, "primitive loops")
for (word, m), d in census.primitive_loops:
    print("  word", word, "length", round(d, 6))

# %% Injectivity radius: half the shortest loop through the point
for p in [z, Point(0.2, 1.1), Point(-0.3, 0.7)]:
    print(p, fuchsian.injectivity_radius_at(G, p))

# %% The loop-count inequality on a small sample; raises if it ever fails
cert = fuchsian.certify_growth(G, 3.0, [0.5, 1.0], fuchsian.domain_sample(G, 1, 4))
print("certificate holds:", cert.holds, " C(X) =", cert.C_of_X)
for d, c0 in cert.C0_of_delta.items():
    print(f"  smallest C0({d}) = {c0:.4f}")
