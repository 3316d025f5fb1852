# %% [markdown]
# # Rearrangement on a chamber and the verification suite
#
# Rearranging a function on a Weyl chamber keeps its L^p norms and does not
# increase its gradient norm.  The check runner turns such statements into
# PASS/FAIL rows over a family of test fields.

# %%
import numpy as np

from dunklsob.fields import gaussian_mixture, smoothed_box
from dunklsob.quadrature import WeightedDomain, lp_norm
from dunklsob.rearrange import decreasing_rearrangement, set_rearrangement
from dunklsob.rootsys import build_root_system
from dunklsob.verify import run_check

rs = build_root_system("A1_PRODUCT", 1, 1.0)
chamber = WeightedDomain.in_chamber(rs, rs.chambers[0])

# %% [markdown]
# Norms before and after rearranging a three-bump mixture.

# %%
f = gaussian_mixture(1, 42)
fs = decreasing_rearrangement(rs, f, "+")
for p in (1.0, 2.0, 6.0):
    print(p, lp_norm(f, p, chamber), fs.lp_norm(p))

# %% [markdown]
# The chamber interval (1, 2) has weighted measure (8 - 1)/3 and rearranges to
# the chamber ball of radius 7^{1/3}.

# %%
print(set_rearrangement(rs, "+", 7 / 3 * 2), 7 ** (1 / 3))
box = decreasing_rearrangement(rs, smoothed_box(1.0, 2.0, 0.01), "+")
print(np.interp(0.5, box.profile.values[::-1], box.profile.radii[::-1]))

# %% [markdown]
# Individual checks return a result with one row per test field.

# %%
for name in ("ISO_RATIO", "POLYA_SZEGO", "NASH"):
    r = run_check(name, rs)
    print(name, r.status.value, f"ratio {r.ratio:.6f}", r.witness)
