# %% [markdown]
# # Weighted measure and closed-form constants
#
# The Dunkl weight w_k(x) = prod |<a, x>|^{2k} turns R^N into a space of
# homogeneous dimension d = N + 2 gamma.  Most constants of the Sobolev theory
# reduce to two numbers: the Macdonald-Mehta integral M_k and the sphere
# constant p_k.

# %%
import math

import numpy as np

from dunklsob.constants import (dunkl_constant_bounds, macdonald_mehta, macdonald_mehta_product,
                                nash_constant, sphere_constant)
from dunklsob.fields import gaussian
from dunklsob.quadrature import WeightedDomain, integrate_weighted
from dunklsob.rootsys import build_root_system

systems = {
    "A1 k=1": build_root_system("A1_PRODUCT", 1, 1.0),
    "A1xA1 k=(1,1)": build_root_system("A1_PRODUCT", 2, (1.0, 1.0)),
    "A2 k=1": build_root_system("A2", multiplicities=1.0),
    "B2 k=(1,1/2)": build_root_system("B2", multiplicities=(1.0, 0.5)),
}

# %% [markdown]
# Quadrature of the Gaussian against w_k, next to the closed form and the
# product of one-dimensional factors.  The product only matches on A1^N.

# %%
for name, rs in systems.items():
    num = integrate_weighted(gaussian(rs.dimension), WeightedDomain.full_space(rs), 1e-10).value
    print(f"{name:15s} d={rs.effective_dimension:4.1f}  quad={num:.10f}  "
          f"closed={macdonald_mehta(rs):.10f}  product={macdonald_mehta_product(rs):.10f}")

# %% [markdown]
# A2 gives 24 pi, not 16 pi.

# %%
print(macdonald_mehta(systems["A2 k=1"]) / math.pi)

# %% [markdown]
# Sobolev and Nash constants for A1 with k = 1 (d = 3).

# %%
rs = systems["A1 k=1"]
lower, upper = dunkl_constant_bounds(rs)
print(f"p_k = {sphere_constant(rs):.10f}")
print(f"Sobolev constant in [{lower:.10f}, {upper:.10f}]")
print(f"Nash constant {nash_constant(rs):.10f}")

# %% [markdown]
# With k = 0 the weighted constants reduce to the Lebesgue ones.

# %%
flat = build_root_system("A1_PRODUCT", 3, 0.0)
print(sphere_constant(flat), 4 * np.pi)
