# %% [markdown]
# # Dunkl kernel and heat semigroup in rank one
#
# On A1 the Dunkl kernel has closed forms through modified Bessel functions,
# and the heat kernel factorizes over coordinates for product systems.

# %%
import math

import numpy as np

from dunklsob.fields import gaussian, gaussian_mixture
from dunklsob.kernel import heat_apply, heat_kernel, heat_kernel_bound, rank1_kernel_eval
from dunklsob.quadrature import WeightedDomain, integrate_weighted
from dunklsob.rootsys import build_root_system

rs = build_root_system("A1_PRODUCT", 1, 1.0)
d = rs.effective_dimension

# %% [markdown]
# The kernel interpolates between the exponential (k = 0) and a
# Bessel-type function.  It is positive on the real line.

# %%
z = np.linspace(-4, 4, 9)
for k in (0.0, 0.5, 1.0, 2.0):
    print(k, np.round(rank1_kernel_eval(k, z, 1.0), 6))

# %% [markdown]
# Mass conservation of the heat kernel and the Gaussian upper bound.

# %%
x0 = np.array([[0.7]])
for t in (0.05, 0.5, 5.0):
    mass = integrate_weighted(lambda y: heat_kernel(rs, t, x0, y), WeightedDomain.full_space(rs), 1e-10,
                              radius=0.7 + 12 * math.sqrt(t), r_breaks=(0.7,)).value
    y = np.array([-1.0])
    print(f"t={t:5.2f}  mass={mass:.12f}  h={heat_kernel(rs, t, x0[0], y):.3e}  "
          f"bound={heat_kernel_bound(rs, t, x0[0], y):.3e}")

# %% [markdown]
# The semigroup acts on the Gaussian exactly:
# P_t exp(-|x|^2/2) = (1+2t)^{-d/2} exp(-|x|^2 / (2(1+2t))).

# %%
x = np.linspace(-2, 2, 5)[:, None]
t = 0.3
exact = (1 + 2 * t) ** (-d / 2) * np.exp(-x[:, 0] ** 2 / (2 * (1 + 2 * t)))
print(np.max(np.abs(heat_apply(rs, gaussian(1), t, x) - exact)))

# %% [markdown]
# A mixture has no closed form; its heat flow still smooths and contracts the
# sup norm.

# %%
f = gaussian_mixture(1, 3)
grid = np.linspace(-3, 3, 61)[:, None]
for t in (0.0, 0.1, 1.0):
    vals = f(grid) if t == 0 else heat_apply(rs, f, t, grid)
    print(t, float(np.max(np.abs(vals))))
