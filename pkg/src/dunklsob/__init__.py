"""Rational Dunkl operators over finite root systems and numeric verification
of Dunkl-Sobolev type inequalities.

Modules
-------
rootsys
    Root systems, reflection groups, Weyl chambers and the weight ``w_k``.
fields
    Scalar test fields and Dunkl calculus (gradient, Laplacian, carre du champ).
quadrature
    Integration against ``mu_k``, norms, level sets and weighted perimeters.
kernel
    Dunkl kernel, transform, heat kernel and semigroup for ``Z_2^N``.
constants
    Closed-form constants (Macdonald-Mehta, Nash, Sobolev bounds).
rearrange
    Symmetric decreasing rearrangement on a chamber.
verify
    The inequality checks and the suite runner.
"""

from .constants import (
    ConstantsReport,
    RadialProfile,
    ball_measure,
    chamber_sphere_constant,
    classical_constant,
    constants_report,
    dunkl_constant_bounds,
    extremal_profile,
    gamma_bound_constant,
    macdonald_mehta,
    macdonald_mehta_product,
    nash_bound_closed,
    nash_bound_numeric,
    nash_constant,
    sharp_gamma_bound_constant,
    sobolev_from_nash,
    sphere_constant,
    talenti_bound,
    talenti_functional,
    weyl_constant,
)
from .errors import DunklError, ValidationError
from .fields import (
    Decay,
    ScalarField,
    bump,
    carre_du_champ,
    carre_du_champ_via_definition,
    coordinate_times_gaussian,
    dunkl_gradient,
    dunkl_laplacian,
    field_from_spec,
    gaussian,
    gaussian_mixture,
    smoothed_box,
    talenti_profile_field,
)
from .kernel import (
    HeatOperator,
    Rank1Kernel,
    besov_norm,
    dunkl_transform,
    heat_apply,
    heat_kernel,
    product_kernel_eval,
    rank1_kernel_eval,
)
from .quadrature import (
    DomainKind,
    IntegralResult,
    WeightedDomain,
    integrate_weighted,
    level_set_measure,
    lp_norm,
    measure,
    perimeter,
    sphere_weight_integral,
    weak_lq_norm,
)
from .rearrange import Rearrangement, decreasing_rearrangement, set_rearrangement
from .rootsys import (
    ChamberSign,
    Family,
    ReflectionGroup,
    RootSystem,
    build_root_system,
    chamber_sign,
    generate_group,
    load_root_system,
    parse_shorthand,
    reflect,
    weight,
)
from .verify import CheckResult, Report, Status, SuiteConfig, run_check, run_suite

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
