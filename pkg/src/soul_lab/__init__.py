"""Explicit nonnegatively curved metrics on S^2 x R^2.

The package builds one-parameter families of such metrics as explicit
coordinate-chart tensors, audits their curvature numerically, exposes the
circle-bundle geometry of their distance spheres, and checks the rigidity
identities that force round souls.
"""

__version__ = "0.1.0"

from .charts import (
    CurvatureReport,
    MetricChart,
    PlaneSampler,
    TangentPlane,
    geodesic,
    hessian_scalar,
    integrate_scalar,
    min_sectional_scan,
    riemann,
    riemann_with_metric,
    sectional,
    sectional_from_tensor,
)
from .config import LabConfig, load_config, parse_config
from .profiles import (
    KillingSpec,
    PlaneProfile,
    SphereProfile,
    cap_plane,
    cheeger_rescale,
    flat_plane,
    plane_chart_cartesian,
    round_profile,
    series_plane,
    sphere_chart,
    spline_profile,
    tanh_plane,
)
from .quotient import (
    QuotientSpec,
    SoulData,
    build_quotient,
    integral_F,
    nonneg_audit,
    prescribe_soul_profile,
    quotient_components,
    quotient_oracle,
    soul_data,
    soul_metric,
    soul_profile,
    totally_geodesic_residual,
)
from .bundles import (
    MatchedParameters,
    SphereMatch,
    distance_sphere_induced,
    distance_sphere_scan,
    fiber_length_product,
    fiber_length_submersion,
    match_parameters,
    sphere_match,
)
from .rigidity import (
    EqualityReport,
    LinearEigenfunction,
    RigidityRecord,
    RoundSoulModels,
    equality_audit,
    fit_linear_eigenfunction,
    great_circle_profile,
    rayleigh,
    round_normalize,
    trace_inequality_check,
)
