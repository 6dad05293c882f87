"""Mass and center-of-mass invariants of asymptotically flat metrics.

The package evaluates the classical flux integrals and their curvature-based
counterparts (Einstein tensor against conformal Killing fields) over spheres
and ellipsoids, and certifies empirically that the two routes agree in the
large-radius limit.
"""

from .analysis import ConvergenceReport, compare, ellipsoid_family, fit_power_law, sweep
from .catalog import CatalogSpec, build, rt_violator, standard_catalog
from .curvature import (
    CurvatureBundle,
    christoffel,
    curvature_bundle,
    einstein,
    linearized_scalar,
    ricci,
    scalar_curvature,
)
from .errors import ConfigError, DomainError, SingularMetricError, UndefinedCenterError
from .invariants import (
    CenterPair,
    KillingFieldId,
    MassPair,
    adm_mass_at,
    center_pair,
    cs_center_at,
    field_X,
    field_Y,
    ibp_residual_X,
    ibp_residual_Y,
    intrinsic_center_at,
    intrinsic_mass_at,
    mass_pair,
    scalar_curvature_moment,
)
from .metric_field import (
    DecayReport,
    MetricField,
    MetricJet2,
    decay_report,
    default_fd_step,
    fd_jet2,
    field_from_values,
    jet2,
    jet2_batch,
    parity_split,
)
from .surfaces import (
    QuadSurface,
    ellipsoid_quadrature,
    g_normal_and_area,
    sphere_quadrature,
    unit_sphere_area,
    unit_sphere_rule,
)

__version__ = "0.1.0"

__all__ = [
    "CatalogSpec",
    "CenterPair",
    "ConfigError",
    "ConvergenceReport",
    "CurvatureBundle",
    "DecayReport",
    "DomainError",
    "KillingFieldId",
    "MassPair",
    "MetricField",
    "MetricJet2",
    "QuadSurface",
    "SingularMetricError",
    "UndefinedCenterError",
    "adm_mass_at",
    "build",
    "center_pair",
    "christoffel",
    "compare",
    "cs_center_at",
    "curvature_bundle",
    "decay_report",
    "default_fd_step",
    "einstein",
    "ellipsoid_family",
    "ellipsoid_quadrature",
    "fd_jet2",
    "field_X",
    "field_Y",
    "field_from_values",
    "fit_power_law",
    "g_normal_and_area",
    "ibp_residual_X",
    "ibp_residual_Y",
    "intrinsic_center_at",
    "intrinsic_mass_at",
    "jet2",
    "jet2_batch",
    "linearized_scalar",
    "mass_pair",
    "parity_split",
    "ricci",
    "rt_violator",
    "scalar_curvature",
    "scalar_curvature_moment",
    "sphere_quadrature",
    "standard_catalog",
    "sweep",
    "unit_sphere_area",
    "unit_sphere_rule",
]
