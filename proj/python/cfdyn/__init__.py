"""Central-force dynamics: the complete set of first integrals and the
generalized Laplace-Runge-Lenz geometry, backed by the C++ core."""

from ._core import (  # noqa: F401
    CartesianState,
    OracleParams,
    PolarState,
    RadialPotential,
    action_on_integrals,
    angular_momentum,
    apsidal_angle,
    bivector,
    classify,
    count_independent,
    embed_to_ndim,
    energy,
    first_integrals,
    inertial_points,
    kepler_shape,
    kepler_theta_closed,
    kepler_time_closed,
    lrl_variant,
    lrl_vector,
    newton_shape,
    newton_theta_closed,
    newton_time_closed,
    potential,
    radial_period,
    reduce_to_plane,
    simulate,
    special_points,
    temporal_ndim,
    theta_hat,
    turning_points,
)

__all__ = [
    "CartesianState",
    "OracleParams",
    "PolarState",
    "RadialPotential",
    "action_on_integrals",
    "angular_momentum",
    "apsidal_angle",
    "bivector",
    "classify",
    "count_independent",
    "embed_to_ndim",
    "energy",
    "first_integrals",
    "inertial_points",
    "kepler_shape",
    "kepler_theta_closed",
    "kepler_time_closed",
    "lrl_variant",
    "lrl_vector",
    "newton_shape",
    "newton_theta_closed",
    "newton_time_closed",
    "potential",
    "radial_period",
    "reduce_to_plane",
    "simulate",
    "special_points",
    "temporal_ndim",
    "theta_hat",
    "turning_points",
]
