"""Numerical toolkit for composing and verifying regular linear control
systems at finite dimension: exact zero-order-hold discrete quadruples,
closed-loop algebra with quantitative robustness margins, Gramian-based
controllability and observability analysis, boundary-value realizations,
and a clamped-free beam example suite."""

from .beam import (
    BeamModel,
    BeamState,
    BeamTrajectory,
    FunctionalTrace,
    beam_discretize,
    beam_model,
    beam_transfer_H,
    beam_transfer_H1,
    energy,
    multiplier_rho,
    multiplier_rho1,
    random_smooth_state,
    rho1_derivative_check,
    rho_derivative_check,
    simulate,
    transfer_bound_products,
    verify_admissibility_bound,
    verify_observability,
    verify_wellposedness_bound,
    wellposedness_constant,
)
from .boundary import (
    BoundaryTriple,
    DirichletMap,
    FeedInReport,
    FeedthroughEstimate,
    RestrictedGenerator,
    close_boundary_loop,
    control_operator_from_triple,
    default_shift_sweep,
    dirichlet_map,
    feed_in_control,
    feed_in_full,
    feed_in_observe,
    feedthrough_estimate,
    laplacian_triple,
    restrict_generator,
    wave_triple,
)
from .errors import (
    AdmissibilityError,
    ControllabilityError,
    GridError,
    RegsysError,
    ShapeError,
    SpectrumError,
)
from .feedback import (
    CompositionReport,
    FeedbackGain,
    admissible_feedback_check,
    closed_loop,
    k0_bound,
    perturb_across,
    perturb_cross,
    perturb_double,
    theta0_bound,
)
from .gramian import (
    ControlOperatorMatrix,
    GramianReport,
    ObservationOperatorMatrix,
    SweepReport,
    control_operator,
    gramian_report,
    min_norm_control,
    observability_constant,
    observation_operator,
    robustness_sweep,
    surjectivity_radius,
)
from .grids import Signal, TimeGrid
from .node import (
    QuadrupleMaps,
    Realization,
    composition_deviations,
    input_map,
    io_map,
    lambda_extension,
    lifted_quadruple,
    lifted_step,
    output_map,
    quadruple_maps,
    regularity_limit,
    semigroup_step,
    transfer,
    zoh_step,
)
from .sampling import (
    across_instance,
    cross_instance,
    double_instance,
    random_realization,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "BeamModel",
    "BeamState",
    "BeamTrajectory",
    "BoundaryTriple",
    "CompositionReport",
    "ControlOperatorMatrix",
    "ControllabilityError",
    "DirichletMap",
    "FeedInReport",
    "FeedbackGain",
    "FeedthroughEstimate",
    "FunctionalTrace",
    "GramianReport",
    "GridError",
    "ObservationOperatorMatrix",
    "QuadrupleMaps",
    "Realization",
    "RegsysError",
    "RestrictedGenerator",
    "ShapeError",
    "Signal",
    "SpectrumError",
    "SweepReport",
    "TimeGrid",
    "across_instance",
    "admissible_feedback_check",
    "beam_discretize",
    "beam_model",
    "beam_transfer_H",
    "beam_transfer_H1",
    "close_boundary_loop",
    "closed_loop",
    "composition_deviations",
    "control_operator",
    "control_operator_from_triple",
    "cross_instance",
    "default_shift_sweep",
    "dirichlet_map",
    "double_instance",
    "energy",
    "feed_in_control",
    "feed_in_full",
    "feed_in_observe",
    "feedthrough_estimate",
    "gramian_report",
    "input_map",
    "io_map",
    "k0_bound",
    "lambda_extension",
    "laplacian_triple",
    "lifted_quadruple",
    "lifted_step",
    "min_norm_control",
    "multiplier_rho",
    "multiplier_rho1",
    "observability_constant",
    "observation_operator",
    "output_map",
    "perturb_across",
    "perturb_cross",
    "perturb_double",
    "quadruple_maps",
    "random_realization",
    "random_smooth_state",
    "regularity_limit",
    "restrict_generator",
    "rho1_derivative_check",
    "rho_derivative_check",
    "robustness_sweep",
    "semigroup_step",
    "simulate",
    "surjectivity_radius",
    "theta0_bound",
    "transfer",
    "transfer_bound_products",
    "verify_admissibility_bound",
    "verify_observability",
    "verify_wellposedness_bound",
    "wave_triple",
    "wellposedness_constant",
    "zoh_step",
]
