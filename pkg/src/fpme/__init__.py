"""Radial spectral simulator and estimate-verification laboratory for the
degenerate fractional diffusion u_t + A^s(u^m) = 0 on hyperbolic 3-space.

The package provides three layers:

* exact sine-spectral calculus for radial fields (`spectral`), with the
  heat kernel and fractional-order Green function in closed or quadrature
  form (`kernels`) and the fractional operators built on them (`operators`);
* an implicit minimizing-movement time stepper with a hard-error inner
  solver (`evolution`);
* a battery of quantitative checks turning decay, monotonicity,
  contraction, and identity statements about the flow into pass/fail
  reports (`verify`), exposed through the `fpme` command line (`cli`).
"""

from .spectral import (
    NormRecord,
    RadialField,
    RadialGrid,
    SpectralField,
    apply_multiplier,
    bump_field,
    energy,
    from_spectral,
    gaussian_field,
    hs_norm,
    integrate,
    lp_norm,
    measure,
    smooth_taper,
    standard_bump,
    to_spectral,
)
from .kernels import (
    FitDivergenceError,
    GreenTable,
    KernelParams,
    QuadratureError,
    green_asymptotics,
    green_ball_integral,
    green_table,
    green_value,
    h_envelope,
    heat_kernel_h3,
    tail_profile,
)
from .operators import (
    ResolutionError,
    ResolutionWarning,
    Weight,
    WeightTailError,
    frac_laplacian,
    frac_laplacian_subordination,
    ground_state,
    heat_semigroup,
    inv_frac_laplacian,
    make_w_weight,
    uniform_weight,
)
from .evolution import (
    BoundaryLeakWarning,
    NegativityError,
    SolverConfig,
    SolverNonconvergence,
    Trajectory,
    decay_profile,
    evi_residual,
    evolve,
    itd_step,
    truncate_datum,
)
from .verify import (
    CHECK_NAMES,
    SUITES,
    CheckReport,
    HorizonError,
    VerifyPlan,
    check_contraction_comparison,
    check_fundamental_pointwise,
    check_lp_stability,
    check_potential_monotone,
    check_smoothing_l1,
    check_smoothing_log,
    check_smoothing_weighted,
    check_time_monotonicity,
    check_weak_dual_identity,
    check_weighted_mass_monotone,
    fit_loglog_slope,
    log_ratio_series,
    merge_reports,
    reports_to_json,
    run_suite,
    smoothing_ratio_series,
    weighted_ratio_series,
)

__version__ = "0.1.0"

__all__ = [
    "NormRecord",
    "RadialField",
    "RadialGrid",
    "SpectralField",
    "apply_multiplier",
    "bump_field",
    "energy",
    "from_spectral",
    "gaussian_field",
    "hs_norm",
    "integrate",
    "lp_norm",
    "measure",
    "smooth_taper",
    "standard_bump",
    "to_spectral",
    "FitDivergenceError",
    "GreenTable",
    "KernelParams",
    "QuadratureError",
    "green_asymptotics",
    "green_ball_integral",
    "green_table",
    "green_value",
    "h_envelope",
    "heat_kernel_h3",
    "tail_profile",
    "ResolutionError",
    "ResolutionWarning",
    "Weight",
    "WeightTailError",
    "frac_laplacian",
    "frac_laplacian_subordination",
    "ground_state",
    "heat_semigroup",
    "inv_frac_laplacian",
    "make_w_weight",
    "uniform_weight",
    "BoundaryLeakWarning",
    "NegativityError",
    "SolverConfig",
    "SolverNonconvergence",
    "Trajectory",
    "decay_profile",
    "evi_residual",
    "evolve",
    "itd_step",
    "truncate_datum",
    "CHECK_NAMES",
    "SUITES",
    "CheckReport",
    "HorizonError",
    "VerifyPlan",
    "check_contraction_comparison",
    "check_fundamental_pointwise",
    "check_lp_stability",
    "check_potential_monotone",
    "check_smoothing_l1",
    "check_smoothing_log",
    "check_smoothing_weighted",
    "check_time_monotonicity",
    "check_weak_dual_identity",
    "check_weighted_mass_monotone",
    "fit_loglog_slope",
    "log_ratio_series",
    "merge_reports",
    "reports_to_json",
    "run_suite",
    "smoothing_ratio_series",
    "weighted_ratio_series",
    "__version__",
]
