//! Sparse trigonometric recovery: nonlinear sampling recovery of
//! multivariate periodic functions from i.i.d. random point samples.
//!
//! The library covers the full pipeline: frequency sets and coefficient
//! vectors ([`multiindex`], [`wiener`]), random sampling and Fourier
//! measurement matrices ([`sampling`]), an equality/noise-constrained
//! basis-pursuit solver with a verifiable duality-gap certificate
//! ([`solver`]), end-to-end recovery planning and error reporting
//! ([`recovery`]), and exact worst-case errors of linear rank-n algorithms
//! on the unit coefficient ball ([`lowerbound`]) that exhibit the
//! nonlinear-vs-linear separation.

pub mod error;
pub mod multiindex;
pub mod sampling;
pub mod solver;
pub mod recovery;
pub mod lowerbound;
pub mod wiener;

pub use error::{Error, Result};
pub use multiindex::{IndexSet, MultiIndex, DEFAULT_INDEX_CAP};
pub use wiener::{
    class_weight, hoelder_coefficient, lebesgue_constant, membership, plan_truncation,
    plan_truncation_with_cap, project, projection_error_bound, random_member, sigma_s,
    sobolev_cs, tail_wiener_norm, zeta, ClassBoundReport, ClassSpec, ClassVariant,
    CoefficientVector, ConstraintCheck, HoelderConstants, MembershipReport, DEFAULT_RADIUS_CAP,
    MEMBERSHIP_TOL,
};
pub use sampling::{
    draw_uniform, evaluate, full_grid, measurement_matrix, measurement_matrix_with_cap,
    PointSet, DEFAULT_MATRIX_CAP,
};
pub use solver::{
    certificate_gap, least_squares, solve_bpdn, solve_bpdn_with_config, BpdnProblem,
    SolverConfig, SolverResult, SolverStatus,
};
pub use recovery::{
    calibrate_c_universal, error_bound_rhs, lp_error, plan_manual, plan_parameters,
    plan_parameters_with_config, recover, CalibrationAttempt, CalibrationReport, EtaMode,
    LpErrorReport, PlanConfig, QuadratureConfig, RecoveryPlan, RecoveryReport, SolverSummary,
};
pub use lowerbound::{
    curse_demo, curse_demo_with_options, gluskin_bound, worst_case_l1ball_error,
    CurseDemoOptions, LinearAlgorithmMatrix, SeparationReport,
};
