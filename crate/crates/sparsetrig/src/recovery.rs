//! End-to-end sampling recovery: choose (Λ, s, m, η) from a target accuracy,
//! draw random nodes, solve the constrained l1 program, and measure L_p
//! reconstruction error against the two-term tail bound
//!
//!   error ≤ c·s^{−1/p}·σ_s + c·s^{1/2−1/p}·E_Λ,
//!
//! where σ_s is the best s-term coefficient tail and E_Λ the projection
//! error. The constant c is tunable; [`calibrate_c_universal`] searches for
//! the smallest power of two making the probabilistic guarantee hold
//! empirically.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::IndexSet;
use crate::sampling::{draw_uniform, evaluate, full_grid, measurement_matrix};
use crate::solver::{solve_bpdn_with_config, BpdnProblem, SolverConfig, SolverStatus};
use crate::wiener::{
    membership, plan_truncation_with_cap, project, projection_error_bound, random_member,
    sigma_s, tail_wiener_norm, ClassSpec, CoefficientVector, DEFAULT_RADIUS_CAP,
};

/// How the noise radius η of the l1 program is chosen at solve time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EtaMode {
    /// η = (class projection bound at the planned radius)·√m. The default;
    /// uses no knowledge of the individual function.
    ClassBound,
    /// η = (the function's own coefficient tail outside Λ)·√m. Diagnostic
    /// only: it peeks at the ground truth and is labeled as such in reports.
    FunctionTail,
    /// η fixed by the caller.
    Fixed { value: f64 },
}

/// Knobs for plan construction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanConfig {
    /// Cap on the truncation radius chosen by the planner.
    pub radius_cap: u64,
    pub eta_mode: EtaMode,
    pub solver: SolverConfig,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            radius_cap: DEFAULT_RADIUS_CAP,
            eta_mode: EtaMode::ClassBound,
            solver: SolverConfig::default(),
        }
    }
}

/// A fully determined recovery experiment: frequency window, sparsity level,
/// sample count and noise radius. Serializable, so reports can embed the
/// exact plan they ran.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryPlan {
    pub spec: ClassSpec,
    pub lambda: IndexSet,
    pub s: usize,
    pub m: usize,
    /// Precomputed η (class-bound or fixed); None in function-tail mode,
    /// where η is derived from the ground truth at recovery time.
    pub eta: Option<f64>,
    pub eta_mode: EtaMode,
    pub gamma: f64,
    pub c_universal: f64,
    pub p: f64,
    /// Rescaled accuracy ε/(2c) when the plan came from an accuracy target.
    pub eps_tilde: Option<f64>,
    /// Class-level sup-norm projection bound at the plan's radius.
    pub class_projection_bound: Option<f64>,
    pub solver: SolverConfig,
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {gamma}"
        )));
    }
    Ok(())
}

fn validate_p(p: f64) -> Result<()> {
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "norm index must satisfy p >= 2, got {p}"
        )));
    }
    Ok(())
}

/// m = ⌈c·ln(1/γ)·s·ln³(max(s,2))·ln(#Λ)⌉, the sample-count rule that makes
/// the random Fourier matrix act near-isometrically on s-sparse vectors.
fn sample_count(c_universal: f64, gamma: f64, s: usize, log_cardinality: f64) -> Result<usize> {
    let s_eff = (s.max(2)) as f64;
    let m = c_universal * (1.0 / gamma).ln() * (s as f64) * s_eff.ln().powi(3) * log_cardinality;
    if !m.is_finite() || m > 1e15 {
        return Err(Error::CapExceeded {
            what: "sample count",
            needed: if m.is_finite() { m as u128 } else { u128::MAX },
            cap: 1_000_000_000_000_000,
        });
    }
    Ok((m.ceil() as usize).max(1))
}

/// Plans an experiment from a target accuracy ε with default configuration.
pub fn plan_parameters(
    spec: &ClassSpec,
    eps: f64,
    p: f64,
    gamma: f64,
    c_universal: f64,
) -> Result<RecoveryPlan> {
    plan_parameters_with_config(spec, eps, p, gamma, c_universal, &PlanConfig::default())
}

/// Chooses (Λ, s, m, η) for accuracy ε: rescale ε̃ = ε/(2c), set the sparsity
/// s = ⌈ε̃^{−p}⌉ (at least 2), truncate so the class projection bound is at
/// most min(1, ε̃^{p/2}), then take m samples by the log-factor rule.
pub fn plan_parameters_with_config(
    spec: &ClassSpec,
    eps: f64,
    p: f64,
    gamma: f64,
    c_universal: f64,
    config: &PlanConfig,
) -> Result<RecoveryPlan> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target accuracy must lie in (0, 1), got {eps}"
        )));
    }
    if !p.is_finite() {
        return Err(Error::InvalidParameter(
            "accuracy-driven planning requires a finite norm index".into(),
        ));
    }
    validate_p(p)?;
    validate_gamma(gamma)?;
    if !(c_universal > 0.0) || !c_universal.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "universal constant must be positive, got {c_universal}"
        )));
    }
    spec.validate()?;

    let eps_tilde = eps / (2.0 * c_universal);
    let s_raw = eps_tilde.powf(-p);
    if !s_raw.is_finite() || s_raw > 1e15 {
        return Err(Error::CapExceeded {
            what: "sparsity level",
            needed: if s_raw.is_finite() { s_raw as u128 } else { u128::MAX },
            cap: 1_000_000_000_000_000,
        });
    }
    let s = (s_raw.ceil() as usize).max(2);
    let trunc_target = eps_tilde.powf(p / 2.0).min(1.0);
    let trunc = plan_truncation_with_cap(spec, trunc_target, config.radius_cap)?;
    let lambda = IndexSet::cube_with_cap(spec.dimension, trunc.m, u128::MAX)?;
    let m = sample_count(c_universal, gamma, s, trunc.log_cardinality)?;
    let eta = trunc.projection_error_bound * (m as f64).sqrt();

    Ok(RecoveryPlan {
        spec: spec.clone(),
        lambda,
        s,
        m,
        eta: match config.eta_mode {
            EtaMode::ClassBound => Some(eta),
            EtaMode::Fixed { value } => Some(value),
            EtaMode::FunctionTail => None,
        },
        eta_mode: config.eta_mode,
        gamma,
        c_universal,
        p,
        eps_tilde: Some(eps_tilde),
        class_projection_bound: Some(trunc.projection_error_bound),
        solver: config.solver,
    })
}

/// Plans an experiment from an explicit frequency window and sparsity level
/// (no accuracy target): m comes from the same log-factor sample rule, η from
/// the configured mode.
pub fn plan_manual(
    spec: &ClassSpec,
    lambda: IndexSet,
    s: usize,
    p: f64,
    gamma: f64,
    c_universal: f64,
    config: &PlanConfig,
) -> Result<RecoveryPlan> {
    if s < 2 {
        return Err(Error::InvalidParameter(
            "sparsity level must be >= 2".into(),
        ));
    }
    validate_p(p)?;
    validate_gamma(gamma)?;
    if !(c_universal > 0.0) || !c_universal.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "universal constant must be positive, got {c_universal}"
        )));
    }
    spec.validate()?;
    if lambda.dimension() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            found: lambda.dimension(),
        });
    }

    let m = sample_count(c_universal, gamma, s, lambda.log_cardinality())?;
    let (eta, class_bound) = match config.eta_mode {
        EtaMode::ClassBound => {
            let radius = lambda.cube_radius().ok_or_else(|| {
                Error::InvalidParameter(
                    "class-bound eta requires a cube frequency window".into(),
                )
            })?;
            let bound = projection_error_bound(spec, radius.max(1))?;
            (Some(bound * (m as f64).sqrt()), Some(bound))
        }
        EtaMode::Fixed { value } => {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "fixed eta must be finite and >= 0, got {value}"
                )));
            }
            (Some(value), None)
        }
        EtaMode::FunctionTail => (None, None),
    };

    Ok(RecoveryPlan {
        spec: spec.clone(),
        lambda,
        s,
        m,
        eta,
        eta_mode: config.eta_mode,
        gamma,
        c_universal,
        p,
        eps_tilde: None,
        class_projection_bound: class_bound,
        solver: config.solver,
    })
}

/// Compact solver outcome embedded in recovery reports (solution omitted).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverSummary {
    pub status: SolverStatus,
    pub iterations: u64,
    pub l1_norm: f64,
    pub residual_norm: f64,
    pub gap: f64,
}

/// Result of one recovery run.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub recovered: CoefficientVector,
    pub lp_error: f64,
    /// Standard error of the lp estimate when Monte Carlo was used.
    pub lp_standard_error: Option<f64>,
    /// The two-term tail bound evaluated with this plan's constant on the
    /// function's own σ_s and tail.
    pub rhs_bound: f64,
    pub samples_used: usize,
    /// Wall-clock seconds for sampling + solve + error measurement.
    pub wall_time: f64,
    pub seed: u64,
    pub eta_used: f64,
    /// "class-bound", "function-tail (diagnostic)", or "fixed".
    pub eta_source: &'static str,
    pub sigma_s_value: f64,
    pub tail_norm: f64,
    pub solver: SolverSummary,
    pub warnings: Vec<String>,
}

/// Runs one full recovery experiment: draw m nodes from `seed`, sample f,
/// solve the l1 program on Λ, and compare the measured L_p error with the
/// plan's right-hand-side bound.
///
/// The projection of f onto Λ always satisfies the data constraint with the
/// function-tail η; that feasibility is verified on every run. Non-membership
/// and solver non-convergence are reported as warnings, never hidden.
pub fn recover(f: &CoefficientVector, plan: &RecoveryPlan, seed: u64) -> Result<RecoveryReport> {
    let start = Instant::now();
    let d = plan.spec.dimension;
    if f.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.dimension(),
        });
    }
    let mut warnings = Vec::new();
    let member_report = membership(&plan.spec, f)?;
    if !member_report.member {
        if member_report.sufficient_only {
            warnings.push(format!(
                "sufficient membership condition not satisfied (binding value {:.6}); \
                 the function may still belong to the class",
                member_report.binding_value()
            ));
        } else {
            warnings.push(format!(
                "ground truth is not a class member (binding value {:.6}); \
                 class-level guarantees do not apply",
                member_report.binding_value()
            ));
        }
    }

    let tail = tail_wiener_norm(f, &plan.lambda)?;
    let sqrt_m = (plan.m as f64).sqrt();
    let (eta_used, eta_source): (f64, &'static str) = match plan.eta_mode {
        EtaMode::ClassBound => (
            plan.eta.ok_or_else(|| {
                Error::InvalidParameter("plan lacks the precomputed class-bound eta".into())
            })?,
            "class-bound",
        ),
        EtaMode::Fixed { .. } => (
            plan.eta.ok_or_else(|| {
                Error::InvalidParameter("plan lacks the fixed eta value".into())
            })?,
            "fixed",
        ),
        EtaMode::FunctionTail => (tail * sqrt_m, "function-tail (diagnostic)"),
    };

    let nodes = draw_uniform(d, plan.m, seed)?;
    let y = evaluate(f, &nodes)?;
    let g = measurement_matrix(&plan.lambda, &nodes)?;

    // The projection P_Λ f is feasible for the function-tail radius:
    // |f − P_Λ f| ≤ tail pointwise, so its residual is at most tail·√m.
    let projected = project(f, &plan.lambda)?;
    let x_proj: Vec<Complex64> = plan
        .lambda
        .iter()
        .map(|k| projected.amplitude(&k))
        .collect();
    let y_norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    {
        let gx = &g * nalgebra::DVector::from_column_slice(&x_proj);
        let residual_proj = (nalgebra::DVector::from_column_slice(&y) - gx).norm();
        let allowed = tail * sqrt_m + 1e-9 * y_norm.max(1.0);
        if residual_proj > allowed {
            return Err(Error::Numerical(format!(
                "feasibility invariant violated: projected residual {residual_proj} \
                 exceeds tail bound {allowed}"
            )));
        }
    }

    let problem = BpdnProblem::new(g, y, eta_used)?;
    let solution = solve_bpdn_with_config(&problem, &plan.solver)?;
    if solution.status != SolverStatus::Converged {
        warnings.push(format!(
            "solver stopped with status {:?} after {} iterations (gap {:.3e})",
            solution.status, solution.iterations, solution.gap
        ));
    }
    let recovered = CoefficientVector::from_dense(&plan.lambda, &solution.x)?;

    let sigma = sigma_s(&projected, plan.s);
    let rhs_bound = error_bound_rhs(plan.s, plan.p, sigma, tail, plan.c_universal)?;
    let quad = QuadratureConfig::for_seed(seed);
    let lp = lp_error(f, &recovered, plan.p, &quad)?;

    Ok(RecoveryReport {
        recovered,
        lp_error: lp.value,
        lp_standard_error: lp.standard_error,
        rhs_bound,
        samples_used: plan.m,
        wall_time: start.elapsed().as_secs_f64(),
        seed,
        eta_used,
        eta_source,
        sigma_s_value: sigma,
        tail_norm: tail,
        solver: SolverSummary {
            status: solution.status,
            iterations: solution.iterations,
            l1_norm: solution.l1_norm,
            residual_norm: solution.residual_norm,
            gap: solution.gap,
        },
        warnings,
    })
}

/// Quadrature settings for [`lp_error`]: Monte Carlo size for 2 < p < ∞ and
/// grid resolution for p = ∞.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub n_points: usize,
    pub grid_per_dim: u64,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            n_points: 4096,
            grid_per_dim: 64,
            seed: 0x71ad,
        }
    }
}

impl QuadratureConfig {
    /// Default sizes with the Monte Carlo stream derived from `seed`.
    pub fn for_seed(seed: u64) -> Self {
        QuadratureConfig {
            seed: seed ^ 0x00c0_ffee,
            ..QuadratureConfig::default()
        }
    }
}

/// An L_p error value with its estimation method and uncertainty.
#[derive(Clone, Debug, Serialize)]
pub struct LpErrorReport {
    pub value: f64,
    /// Present only for the Monte Carlo path (2 < p < ∞).
    pub standard_error: Option<f64>,
    /// "parseval", "monte-carlo", or "grid-supremum-upper".
    pub method: &'static str,
}

/// ‖f − g‖_p between two coefficient vectors' functions.
///
/// p = 2 is exact by orthonormality; 2 < p < ∞ is a seeded Monte Carlo
/// estimate with a delta-method standard error; p = ∞ is a rigorous upper
/// bound: grid maximum plus a Lipschitz correction 2π‖∇‖-style tail covering
/// the worst point between grid nodes.
pub fn lp_error(
    c_true: &CoefficientVector,
    c_rec: &CoefficientVector,
    p: f64,
    quad: &QuadratureConfig,
) -> Result<LpErrorReport> {
    if c_true.dimension() != c_rec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: c_true.dimension(),
            found: c_rec.dimension(),
        });
    }
    validate_p(p)?;
    let d = c_true.dimension();
    let diff = CoefficientVector::from_terms(
        d,
        c_true
            .terms()
            .map(|(k, v)| (k.clone(), *v))
            .chain(c_rec.terms().map(|(k, v)| (k.clone(), -*v))),
    )?;

    if p == 2.0 {
        return Ok(LpErrorReport {
            value: diff.l2_norm(),
            standard_error: None,
            method: "parseval",
        });
    }

    if p.is_infinite() {
        let grid = full_grid(d, quad.grid_per_dim)?;
        let vals = evaluate(&diff, &grid)?;
        let grid_max = vals.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        // |∇(f−g)| ≤ 2π Σ|Δ_k|·‖k‖₂, and every torus point is within
        // Euclidean distance √d/(2·grid) of a grid node.
        let lipschitz: f64 = diff
            .terms()
            .map(|(k, v)| v.norm() * k.l2_norm())
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI;
        let correction = lipschitz * (d as f64).sqrt() / (2.0 * quad.grid_per_dim as f64);
        return Ok(LpErrorReport {
            value: grid_max + correction,
            standard_error: None,
            method: "grid-supremum-upper",
        });
    }

    if quad.n_points < 2 {
        return Err(Error::InvalidParameter(
            "Monte Carlo quadrature needs at least 2 points".into(),
        ));
    }
    let nodes = draw_uniform(d, quad.n_points, quad.seed)?;
    let vals = evaluate(&diff, &nodes)?;
    let n = quad.n_points as f64;
    let powers: Vec<f64> = vals.iter().map(|c| c.norm().powf(p)).collect();
    let mean = powers.iter().sum::<f64>() / n;
    let var = powers.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let se_mean = (var / n).sqrt();
    let value = mean.powf(1.0 / p);
    // Delta method: d(M^{1/p})/dM = M^{1/p}/(p·M).
    let standard_error = if mean > 0.0 {
        Some(value * se_mean / (p * mean))
    } else {
        Some(0.0)
    };
    Ok(LpErrorReport {
        value,
        standard_error,
        method: "monte-carlo",
    })
}

/// The two-term recovery bound c·s^{−1/p}·σ + c·s^{1/2−1/p}·E.
pub fn error_bound_rhs(
    s: usize,
    p: f64,
    sigma: f64,
    e_bound: f64,
    c_universal: f64,
) -> Result<f64> {
    if s < 1 {
        return Err(Error::InvalidParameter(
            "sparsity level must be >= 1".into(),
        ));
    }
    validate_p(p)?;
    if sigma < 0.0 || e_bound < 0.0 {
        return Err(Error::InvalidParameter(
            "tail quantities must be >= 0".into(),
        ));
    }
    if !(c_universal > 0.0) || !c_universal.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "universal constant must be positive, got {c_universal}"
        )));
    }
    let sf = s as f64;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok(c_universal * sf.powf(-inv_p) * sigma + c_universal * sf.powf(0.5 - inv_p) * e_bound)
}

/// One attempt of the calibration loop.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationAttempt {
    pub c_universal: f64,
    pub m: usize,
    pub successes: u32,
    pub trials: u32,
}

/// Calibration outcome: the smallest tested constant whose plan met the
/// empirical success criterion, with the full attempt history.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    pub c_universal: f64,
    pub plan: RecoveryPlan,
    pub attempts: Vec<CalibrationAttempt>,
}

/// Doubles the universal constant (which scales both the sample count and
/// the error bound) until recovery of random class members succeeds — the
/// measured L_p error stays within the plan's bound — in at least a 1−γ
/// fraction of trials. The same trial functions are reused across attempts.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_c_universal(
    spec: &ClassSpec,
    lambda: &IndexSet,
    s: usize,
    p: f64,
    gamma: f64,
    trials: u32,
    support_budget: usize,
    max_freq: u64,
    seed: u64,
    config: &PlanConfig,
) -> Result<CalibrationReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least 1 trial".into()));
    }
    let needed = ((1.0 - gamma) * trials as f64).ceil() as u32;
    let mut attempts = Vec::new();
    const MAX_DOUBLINGS: u32 = 12;
    for k in 0..=MAX_DOUBLINGS {
        let c = (1u64 << k) as f64;
        let plan = plan_manual(spec, lambda.clone(), s, p, gamma, c, config)?;
        let mut successes = 0u32;
        for t in 0..trials {
            let f_seed = seed ^ (t as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let f = random_member(spec, support_budget, max_freq, f_seed)?;
            let report = recover(&f, &plan, f_seed ^ 0xa5a5_a5a5)?;
            if report.lp_error <= report.rhs_bound {
                successes += 1;
            }
        }
        attempts.push(CalibrationAttempt {
            c_universal: c,
            m: plan.m,
            successes,
            trials,
        });
        if successes >= needed {
            return Ok(CalibrationReport {
                c_universal: c,
                plan,
                attempts,
            });
        }
    }
    Err(Error::Numerical(format!(
        "calibration did not reach a {:.1}% success rate within {MAX_DOUBLINGS} doublings",
        100.0 * (1.0 - gamma)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plan_parameters_examples() {
        // ε̃ = 0.1 at p = 2 gives s = 100: achieved by ε = 0.2, c = 1.
        let spec = ClassSpec::log_class(1);
        let plan = plan_parameters(&spec, 0.2, 2.0, (-1.0f64).exp(), 1.0).unwrap();
        assert_eq!(plan.s, 100);
        assert!((plan.eps_tilde.unwrap() - 0.1).abs() < 1e-15);

        // ε̃ close to 1 clamps to s = 2.
        let plan = plan_parameters(&spec, 0.99, 2.0, 0.5, 0.5).unwrap();
        assert_eq!(plan.s, 2);

        // Planning rejects the class without a decaying projection bound.
        assert!(matches!(
            plan_parameters(&ClassSpec::wiener_ball(1), 0.5, 2.0, 0.5, 1.0),
            Err(Error::NoFiniteTruncation)
        ));

        assert!(plan_parameters(&spec, 1.0, 2.0, 0.5, 1.0).is_err());
        assert!(plan_parameters(&spec, 0.5, 1.5, 0.5, 1.0).is_err());
        assert!(plan_parameters(&spec, 0.5, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn planned_samples_monotone_in_accuracy() {
        let spec = ClassSpec::log_class(2);
        let mut prev_m = 0usize;
        let mut prev_s = 0usize;
        for eps in [0.9, 0.7, 0.5, 0.35, 0.25] {
            let plan = plan_parameters(&spec, eps, 2.0, (-1.0f64).exp(), 1.0).unwrap();
            assert!(plan.s >= prev_s);
            assert!(plan.m >= prev_m, "m not nondecreasing at eps={eps}");
            prev_m = plan.m;
            prev_s = plan.s;
        }
    }

    #[test]
    fn planned_eta_matches_bound_times_sqrt_m() {
        let spec = ClassSpec::log_class(2);
        let plan = plan_parameters(&spec, 0.5, 2.0, 0.5, 1.0).unwrap();
        let radius = plan.lambda.cube_radius().unwrap();
        let bound = projection_error_bound(&spec, radius).unwrap();
        let want = bound * (plan.m as f64).sqrt();
        assert!((plan.eta.unwrap() - want).abs() < 1e-12 * want);
        assert!(bound <= plan.eps_tilde.unwrap().min(1.0) + 1e-15);
    }

    #[test]
    fn sample_curve_slope_stays_in_the_expected_band() {
        // Over this coarse range the planned m(ε) falls with log-log slope
        // between −7 and −1: the dominant ε^{−p} term gives −p, and the
        // polylog factors steepen it at these moderate accuracies.
        let spec = ClassSpec::log_class(2);
        let eps_grid = [0.5, 0.35, 0.25];
        let pts: Vec<(f64, f64)> = eps_grid
            .iter()
            .map(|&eps| {
                let plan = plan_parameters(&spec, eps, 2.0, (-1.0f64).exp(), 1.0).unwrap();
                (eps.ln(), (plan.m as f64).ln())
            })
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(
            (-7.0..=-1.0).contains(&slope),
            "log-log sample slope {slope} out of band"
        );
    }

    #[test]
    fn huge_plans_tabulate_without_materializing() {
        // d = 8 at ε = 0.2: the frequency cube has ~1.4e37 elements; planning
        // must stay O(1) and serialize lazily.
        let spec = ClassSpec::log_class(8);
        let plan = plan_parameters(&spec, 0.2, 2.0, (-1.0f64).exp(), 1.0).unwrap();
        assert!(plan.lambda.cardinality() > u64::MAX as u128);
        assert!(plan.lambda.log_cardinality() <= 2.0 * 8.0 / 0.1 + 1e-9);
        let json = serde_json::to_string(&plan).unwrap();
        let back: RecoveryPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back.lambda, plan.lambda);
        assert_eq!(back.m, plan.m);
    }

    #[test]
    fn error_bound_rhs_examples() {
        let v = error_bound_rhs(4, 2.0, 1.0, 0.1, 1.0).unwrap();
        assert!((v - 0.6).abs() < 1e-12);
        assert_eq!(error_bound_rhs(4, 2.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
        // Nonincreasing in s when E = 0.
        let mut prev = f64::INFINITY;
        for s in 1..40 {
            let v = error_bound_rhs(s, 3.0, 1.0, 0.0, 2.0).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        // p = ∞: s^{−1/p} = 1.
        let v = error_bound_rhs(9, f64::INFINITY, 1.0, 1.0, 1.0).unwrap();
        assert!((v - (1.0 + 3.0)).abs() < 1e-12);
        assert!(error_bound_rhs(0, 2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lp_error_examples() {
        let f = CoefficientVector::from_terms(
            2,
            [(MultiIndex::new(vec![1, 0]), c64(0.5, 0.2))],
        )
        .unwrap();
        let quad = QuadratureConfig::default();
        for p in [2.0, 3.0, 4.0, f64::INFINITY] {
            let rep = lp_error(&f, &f, p, &quad).unwrap();
            assert_eq!(rep.value, 0.0, "p = {p}");
        }

        let g = CoefficientVector::new(2);
        let single = CoefficientVector::from_terms(
            2,
            [(MultiIndex::new(vec![1, 0]), c64(0.3, 0.0))],
        )
        .unwrap();
        let rep = lp_error(&single, &g, 2.0, &quad).unwrap();
        assert!((rep.value - 0.3).abs() < 1e-15);
        assert_eq!(rep.method, "parseval");

        // A single character has |h| ≡ 0.3, so every L_p norm is 0.3.
        let rep = lp_error(&single, &g, 4.0, &quad).unwrap();
        assert!((rep.value - 0.3).abs() < 1e-12);
        let rep = lp_error(&single, &g, f64::INFINITY, &quad).unwrap();
        assert!(rep.value >= 0.3);
        assert!(rep.value <= 0.3 + 0.3 * 2.0 * std::f64::consts::PI * 1.5 / 64.0);
    }

    #[test]
    fn lp_error_l2_matches_monte_carlo_within_3_se() {
        let mut ok = 0;
        let total = 20;
        for seed in 0..total {
            let spec = ClassSpec::wiener_ball(2);
            let f = random_member(&spec, 8, 4, seed).unwrap();
            let g = random_member(&spec, 6, 4, seed ^ 0xdead).unwrap();
            let parseval = lp_error(&f, &g, 2.0, &QuadratureConfig::default())
                .unwrap()
                .value;
            // Monte Carlo estimate of the same L2 norm, via p slightly
            // above 2 being unavailable: estimate directly at p = 2 by
            // sampling |h|² at random nodes.
            let quad = QuadratureConfig {
                n_points: 8192,
                seed: seed ^ 0xbeef,
                ..QuadratureConfig::default()
            };
            let d = 2;
            let diff = CoefficientVector::from_terms(
                d,
                f.terms()
                    .map(|(k, v)| (k.clone(), *v))
                    .chain(g.terms().map(|(k, v)| (k.clone(), -*v))),
            )
            .unwrap();
            let nodes = draw_uniform(d, quad.n_points, quad.seed).unwrap();
            let vals = evaluate(&diff, &nodes).unwrap();
            let n = quad.n_points as f64;
            let sq: Vec<f64> = vals.iter().map(|c| c.norm_sqr()).collect();
            let mean = sq.iter().sum::<f64>() / n;
            let var = sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            if (mean - parseval * parseval).abs() <= 3.0 * se {
                ok += 1;
            }
        }
        // 3σ misses happen with probability ~0.3% per trial.
        assert!(ok >= total - 1, "only {ok}/{total} inside 3 SE");
    }

    #[test]
    fn lp_interpolation_inequality_holds_numerically() {
        // ‖h‖_p ≤ ‖h‖₂^{2/p}·‖h‖_∞^{1−2/p} for p between 2 and ∞.
        let quad = QuadratureConfig::default();
        for seed in 0..10u64 {
            let f = random_member(&ClassSpec::wiener_ball(2), 10, 5, seed).unwrap();
            let zero = CoefficientVector::new(2);
            let l2 = lp_error(&f, &zero, 2.0, &quad).unwrap().value;
            let linf = lp_error(&f, &zero, f64::INFINITY, &quad).unwrap().value;
            for p in [3.0, 4.0, 6.0] {
                let rep = lp_error(&f, &zero, p, &quad).unwrap();
                let se = rep.standard_error.unwrap();
                let bound = l2.powf(2.0 / p) * linf.powf(1.0 - 2.0 / p);
                assert!(
                    rep.value <= bound * (1.0 + 3.0 * se / rep.value.max(1e-300)),
                    "seed {seed} p {p}: {} > {bound}",
                    rep.value
                );
            }
        }
    }

    #[test]
    fn recover_zero_function() {
        let spec = ClassSpec::log_class(2);
        let plan = plan_manual(
            &spec,
            IndexSet::cube(2, 2).unwrap(),
            3,
            2.0,
            0.5,
            1.0,
            &PlanConfig::default(),
        )
        .unwrap();
        let f = CoefficientVector::new(2);
        let report = recover(&f, &plan, 5).unwrap();
        assert!(report.recovered.is_empty());
        assert_eq!(report.lp_error, 0.0);
        assert_eq!(report.solver.status, SolverStatus::Converged);
    }

    #[test]
    fn recover_sparse_inside_window_is_exact_with_tail_eta() {
        // Ground truth fully inside Λ: the function tail is 0, so η = 0 and
        // sparse recovery is exact. Exact-fit solves end on the iteration
        // budget (the 1e-8 gap certificate is out of reach for the residual
        // of an exact fit), so the non-convergence note is expected; what
        // matters is that the recovered function is right.
        let spec = ClassSpec::log_class(2);
        let config = PlanConfig {
            eta_mode: EtaMode::FunctionTail,
            solver: SolverConfig {
                max_iter: 3_000,
                ..SolverConfig::default()
            },
            ..PlanConfig::default()
        };
        let plan = plan_manual(
            &spec,
            IndexSet::cube(2, 2).unwrap(),
            3,
            2.0,
            (-1.0f64).exp(),
            4.0,
            &config,
        )
        .unwrap();
        assert!(plan.m >= 40, "sample rule should give a workable budget");
        for seed in 0..5u64 {
            let f = random_member(&spec, 3, 2, seed).unwrap();
            let report = recover(&f, &plan, seed ^ 0x77).unwrap();
            assert_eq!(report.eta_used, 0.0);
            assert_eq!(report.eta_source, "function-tail (diagnostic)");
            assert!(
                report.lp_error <= 1e-6,
                "seed {seed}: lp error {}",
                report.lp_error
            );
            for w in &report.warnings {
                assert!(w.contains("solver stopped"), "unexpected warning {w}");
            }
        }
    }

    #[test]
    fn recovered_l1_norm_never_exceeds_projection() {
        let spec = ClassSpec::log_class(2);
        let plan = plan_manual(
            &spec,
            IndexSet::cube(2, 3).unwrap(),
            4,
            2.0,
            (-1.0f64).exp(),
            1.0,
            &PlanConfig::default(),
        )
        .unwrap();
        for seed in [3u64, 14, 159] {
            let f = random_member(&spec, 8, 6, seed).unwrap();
            let report = recover(&f, &plan, seed).unwrap();
            let proj_l1 = project(&f, &plan.lambda).unwrap().wiener_norm();
            assert!(
                report.solver.l1_norm <= proj_l1 + 2e-8 * proj_l1.max(1.0),
                "seed {seed}: {} > {proj_l1}",
                report.solver.l1_norm
            );
            assert!(proj_l1 <= f.wiener_norm() + 1e-15);
            assert!(f.wiener_norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn recover_warns_on_nonmember() {
        let spec = ClassSpec::wiener_ball(1);
        let plan = plan_manual(
            &spec,
            IndexSet::cube(1, 2).unwrap(),
            2,
            2.0,
            0.5,
            1.0,
            &PlanConfig {
                eta_mode: EtaMode::Fixed { value: 0.0 },
                ..PlanConfig::default()
            },
        )
        .unwrap();
        let f = CoefficientVector::from_terms(
            1,
            [(MultiIndex::new(vec![1]), c64(2.0, 0.0))],
        )
        .unwrap();
        let report = recover(&f, &plan, 1).unwrap();
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("not a class member")));
    }

    #[test]
    fn recovery_report_serializes_with_plan_context() {
        let spec = ClassSpec::log_class(1);
        let plan = plan_manual(
            &spec,
            IndexSet::cube(1, 2).unwrap(),
            2,
            2.0,
            0.5,
            1.0,
            &PlanConfig::default(),
        )
        .unwrap();
        let f = random_member(&spec, 2, 2, 8).unwrap();
        let report = recover(&f, &plan, 8).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"eta_source\""));
        assert!(json.contains("\"rhs_bound\""));

        let plan_json = serde_json::to_string(&plan).unwrap();
        let back: RecoveryPlan = serde_json::from_str(&plan_json).unwrap();
        assert_eq!(back.s, plan.s);
        assert_eq!(back.eta_mode, plan.eta_mode);
    }

    #[test]
    fn calibration_terminates_on_easy_geometry() {
        // Support budget 5 > s = 2 keeps σ_s strictly positive, so the
        // right-hand side the trials are judged against is nonzero.
        let spec = ClassSpec::log_class(1);
        let lambda = IndexSet::cube(1, 3).unwrap();
        let report = calibrate_c_universal(
            &spec,
            &lambda,
            2,
            2.0,
            (-1.0f64).exp(),
            8,
            5,
            3,
            424_242,
            &PlanConfig::default(),
        )
        .unwrap();
        assert!(report.c_universal >= 1.0);
        assert!(!report.attempts.is_empty());
        let last = report.attempts.last().unwrap();
        let needed = ((1.0 - (-1.0f64).exp()) * 8.0).ceil() as u32;
        assert!(last.successes >= needed);
    }
}
