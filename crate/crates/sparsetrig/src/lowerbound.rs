//! Exact worst-case error of rank-limited linear reconstruction maps over
//! the unit l1 ball of coefficients, the dimension-free lower bound
//! sqrt((N−n)/N) it always dominates, and a desk-scale separation experiment:
//! the same single-character witness that defeats every low-rank linear
//! algorithm is recovered to machine precision by l1 minimization from a
//! handful of random samples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::sampling::{draw_uniform, evaluate, measurement_matrix};
use crate::solver::{solve_bpdn_with_config, BpdnProblem, SolverConfig, SolverStatus};
use crate::wiener::CoefficientVector;

/// Relative singular-value cutoff for numerical rank.
const RANK_TOL: f64 = 1e-10;

/// A linear reconstruction map T on coefficient space with a declared rank
/// budget. Construction verifies that the numerical rank does not exceed the
/// declared one.
#[derive(Clone, Debug)]
pub struct LinearAlgorithmMatrix {
    t: DMatrix<Complex64>,
    declared_rank: usize,
    numerical_rank: usize,
}

impl LinearAlgorithmMatrix {
    pub fn new(t: DMatrix<Complex64>, declared_rank: usize) -> Result<Self> {
        if t.nrows() != t.ncols() {
            return Err(Error::InvalidParameter(format!(
                "linear map must be square, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        if t.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("linear map entry"));
        }
        let svd = t.clone().svd(false, false);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        let numerical_rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * sigma_max)
            .count();
        if numerical_rank > declared_rank {
            return Err(Error::InvalidParameter(format!(
                "numerical rank {numerical_rank} exceeds declared rank {declared_rank}"
            )));
        }
        Ok(LinearAlgorithmMatrix {
            t,
            declared_rank,
            numerical_rank,
        })
    }

    pub fn size(&self) -> usize {
        self.t.nrows()
    }

    pub fn declared_rank(&self) -> usize {
        self.declared_rank
    }

    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.t
    }
}

/// Exactly max_{‖x‖₁ ≤ 1} ‖x − Tx‖₂ and a maximizing coordinate.
///
/// The objective is a norm of an affine image, hence convex; its maximum over
/// the l1 ball is attained at an extreme point ω·e_j with |ω| = 1, and the
/// value ‖(I − T)(ω e_j)‖₂ = ‖(I − T)e_j‖₂ does not depend on the phase ω.
/// So the exact worst case is the largest column norm of I − T.
pub fn worst_case_l1ball_error(map: &LinearAlgorithmMatrix) -> (f64, usize) {
    let t = &map.t;
    let n = t.nrows();
    let mut best = (0.0f64, 0usize);
    for j in 0..n {
        let mut sq = 0.0f64;
        for i in 0..n {
            let mut v = -t[(i, j)];
            if i == j {
                v += Complex64::new(1.0, 0.0);
            }
            sq += v.norm_sqr();
        }
        let norm = sq.sqrt();
        if norm > best.0 {
            best = (norm, j);
        }
    }
    best
}

/// sqrt((m − n)/m): the error some unit-l1 vector forces on every rank-n
/// linear map on C^m.
pub fn gluskin_bound(m: usize, n: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("ambient size must be >= 1".into()));
    }
    if n >= m {
        return Err(Error::InvalidParameter(format!(
            "rank budget {n} must be below the ambient size {m}"
        )));
    }
    Ok(((m - n) as f64 / m as f64).sqrt())
}

/// Options for [`curse_demo`].
#[derive(Clone, Copy, Debug)]
pub struct CurseDemoOptions {
    /// Cap on #Λ = 5^d; the default keeps the demo at d ≤ 3.
    pub index_cap: u128,
    /// Sample budget for the nonlinear (l1) side.
    pub bpdn_samples: usize,
    pub solver: SolverConfig,
}

impl Default for CurseDemoOptions {
    fn default() -> Self {
        CurseDemoOptions {
            index_cap: 125,
            bpdn_samples: 40,
            solver: SolverConfig::default(),
        }
    }
}

/// Outcome of the linear-vs-nonlinear separation experiment.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub d: usize,
    pub lambda_size: usize,
    pub n_rank: usize,
    pub numerical_rank: usize,
    /// Exact worst-case L2 error of the rank-limited linear map over the
    /// unit l1 coefficient ball.
    pub linear_worst_case: f64,
    /// The frequency of the worst-case single character.
    pub witness: MultiIndex,
    pub witness_position: usize,
    /// sqrt((#Λ − n)/#Λ); absent when the rank budget fills the whole space.
    pub gluskin: Option<f64>,
    pub meets_gluskin: Option<bool>,
    /// True when n_rank exceeds ⌊#Λ/2⌋, where the 1/√2 floor no longer
    /// applies.
    pub budget_above_threshold: bool,
    /// The sup-norm error of the linear map on the witness is at least its
    /// L2 error, so the same value lower-bounds the L∞ worst case.
    pub linf_lower_bound: f64,
    pub bpdn_samples: usize,
    /// L2 coefficient error of l1 recovery of the witness character.
    pub bpdn_error: f64,
    pub bpdn_status: SolverStatus,
    pub seed: u64,
}

/// Runs the separation demo with default options (cap 125, 40 samples).
pub fn curse_demo(d: usize, n_rank: usize, seed: u64) -> Result<SeparationReport> {
    curse_demo_with_options(d, n_rank, seed, &CurseDemoOptions::default())
}

/// Builds a concrete rank-n linear algorithm on Λ = [−2, 2]^d (least-squares
/// reconstruction from n random samples, i.e. projection onto the top
/// singular directions of the sample matrix), computes its exact worst-case
/// l1-ball error and the witness character attaining it, then recovers that
/// same witness by l1 minimization from `bpdn_samples` random samples.
pub fn curse_demo_with_options(
    d: usize,
    n_rank: usize,
    seed: u64,
    opts: &CurseDemoOptions,
) -> Result<SeparationReport> {
    let lambda = IndexSet::cube_with_cap(d, 2, opts.index_cap)?;
    let n_total = lambda.len();
    if n_rank > n_total {
        return Err(Error::InvalidParameter(format!(
            "rank budget {n_rank} exceeds #Λ = {n_total}"
        )));
    }

    let t = if n_rank == 0 {
        DMatrix::from_element(n_total, n_total, Complex64::new(0.0, 0.0))
    } else {
        let nodes = draw_uniform(d, n_rank, seed)?;
        let a = measurement_matrix(&lambda, &nodes)?;
        // Least squares from these samples reconstructs A⁺A x: the orthogonal
        // projection onto the row space, V_r V_r^H from the truncated SVD.
        let svd = a.clone().svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * sigma_max)
            .count();
        let v_r = v_t.rows(0, rank).adjoint();
        &v_r * v_r.adjoint()
    };
    let map = LinearAlgorithmMatrix::new(t, n_rank)?;
    let (linear_worst_case, witness_position) = worst_case_l1ball_error(&map);
    let witness = lambda.get(witness_position).expect("position in range");

    let gluskin = if n_rank < n_total {
        Some(gluskin_bound(n_total, n_rank)?)
    } else {
        None
    };
    let meets_gluskin = gluskin.map(|g| linear_worst_case >= g - 1e-9);
    let budget_above_threshold = n_rank > n_total / 2;

    // Nonlinear side: recover the witness character from random samples by
    // l1 minimization. The noise radius is a sliver of ‖y‖ — large enough
    // for the duality-gap certificate to resolve (the residual of an exact
    // fit carries no dual information), small enough that the recovery error
    // stays orders of magnitude below the linear worst case.
    let witness_fn = CoefficientVector::from_terms(
        d,
        [(witness.clone(), Complex64::new(1.0, 0.0))],
    )?;
    let nodes = draw_uniform(d, opts.bpdn_samples, seed ^ 0x5eed_cafe)?;
    let y = evaluate(&witness_fn, &nodes)?;
    let g = measurement_matrix(&lambda, &nodes)?;
    let y_norm = DVector::from_column_slice(&y).norm();
    let problem = BpdnProblem::new(g, y, 3e-7 * y_norm)?;
    let solution = solve_bpdn_with_config(&problem, &opts.solver)?;
    let mut err_sq = 0.0f64;
    for (j, xj) in solution.x.iter().enumerate() {
        let want = if j == witness_position {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        err_sq += (xj - want).norm_sqr();
    }

    Ok(SeparationReport {
        d,
        lambda_size: n_total,
        n_rank,
        numerical_rank: map.numerical_rank(),
        linear_worst_case,
        witness,
        witness_position,
        gluskin,
        meets_gluskin,
        budget_above_threshold,
        linf_lower_bound: linear_worst_case,
        bpdn_samples: opts.bpdn_samples,
        bpdn_error: err_sq.sqrt(),
        bpdn_status: solution.status,
        seed,
    })
}
