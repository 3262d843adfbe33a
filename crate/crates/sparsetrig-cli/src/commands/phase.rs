//! `phase-transition`: empirical probability of exact sparse recovery over a
//! (sparsity, sample count) grid, with planted unit-norm ground truths on a
//! cube frequency window.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use sparsetrig::{
    draw_uniform, full_grid, measurement_matrix, solve_bpdn_with_config, BpdnProblem, IndexSet,
    SolverStatus,
};

use crate::commands::Outcome;
use crate::config::{grid_side, PhaseConfig, SamplingMode};
use crate::error::{from_lib, AppError, Result};
use crate::output::{fmt_f64, CsvDoc};

const COLUMNS: &[&str] = &[
    "d",
    "sampling",
    "s",
    "m",
    "trials",
    "successes",
    "success_rate",
];

/// A trial succeeds when the relative L2 coefficient error is at most this.
const SUCCESS_TOL: f64 = 1e-4;

/// Random s-sparse coefficient vector on n slots: distinct support, unit
/// moduli with uniform phases, scaled to unit L2 norm.
fn planted(n: usize, s: usize, seed: u64) -> DVector<Complex64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let support = rand::seq::index::sample(&mut rng, n, s);
    let mut x = DVector::from_element(n, Complex64::new(0.0, 0.0));
    let amp = 1.0 / (s as f64).sqrt();
    for j in support {
        let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        x[j] = Complex64::from_polar(amp, phase);
    }
    x
}

pub fn run(cfg: &PhaseConfig, hash: &str) -> Result<Outcome> {
    let lambda = IndexSet::cube(cfg.d, cfg.cube_radius).map_err(from_lib)?;
    let n = lambda.len();
    for &s in &cfg.sparsities {
        if s > n {
            return Err(AppError::Config(format!(
                "sparsity {s} exceeds the window size {n}"
            )));
        }
    }

    let trials = cfg.trials as u64;
    let len_m = cfg.sample_counts.len();
    // Flat job grid in config order; the seed encodes the cell and trial.
    let jobs: Vec<(usize, usize, u64)> = (0..cfg.sparsities.len())
        .flat_map(|si| {
            (0..len_m).flat_map(move |mi| {
                (0..trials).map(move |t| {
                    let offset = (si as u64 * len_m as u64 + mi as u64) * trials + t;
                    (si, mi, offset)
                })
            })
        })
        .map(|(si, mi, offset)| (si, mi, cfg.base_seed.wrapping_add(offset)))
        .collect();
    let seeds: Vec<u64> = jobs.iter().map(|&(_, _, seed)| seed).collect();

    let results: Result<Vec<(bool, bool)>> = jobs
        .par_iter()
        .map(|&(si, mi, seed)| {
            let s = cfg.sparsities[si];
            let m = cfg.sample_counts[mi];
            let x_star = planted(n, s, seed);
            let nodes = match cfg.sampling {
                // Distinct stream for the nodes.
                SamplingMode::Iid => draw_uniform(cfg.d, m, seed ^ 0xa5a5_a5a5),
                SamplingMode::Grid => {
                    let g = grid_side(cfg.d, m).expect("validated");
                    full_grid(cfg.d, g)
                }
            }
            .map_err(from_lib)?;
            let g = measurement_matrix(&lambda, &nodes).map_err(from_lib)?;
            let y = &g * &x_star;
            let problem = BpdnProblem::new(g, y.iter().copied().collect(), cfg.eta)
                .map_err(from_lib)?;
            let res = solve_bpdn_with_config(&problem, &cfg.solver).map_err(from_lib)?;
            let err = res
                .x
                .iter()
                .zip(x_star.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok((err <= SUCCESS_TOL, res.status != SolverStatus::Converged))
        })
        .collect();
    let results = results?;

    let mut csv = CsvDoc::new("phase-transition", hash, &seeds, COLUMNS);
    let mut nonconverged = 0usize;
    let mut cursor = 0usize;
    for &s in &cfg.sparsities {
        for &m in &cfg.sample_counts {
            let cell = &results[cursor..cursor + trials as usize];
            cursor += trials as usize;
            let successes = cell.iter().filter(|&&(ok, _)| ok).count();
            nonconverged += cell.iter().filter(|&&(_, nc)| nc).count();
            csv.push_row([
                cfg.d.to_string(),
                cfg.sampling.name().to_string(),
                s.to_string(),
                m.to_string(),
                cfg.trials.to_string(),
                successes.to_string(),
                fmt_f64(successes as f64 / cfg.trials as f64),
            ]);
        }
    }

    csv.write(&cfg.out)?;
    Ok(Outcome {
        solves: results.len(),
        nonconverged,
    })
}
