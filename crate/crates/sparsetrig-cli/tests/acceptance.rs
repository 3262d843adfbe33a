//! Acceptance suite: the eight end-to-end guarantees this workspace makes,
//! each as one test that prints a single PASS line. Tests share a gate so
//! the timed criteria measure their own work, not scheduler contention.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use sparsetrig::{
    calibrate_c_universal, certificate_gap, curse_demo, draw_uniform, evaluate,
    measurement_matrix, plan_truncation, random_member, recover, sigma_s, solve_bpdn,
    solve_bpdn_with_config, worst_case_l1ball_error, BpdnProblem, ClassSpec, IndexSet,
    LinearAlgorithmMatrix, PlanConfig, SolverConfig, SolverStatus,
};

static GATE: Mutex<()> = Mutex::new(());

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|p| p.into_inner())
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random s-sparse unit-l2 vector on n slots: distinct support, equal
/// moduli, uniform phases.
fn planted(n: usize, s: usize, seed: u64) -> DVector<Complex64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let support = rand::seq::index::sample(&mut rng, n, s);
    let mut x = DVector::from_element(n, c64(0.0, 0.0));
    let amp = 1.0 / (s as f64).sqrt();
    for j in support {
        let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        x[j] = Complex64::from_polar(amp, phase);
    }
    x
}

/// Noise with exactly the requested l2 norm (unit moduli, uniform phases).
fn noise(m: usize, norm: f64, seed: u64) -> DVector<Complex64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let scale = norm / (m as f64).sqrt();
    DVector::from_fn(m, |_, _| {
        Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * rng.random::<f64>())
    })
}

fn l1_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

#[test]
fn acceptance_1_exact_sparse_recovery() {
    let _g = gate();
    let start = Instant::now();
    let lambda = IndexSet::cube(2, 2).unwrap();
    assert_eq!(lambda.len(), 25);
    let config = SolverConfig {
        max_iter: 3_000,
        ..SolverConfig::default()
    };

    let hits: usize = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let x_star = planted(25, 3, 1_000 + t);
            let nodes = draw_uniform(2, 60, 2_000 + t).unwrap();
            let g = measurement_matrix(&lambda, &nodes).unwrap();
            let y = &g * &x_star;
            let problem = BpdnProblem::new(g, y.iter().copied().collect(), 0.0).unwrap();
            let res = solve_bpdn_with_config(&problem, &config).unwrap();
            let err = res
                .x
                .iter()
                .zip(x_star.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            usize::from(err <= 1e-6)
        })
        .sum();

    let elapsed = start.elapsed().as_secs_f64();
    assert!(hits >= 95, "only {hits}/100 trials reached 1e-6");
    assert!(elapsed <= 60.0, "took {elapsed:.1}s, budget is 60s");
    println!("ACCEPTANCE 1: PASS — exact recovery in {hits}/100 trials, {elapsed:.1}s");
}

#[test]
fn acceptance_2_noisy_recovery_bound() {
    let _g = gate();
    let lambda = IndexSet::cube(2, 2).unwrap();
    let m = 60usize;
    let eta = 0.5;
    let bound = 10.0 * eta / (m as f64).sqrt();

    let hits: usize = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let x_star = planted(25, 3, 10_000 + t);
            let nodes = draw_uniform(2, m, 20_000 + t).unwrap();
            let g = measurement_matrix(&lambda, &nodes).unwrap();
            let y = &g * &x_star + noise(m, eta, 30_000 + t);
            let problem = BpdnProblem::new(g, y.iter().copied().collect(), eta).unwrap();
            let res = solve_bpdn(&problem).unwrap();
            assert_ne!(res.status, SolverStatus::InfeasibleDetected);
            let err = res
                .x
                .iter()
                .zip(x_star.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            usize::from(err <= bound)
        })
        .sum();

    assert!(hits >= 95, "only {hits}/100 trials within 10·eta/sqrt(m)");
    println!("ACCEPTANCE 2: PASS — noisy recovery within bound in {hits}/100 trials");
}

#[test]
fn acceptance_3_end_to_end_with_calibrated_constant() {
    let _g = gate();
    let spec = ClassSpec::log_class(2);
    let lambda = IndexSet::cube(2, 3).unwrap();
    let gamma = (-1.0f64).exp();
    let config = PlanConfig::default();

    let calibration = calibrate_c_universal(
        &spec, &lambda, 8, 2.0, gamma, 20, 12, 6, 0xca11, &config,
    )
    .unwrap();
    let plan = &calibration.plan;

    let trials = 50u64;
    let needed = ((1.0 - gamma) * trials as f64).ceil() as usize;
    let successes: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f_seed = 0xbeef_0000 + t;
            let f = random_member(&spec, 12, 6, f_seed).unwrap();
            let report = recover(&f, plan, f_seed ^ 0xa5a5_a5a5).unwrap();
            usize::from(report.lp_error <= report.rhs_bound)
        })
        .sum();

    assert!(
        successes >= needed,
        "only {successes}/{trials} fresh trials within the bound (need {needed}) at c = {}",
        calibration.c_universal
    );
    println!(
        "ACCEPTANCE 3: PASS — c = {} gives {successes}/{trials} fresh successes (need {needed})",
        calibration.c_universal
    );
}

#[test]
fn acceptance_4_linear_lower_bound_exact() {
    let _g = gate();
    let start = Instant::now();
    let floor_rank12 = (13.0f64 / 25.0).sqrt();
    let floor_half = std::f64::consts::FRAC_1_SQRT_2;

    // The natural least-squares reconstruction map.
    let report = curse_demo(2, 12, 4).unwrap();
    assert!(report.linear_worst_case >= floor_rank12 - 1e-9);
    assert!(report.linear_worst_case >= floor_half - 1e-9);

    // Random rank-12 maps.
    for trial in 0..25u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(40_000 + trial);
        let b = DMatrix::from_fn(25, 12, |_, _| {
            c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let c = DMatrix::from_fn(12, 25, |_, _| {
            c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let map = LinearAlgorithmMatrix::new(&b * &c, 12).unwrap();
        let (worst, _) = worst_case_l1ball_error(&map);
        assert!(
            worst >= floor_rank12 - 1e-9,
            "trial {trial}: worst case {worst} below sqrt(13/25)"
        );
        assert!(
            worst >= floor_half - 1e-9,
            "trial {trial}: worst case {worst} below 1/sqrt(2)"
        );
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 1.0, "took {elapsed:.2}s, budget is 1s");
    println!("ACCEPTANCE 4: PASS — 26 rank-12 maps all above both floors, {elapsed:.2}s");
}

#[test]
fn acceptance_5_nonlinear_beats_linear() {
    let _g = gate();
    let report = curse_demo(2, 12, 4).unwrap();
    assert_eq!(report.bpdn_samples, 40);
    assert_eq!(report.bpdn_status, SolverStatus::Converged);
    assert!(
        report.linear_worst_case >= 0.72,
        "linear worst case {} below 0.72",
        report.linear_worst_case
    );
    assert!(
        report.bpdn_error <= 1e-6,
        "witness recovery error {} above 1e-6",
        report.bpdn_error
    );
    println!(
        "ACCEPTANCE 5: PASS — linear worst case {:.4} vs l1 error {:.1e} from 40 samples",
        report.linear_worst_case, report.bpdn_error
    );
}

#[test]
fn acceptance_6_formula_cross_checks() {
    let _g = gate();

    // Window-size bound of the truncation planner on the log class.
    for &d in &[1usize, 2, 4, 8] {
        let spec = ClassSpec::log_class(d);
        for &eps in &[0.2f64, 0.5, 0.9] {
            let trunc = plan_truncation(&spec, eps).unwrap();
            let bound = 2.0 * d as f64 / eps;
            assert!(
                trunc.log_cardinality <= bound,
                "d={d} eps={eps}: log cardinality {} exceeds {bound}",
                trunc.log_cardinality
            );
        }
    }

    let spec = ClassSpec::log_class(2);
    for t in 0..50u64 {
        let f = random_member(&spec, 12, 6, 50_000 + t).unwrap();

        // Best-s-term partition: head (sorted oracle) + sigma_s = total.
        let total = f.wiener_norm();
        let mut moduli: Vec<f64> = f.terms().map(|(_, v)| v.norm()).collect();
        moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for s in [0usize, 1, 5, f.support_size()] {
            let head: f64 = moduli.iter().take(s).sum();
            let tail = sigma_s(&f, s);
            assert!(
                (head + tail - total).abs() <= 1e-12 * total.max(1.0),
                "partition identity failed at s={s}"
            );
        }

        // Parseval vs Monte Carlo: mean of |f(x)|^2 over uniform points
        // estimates the exact squared l2 norm.
        let exact_sq = f.l2_norm().powi(2);
        let nodes = draw_uniform(2, 4096, 60_000 + t).unwrap();
        let values = evaluate(&f, &nodes).unwrap();
        let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
        let n = sq.len() as f64;
        let mean = sq.iter().sum::<f64>() / n;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - exact_sq).abs() <= 3.0 * se,
            "function {t}: MC mean {mean} vs Parseval {exact_sq} beyond 3 SE ({se})"
        );
    }

    println!("ACCEPTANCE 6: PASS — truncation bound, partition identity, and quadrature agree");
}

/// Projects moduli onto the simplex of radius t, preserving phases: the
/// Euclidean projection onto the complex l1 ball.
fn project_l1_ball(x: &mut DVector<Complex64>, t: f64) {
    if t <= 0.0 {
        x.fill(c64(0.0, 0.0));
        return;
    }
    let l1: f64 = x.iter().map(|v| v.norm()).sum();
    if l1 <= t {
        return;
    }
    let mut u: Vec<f64> = x.iter().map(|v| v.norm()).collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let cand = (cum - t) / (j + 1) as f64;
        if uj > cand {
            theta = cand;
        } else {
            break;
        }
    }
    for v in x.iter_mut() {
        let m = v.norm();
        *v = if m <= theta {
            c64(0.0, 0.0)
        } else {
            *v * ((m - theta) / m)
        };
    }
}

/// min ‖Gx − y‖ over ‖x‖₁ ≤ t by accelerated projected gradient.
fn min_residual_at_radius(
    g: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
    t: f64,
    lips: f64,
) -> f64 {
    let n = g.ncols();
    let step = Complex64::new(1.0 / lips, 0.0);
    let mut x = DVector::from_element(n, c64(0.0, 0.0));
    let mut z = x.clone();
    let mut theta = 1.0f64;
    for _ in 0..4_000 {
        let grad = g.adjoint() * (g * &z - y);
        let mut xn = &z - grad * step;
        project_l1_ball(&mut xn, t);
        let theta_n = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_n;
        z = &xn + (&xn - &x) * Complex64::new(beta, 0.0);
        x = xn;
        theta = theta_n;
    }
    (g * &x - y).norm()
}

/// The exact optimal value of min ‖x‖₁ s.t. ‖Gx − y‖ ≤ η, found by bisecting
/// the l1-ball radius against the constrained least-squares residual.
fn oracle_optimal_l1(g: &DMatrix<Complex64>, y: &DVector<Complex64>, eta: f64) -> f64 {
    let svd = g.clone().svd(true, true);
    let lips = svd.singular_values[0].powi(2) * 1.000001;
    let x_ls = svd.solve(y, 1e-12).unwrap();
    let mut lo = 0.0f64;
    let mut hi: f64 = x_ls.iter().map(|v| v.norm()).sum::<f64>() + 1e-9;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if min_residual_at_radius(g, y, mid, lips) <= eta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn acceptance_7_solver_certificates() {
    let _g = gate();

    // Battery of noisy problems across shapes: every converged run must
    // re-certify from its returned point alone, and be feasible.
    let shapes: [(usize, u64, usize); 3] = [(1, 3, 12), (2, 1, 18), (2, 2, 35)];
    let mut converged = 0usize;
    for (shape_idx, &(d, radius, m)) in shapes.iter().enumerate() {
        let lambda = IndexSet::cube(d, radius).unwrap();
        for t in 0..10u64 {
            let seed = 70_000 + shape_idx as u64 * 100 + t;
            let x0 = planted(lambda.len(), 3.min(lambda.len()), seed);
            let nodes = draw_uniform(d, m, seed ^ 0x5a5a).unwrap();
            let g = measurement_matrix(&lambda, &nodes).unwrap();
            let eta = 0.2;
            let y = &g * &x0 + noise(m, eta, seed ^ 0x11);
            let problem = BpdnProblem::new(g.clone(), y.iter().copied().collect(), eta).unwrap();
            let res = solve_bpdn(&problem).unwrap();
            if res.status != SolverStatus::Converged {
                continue;
            }
            converged += 1;
            let gap = certificate_gap(&problem, &res.x).unwrap();
            let l1 = l1_norm(&res.x);
            assert!(
                gap <= 1e-8 * l1.max(1.0),
                "re-certified gap {gap} exceeds 1e-8 tolerance"
            );
            let xv = DVector::from_column_slice(&res.x);
            let rnorm = (&g * &xv - &y).norm();
            assert!(
                rnorm <= eta + 1e-9 * y.norm().max(1.0),
                "returned point infeasible: residual {rnorm} vs eta {eta}"
            );
        }
    }
    assert!(converged >= 28, "only {converged}/30 battery runs converged");

    // Brute-force equivalence on tiny instances: the solver's l1 value must
    // match an independent radius-bisection oracle.
    let mut checked = 0usize;
    for n in 2..=6usize {
        for rep in 0..2u64 {
            let seed = 80_000 + n as u64 * 10 + rep;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let g = DMatrix::from_fn(8, n, |_, _| {
                c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let x0 = planted(n, 2.min(n), seed ^ 0x77);
            let y = &g * &x0 + noise(8, 0.05, seed ^ 0x99);
            let eta = 0.3 * y.norm();
            let problem = BpdnProblem::new(g.clone(), y.iter().copied().collect(), eta).unwrap();
            let res = solve_bpdn(&problem).unwrap();
            assert_eq!(res.status, SolverStatus::Converged);
            let oracle = oracle_optimal_l1(&g, &y, eta);
            let diff = (res.l1_norm - oracle).abs();
            assert!(
                diff <= 1e-4 * oracle.max(1.0),
                "n={n} rep={rep}: solver l1 {} vs oracle {oracle}",
                res.l1_norm
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 10);

    println!(
        "ACCEPTANCE 7: PASS — {converged} converged runs re-certified, 10 oracle matches"
    );
}

fn workspace_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_once(subcommand: &str, config: &Path, out: &Path, extra: &[&str]) -> Vec<u8> {
    let output = Command::new(env!("CARGO_BIN_EXE_sparsetrig"))
        .arg(subcommand)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "{subcommand} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    std::fs::read(out).expect("output file exists")
}

#[test]
fn acceptance_8_byte_identical_reruns() {
    let _g = gate();
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &str, &[&str]); 4] = [
        ("recover", "recover_smoke.json", &[]),
        ("phase-transition", "phase_small.json", &["--allow-nonconverged"]),
        ("lower-bound", "lower_d2.json", &[]),
        ("bound-table", "bound_table.json", &[]),
    ];
    for (subcommand, config_name, extra) in cases {
        let config = workspace_config(config_name);
        let out_a = dir.path().join(format!("{subcommand}-a.csv"));
        let out_b = dir.path().join(format!("{subcommand}-b.csv"));
        let first = run_once(subcommand, &config, &out_a, extra);
        // Different thread count must not change a single byte.
        let mut extra_b = extra.to_vec();
        extra_b.extend_from_slice(&["--threads", "2"]);
        let second = run_once(subcommand, &config, &out_b, &extra_b);
        assert_eq!(
            first, second,
            "{subcommand}: rerun with identical config+seeds differs"
        );
    }
    println!("ACCEPTANCE 8: PASS — all four commands rerun byte-identically");
}
