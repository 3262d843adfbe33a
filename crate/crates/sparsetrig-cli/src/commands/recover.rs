//! `recover`: plan at each accuracy target, draw random class members, run
//! the full sampling-recovery pipeline, and emit one CSV row per trial plus
//! a JSON sidecar with plans, warnings, and wall times.

use rayon::prelude::*;
use serde::Serialize;
use sparsetrig::{
    plan_parameters_with_config, random_member, recover, PlanConfig, RecoveryPlan, SolverStatus,
    SolverSummary,
};

use crate::commands::Outcome;
use crate::config::RecoverConfig;
use crate::error::{from_lib, Result};
use crate::output::{fmt_f64, sidecar_path, status_str, write_json, CsvDoc, ARTIFACT_VERSION};

const COLUMNS: &[&str] = &[
    "spec",
    "d",
    "p",
    "epsilon",
    "s",
    "lambda_cardinality",
    "m",
    "lp_error",
    "rhs_bound",
    "seed",
    "solver_status",
    "wall_ms",
];

/// Per-trial record for the sidecar; the recovered coefficients themselves
/// stay out (the CSV is the contract, the sidecar is the context).
#[derive(Serialize)]
struct TrialRecord {
    epsilon: f64,
    seed: u64,
    lp_error: f64,
    lp_standard_error: Option<f64>,
    rhs_bound: f64,
    eta_used: f64,
    eta_source: &'static str,
    sigma_s_value: f64,
    tail_norm: f64,
    wall_time: f64,
    solver: SolverSummary,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    artifact_version: &'static str,
    command: &'static str,
    config_sha256: &'a str,
    plans: Vec<RecoveryPlan>,
    trials: Vec<TrialRecord>,
}

pub fn run(cfg: &RecoverConfig, hash: &str) -> Result<Outcome> {
    let plan_config = PlanConfig {
        eta_mode: cfg.eta_mode,
        solver: cfg.solver,
        ..PlanConfig::default()
    };
    let mut plans = Vec::with_capacity(cfg.epsilons.len());
    for &eps in &cfg.epsilons {
        plans.push(
            plan_parameters_with_config(
                &cfg.spec,
                eps,
                cfg.p,
                cfg.gamma,
                cfg.c_universal,
                &plan_config,
            )
            .map_err(from_lib)?,
        );
    }

    let trials = cfg.trials as u64;
    let jobs: Vec<(usize, u64)> = (0..cfg.epsilons.len())
        .flat_map(|eps_idx| {
            (0..trials).map(move |t| {
                (
                    eps_idx,
                    cfg.base_seed.wrapping_add(eps_idx as u64 * trials + t),
                )
            })
        })
        .collect();
    let seeds: Vec<u64> = jobs.iter().map(|&(_, seed)| seed).collect();

    let results: Result<Vec<_>> = jobs
        .par_iter()
        .map(|&(eps_idx, seed)| {
            let f = random_member(&cfg.spec, cfg.support_budget, cfg.max_freq, seed)
                .map_err(from_lib)?;
            // Distinct stream for the sample nodes.
            let report = recover(&f, &plans[eps_idx], seed ^ 0xa5a5_a5a5).map_err(from_lib)?;
            Ok((eps_idx, seed, report))
        })
        .collect();
    let results = results?;

    let mut csv = CsvDoc::new("recover", hash, &seeds, COLUMNS);
    let mut trials_out = Vec::with_capacity(results.len());
    let mut nonconverged = 0usize;
    for (eps_idx, seed, report) in &results {
        let plan = &plans[*eps_idx];
        if report.solver.status != SolverStatus::Converged {
            nonconverged += 1;
        }
        csv.push_row([
            cfg.spec.kind_name().to_string(),
            cfg.spec.dimension.to_string(),
            fmt_f64(cfg.p),
            fmt_f64(cfg.epsilons[*eps_idx]),
            plan.s.to_string(),
            plan.lambda.cardinality().to_string(),
            plan.m.to_string(),
            fmt_f64(report.lp_error),
            fmt_f64(report.rhs_bound),
            seed.to_string(),
            status_str(report.solver.status).to_string(),
            // Deliberately blank: reruns must be byte-identical, and wall
            // time is the one nondeterministic column. It lives in the
            // sidecar instead.
            String::new(),
        ]);
        trials_out.push(TrialRecord {
            epsilon: cfg.epsilons[*eps_idx],
            seed: *seed,
            lp_error: report.lp_error,
            lp_standard_error: report.lp_standard_error,
            rhs_bound: report.rhs_bound,
            eta_used: report.eta_used,
            eta_source: report.eta_source,
            sigma_s_value: report.sigma_s_value,
            tail_norm: report.tail_norm,
            wall_time: report.wall_time,
            solver: report.solver.clone(),
            warnings: report.warnings.clone(),
        });
    }

    csv.write(&cfg.out)?;
    write_json(
        &sidecar_path(&cfg.out),
        &Sidecar {
            artifact_version: ARTIFACT_VERSION,
            command: "recover",
            config_sha256: hash,
            plans,
            trials: trials_out,
        },
    )?;

    Ok(Outcome {
        solves: results.len(),
        nonconverged,
    })
}
