//! `lower-bound`: exact worst-case errors of rank-limited linear
//! reconstruction maps on the unit l1 coefficient ball, next to l1 recovery
//! of the extremal witness character.

use rayon::prelude::*;
use serde::Serialize;
use sparsetrig::{curse_demo_with_options, CurseDemoOptions, SeparationReport, SolverStatus};

use crate::commands::Outcome;
use crate::config::LowerConfig;
use crate::error::{from_lib, Result};
use crate::output::{fmt_f64, sidecar_path, status_str, write_json, CsvDoc, ARTIFACT_VERSION};

const COLUMNS: &[&str] = &[
    "d",
    "rank",
    "lambda_size",
    "numerical_rank",
    "gluskin_bound",
    "linear_worst_case",
    "meets_gluskin",
    "budget_above_threshold",
    "linf_lower_bound",
    "witness",
    "bpdn_samples",
    "bpdn_error",
    "bpdn_status",
    "seed",
];

#[derive(Serialize)]
struct Sidecar<'a> {
    artifact_version: &'static str,
    command: &'static str,
    config_sha256: &'a str,
    reports: &'a [SeparationReport],
}

pub fn run(cfg: &LowerConfig, hash: &str) -> Result<Outcome> {
    let opts = CurseDemoOptions {
        index_cap: cfg.index_cap,
        bpdn_samples: cfg.bpdn_samples,
        solver: cfg.solver,
    };
    let seeds: Vec<u64> = (0..cfg.ranks.len() as u64)
        .map(|i| cfg.base_seed.wrapping_add(i))
        .collect();

    let reports: Result<Vec<SeparationReport>> = cfg
        .ranks
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(&rank, &seed)| curse_demo_with_options(cfg.d, rank, seed, &opts).map_err(from_lib))
        .collect();
    let reports = reports?;

    let mut csv = CsvDoc::new("lower-bound", hash, &seeds, COLUMNS);
    let mut nonconverged = 0usize;
    for report in &reports {
        if report.bpdn_status != SolverStatus::Converged {
            nonconverged += 1;
        }
        let witness = report
            .witness
            .entries()
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(";");
        csv.push_row([
            report.d.to_string(),
            report.n_rank.to_string(),
            report.lambda_size.to_string(),
            report.numerical_rank.to_string(),
            report.gluskin.map(fmt_f64).unwrap_or_default(),
            fmt_f64(report.linear_worst_case),
            report
                .meets_gluskin
                .map(|b| b.to_string())
                .unwrap_or_default(),
            report.budget_above_threshold.to_string(),
            fmt_f64(report.linf_lower_bound),
            witness,
            report.bpdn_samples.to_string(),
            fmt_f64(report.bpdn_error),
            status_str(report.bpdn_status).to_string(),
            report.seed.to_string(),
        ]);
    }

    csv.write(&cfg.out)?;
    write_json(
        &sidecar_path(&cfg.out),
        &Sidecar {
            artifact_version: ARTIFACT_VERSION,
            command: "lower-bound",
            config_sha256: hash,
            reports: &reports,
        },
    )?;

    Ok(Outcome {
        solves: reports.len(),
        nonconverged,
    })
}
