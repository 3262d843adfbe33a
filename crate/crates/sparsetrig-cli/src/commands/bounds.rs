//! `bound-table`: the planner's truncation radii, sparsity levels, and
//! sample counts tabulated next to the closed-form complexity shapes they
//! are supposed to track, over the (spec × ε × p) cross product.

use sparsetrig::{
    plan_parameters_with_config, plan_truncation_with_cap, ClassSpec, ClassVariant, PlanConfig,
};

use crate::commands::Outcome;
use crate::config::BoundTableConfig;
use crate::error::{from_lib, Result};
use crate::output::{fmt_f64, CsvDoc};

const COLUMNS: &[&str] = &[
    "spec",
    "d",
    "p",
    "epsilon",
    "trunc_radius",
    "trunc_projection_bound",
    "trunc_log_cardinality",
    "logn_bound",
    "eps_tilde",
    "s",
    "plan_radius",
    "plan_log_cardinality",
    "m",
    "eta",
    "plan_projection_bound",
    "closed_form_m",
];

/// The complexity shape each class's sample count is expected to track
/// (constant 1; the table is for shape comparison, not constant hunting).
fn closed_form_m(spec: &ClassSpec, eps: f64, p: f64) -> f64 {
    let d = spec.dimension as f64;
    let le = (1.0 / eps).max(std::f64::consts::E).ln();
    match &spec.variant {
        ClassVariant::LogClass => d * eps.powi(-3) * le.powi(3),
        ClassVariant::MixedSobolev { .. } => d * d * d.max(2.0).ln() * eps.powf(-p) * le.powi(4),
        ClassVariant::Hoelder { .. } => {
            d * d * d.max(2.0).ln().powi(2) * eps.powf(-p) * le.powi(4)
        }
        // Validation refuses wiener-ball specs before any row is computed.
        ClassVariant::WienerBall => f64::NAN,
    }
}

pub fn run(cfg: &BoundTableConfig, hash: &str) -> Result<Outcome> {
    let mut csv = CsvDoc::new("bound-table", hash, &[], COLUMNS);
    for spec in &cfg.specs {
        for &eps in &cfg.epsilons {
            for &p in &cfg.ps {
                let trunc = plan_truncation_with_cap(spec, eps, cfg.radius_cap).map_err(from_lib)?;
                let plan = plan_parameters_with_config(
                    spec,
                    eps,
                    p,
                    cfg.gamma,
                    cfg.c_universal,
                    &PlanConfig {
                        radius_cap: cfg.radius_cap,
                        ..PlanConfig::default()
                    },
                )
                .map_err(from_lib)?;
                let logn_bound = match spec.variant {
                    ClassVariant::LogClass => {
                        fmt_f64(2.0 * spec.dimension as f64 / eps)
                    }
                    _ => String::new(),
                };
                csv.push_row([
                    spec.kind_name().to_string(),
                    spec.dimension.to_string(),
                    fmt_f64(p),
                    fmt_f64(eps),
                    trunc.m.to_string(),
                    fmt_f64(trunc.projection_error_bound),
                    fmt_f64(trunc.log_cardinality),
                    logn_bound,
                    plan.eps_tilde.map(fmt_f64).unwrap_or_default(),
                    plan.s.to_string(),
                    plan.lambda
                        .cube_radius()
                        .map(|r| r.to_string())
                        .unwrap_or_default(),
                    fmt_f64(plan.lambda.log_cardinality()),
                    plan.m.to_string(),
                    plan.eta.map(fmt_f64).unwrap_or_default(),
                    plan.class_projection_bound.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(closed_form_m(spec, eps, p)),
                ]);
            }
        }
    }
    csv.write(&cfg.out)?;
    Ok(Outcome::none())
}
