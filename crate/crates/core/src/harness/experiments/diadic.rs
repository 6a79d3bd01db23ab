use serde_json::json;

use crate::error::Result;
use crate::harness::config::{DiadicExperiment, SweepConfig};
use crate::harness::report::{Cell, Check, ExperimentOutput, Table};
use crate::harness::sweep::k_sweep;
use crate::potential::{make_decaying, uniform_nodes};
use crate::transport::{diadic_row, BlockOptions, DiadicParams, PipelineOptions};

use super::{append_sweep_rows, sweep_header};

/// Diadic pipeline for a decaying potential scaled by each `λ`.
pub fn diadic_experiment(
    e: &DiadicExperiment,
    sweep: &SweepConfig,
    seed: u64,
) -> Result<ExperimentOutput> {
    let mut params = DiadicParams::new(e.gamma, vec![])?;
    params.a = sweep.a.max(params.a);
    let horizon = 2f64.powi(e.j_max as i32 + 1);
    let base = make_decaying(seed, e.l_max, e.gamma, 1.0, &uniform_nodes(0.0, horizon, horizon as usize))?;
    let opts = PipelineOptions {
        n_max: e.n_max,
        block: BlockOptions {
            tol: e.tol,
            observers: e.observers,
            ..BlockOptions::default()
        },
    };
    let names = ["sup_u_minus_g", "omega_sum", "in_omega", "flagged", "max_block_error"];
    let mut per_k: Option<Table> = None;
    let mut summary_rows = Table::new(
        "lambda_scan",
        &["lambda", "mean_sup_u_minus_g", "bad_measure", "completeness"],
    );
    let mut means = Vec::new();
    let mut complete = true;
    for &lambda in &e.lambda_list {
        let pot = base.scaled(lambda);
        let report = k_sweep(sweep, seed, &names, |k, _| {
            let r = diadic_row(&pot, &params, k, e.j_max, &opts)?;
            Ok(vec![
                r.sup_u_minus_g,
                r.omega_sum,
                if r.in_omega { 1.0 } else { 0.0 },
                if r.flagged_at.is_some() { 1.0 } else { 0.0 },
                r.block_errors.iter().copied().fold(0.0, f64::max),
            ])
        });
        complete &= report.completeness == 1.0;
        let table = per_k.get_or_insert_with(|| {
            Table::new("per_k", &sweep_header(&["lambda"], &report.names))
        });
        append_sweep_rows(table, &[Cell::from(lambda)], &report);
        let rows: Vec<_> = report.completed().collect();
        let n = rows.len().max(1) as f64;
        let mean = rows.iter().map(|r| r.values[0]).sum::<f64>() / n;
        let bad = rows.iter().filter(|r| r.values[2] == 0.0 || r.values[3] == 1.0).count();
        let bad_measure = 2.0 * sweep.a * bad as f64 / n;
        means.push(mean);
        summary_rows.push(vec![
            lambda.into(),
            mean.into(),
            bad_measure.into(),
            report.completeness.into(),
        ]);
    }
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    Ok(ExperimentOutput {
        experiment: "diadic".into(),
        tables: vec![summary_rows, per_k.unwrap_or_else(|| Table::new("per_k", &["k"]))],
        summary: json!({
            "a": sweep.a,
            "m": sweep.m,
            "params": params,
            "j_max": e.j_max,
            "lambda_list": e.lambda_list,
            "mean_sup_u_minus_g": means,
        }),
        checks: vec![
            Check::new("diadic.complete", complete, "every k node evaluated"),
            Check::new(
                "diadic.lambda_trend",
                decreasing,
                format!("mean sup‖u-G‖ along the λ list: {means:?}"),
            ),
        ],
    })
}
