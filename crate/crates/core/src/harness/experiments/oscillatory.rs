use serde_json::json;

use crate::error::Result;
use crate::harness::config::{OscillatoryExperiment, SweepConfig};
use crate::harness::report::{Cell, Check, ExperimentOutput, Table};
use crate::harness::sweep::k_sweep;
use crate::potential::{make_oscillatory, uniform_nodes, OscillatoryQSpec};
use crate::transport::zero_mode_deviation;

use super::{append_sweep_rows, sweep_header};

/// `∫ sup_t |1-û₀|² dk` for amplitudes `λ`, `2λ` and each start time.
pub fn oscillatory_experiment(
    e: &OscillatoryExperiment,
    sweep: &SweepConfig,
    seed: u64,
) -> Result<ExperimentOutput> {
    let names = ["sup_zero_sq", "sup_l2_sq"];
    let mut per_k: Option<Table> = None;
    let mut agg = Table::new(
        "aggregates",
        &["t_start", "lambda", "int_sup_zero_sq", "int_sup_l2_sq", "max_sup_zero", "completeness"],
    );
    // results[start][0 = λ, 1 = 2λ] = (zero, l2, max sup|1-û₀|)
    let mut results = Vec::new();
    for &t_start in &e.t_starts {
        let t_end = e.horizon_factor * t_start;
        let mut pair = Vec::new();
        for lambda in [e.lambda, 2.0 * e.lambda] {
            let spec = OscillatoryQSpec::random(
                seed,
                e.l_max,
                e.gamma,
                lambda,
                t_start,
                uniform_nodes(t_start, t_end, e.cells),
            )?;
            let pot = make_oscillatory(&spec)?;
            let report = k_sweep(sweep, seed, &names, |k, _| {
                let d = zero_mode_deviation(&pot, t_start, k, t_end, e.n_max, e.tol)?;
                Ok(vec![d.sup_zero * d.sup_zero, d.sup_l2 * d.sup_l2])
            });
            let table = per_k.get_or_insert_with(|| {
                Table::new("per_k", &sweep_header(&["t_start", "lambda"], &report.names))
            });
            append_sweep_rows(table, &[Cell::from(t_start), Cell::from(lambda)], &report);
            let (z, l2) = (report.aggregates[0].integral, report.aggregates[1].integral);
            let max_zero = report.aggregates[0].max.sqrt();
            agg.push(vec![
                t_start.into(),
                lambda.into(),
                z.into(),
                l2.into(),
                max_zero.into(),
                report.completeness.into(),
            ]);
            pair.push((z, l2, max_zero, report.completeness));
        }
        results.push(pair);
    }
    let first = &results[0];
    let zero_ratio = first[1].0 / first[0].0;
    let l2_ratio = first[1].1 / first[0].1;
    let max_dev = results
        .iter()
        .flatten()
        .map(|r| r.2)
        .fold(0.0f64, f64::max);
    let complete = results.iter().flatten().all(|r| r.3 == 1.0);
    let decreasing = results.windows(2).all(|w| w[1][0].0 < w[0][0].0);
    let [lo, hi] = e.ratio_band;
    let checks = vec![
        Check::new("oscillatory.complete", complete, "every k node evaluated"),
        Check::new(
            "oscillatory.small_amplitude",
            max_dev < 0.1,
            format!("max sup|1-û₀| = {max_dev}"),
        ),
        Check::new(
            "oscillatory.lambda_ratio",
            (lo..=hi).contains(&zero_ratio),
            format!(
                "∫sup|1-û₀|² ratio (2λ vs λ) = {zero_ratio}, band [{lo}, {hi}]; \
                 ∫sup‖1-u‖² ratio = {l2_ratio}"
            ),
        ),
        Check::new(
            "oscillatory.start_decrease",
            decreasing,
            format!(
                "∫sup|1-û₀|² at λ per start time: {:?}",
                results.iter().map(|r| r[0].0).collect::<Vec<_>>()
            ),
        ),
    ];
    Ok(ExperimentOutput {
        experiment: "oscillatory".into(),
        tables: vec![agg, per_k.unwrap_or_else(|| Table::new("per_k", &["k"]))],
        summary: json!({
            "a": sweep.a,
            "m": sweep.m,
            "gamma": e.gamma,
            "lambda": e.lambda,
            "t_starts": e.t_starts,
            "horizon_factor": e.horizon_factor,
            "zero_mode_ratio": zero_ratio,
            "l2_ratio": l2_ratio,
        }),
        checks,
    })
}
