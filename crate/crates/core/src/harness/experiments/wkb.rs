use serde_json::json;

use crate::error::Result;
use crate::harness::config::{SweepConfig, WkbExperiment};
use crate::harness::fit::log_log;
use crate::harness::report::{Cell, Check, ExperimentOutput, Table};
use crate::harness::sweep::k_sweep;
use crate::potential::{make_decaying, uniform_nodes};
use crate::transport::{unit_initial, wkb_compare, BlockOptions, DiadicParams};

use super::{append_sweep_rows, median, sweep_header};

/// Block comparison on `[T, 2T]` from `u⁰ = 1` for each `T`, with a decaying
/// random potential whose nodes are spaced one unit apart.
pub fn wkb_experiment(e: &WkbExperiment, sweep: &SweepConfig, seed: u64) -> Result<ExperimentOutput> {
    let mut params = DiadicParams::new(e.gamma, e.t_list.clone())?;
    params.a = sweep.a.max(params.a);
    let t0 = e.t_list[0];
    let t1 = 2.0 * e.t_list.last().expect("validated");
    let cells = (t1 - t0).round() as usize;
    let pot = make_decaying(seed, e.l_max, e.gamma, e.c, &uniform_nodes(t0, t1, cells))?;
    let opts = BlockOptions {
        tol: e.tol,
        observers: e.observers,
        ..BlockOptions::default()
    };
    let mut per_k: Option<Table> = None;
    let mut blocks = Table::new(
        "blocks",
        &["T", "median_sup_error", "max_sup_error", "median_v1_sup", "v1_const", "completeness"],
    );
    let mut medians = Vec::new();
    let mut complete = true;
    for &t in &e.t_list {
        let report = k_sweep(sweep, seed, &["sup_error", "v1_sup"], |k, _| {
            let c = wkb_compare(&pot, &params, t, k, &unit_initial(e.n_max), &opts)?;
            Ok(vec![c.sup_error, c.v1_sup])
        });
        complete &= report.completeness == 1.0;
        let table = per_k
            .get_or_insert_with(|| Table::new("per_k", &sweep_header(&["T"], &report.names)));
        append_sweep_rows(table, &[Cell::from(t)], &report);
        let med = median(&report.column(0));
        let v1 = median(&report.column(1));
        medians.push(med);
        blocks.push(vec![
            t.into(),
            med.into(),
            report.aggregates[0].max.into(),
            v1.into(),
            (v1 / t.powf(params.alpha_exp - 1.0)).into(),
            report.completeness.into(),
        ]);
    }
    let monotone = medians.windows(2).all(|w| w[1] < w[0]);
    let end_ratio = medians.last().unwrap() / medians[0];
    let fit = log_log(&e.t_list, &medians);
    Ok(ExperimentOutput {
        experiment: "wkb".into(),
        tables: vec![blocks, per_k.unwrap_or_else(|| Table::new("per_k", &["k"]))],
        summary: json!({
            "a": sweep.a,
            "m": sweep.m,
            "params": params,
            "n_max": e.n_max,
            "medians": medians,
            "end_ratio": end_ratio,
            "slope": fit,
            "reference_slope": -(1.0 - e.gamma),
        }),
        checks: vec![
            Check::new("wkb.complete", complete, "every (T, k) block evaluated"),
            Check::new(
                "wkb.decreasing",
                monotone && end_ratio <= e.max_end_ratio,
                format!("medians {medians:?}, end/start = {end_ratio} (limit {})", e.max_end_ratio),
            ),
        ],
    })
}
