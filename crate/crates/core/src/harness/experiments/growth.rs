use serde_json::json;

use crate::error::Result;
use crate::estimators::ComplexVParams;
use crate::harness::config::{GrowthExperiment, SweepConfig};
use crate::harness::fit::log_log;
use crate::harness::report::{Check, ExperimentOutput, Table};
use crate::harness::sweep::k_sweep;
use crate::propagator::{evolve, EvolveConfig, Observable};
use crate::spectral::{FourierState, SymbolSpec};

use super::{append_sweep_rows, sweep_header};

/// Fits `θ` in `log(1 + sup_{[0,T]} ‖u‖_{H^α}) ~ T^θ` per k node.
pub fn growth_experiment(
    e: &GrowthExperiment,
    sweep: &SweepConfig,
    seed: u64,
) -> Result<ExperimentOutput> {
    let params = ComplexVParams::new(e.p, e.alpha)?;
    let pot = e.potential.build(seed)?;
    let spec = SymbolSpec::schrodinger();
    let t_max = *e.t_list.last().expect("validated");
    let mut names = vec!["theta".to_string()];
    names.extend(e.t_list.iter().map(|t| format!("log1p_h@{t}")));
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let report = k_sweep(sweep, seed, &name_refs, |k, _| {
        let cfg = EvolveConfig::new(k, 0.0, t_max)
            .with_tol(e.tol)
            .with_observers(e.t_list.clone())
            .with_observables(vec![Observable::Sobolev {
                alpha: e.alpha,
                homogeneous: false,
            }]);
        let tr = evolve(&FourierState::one(e.n_max), &spec, &pot, &cfg)?;
        let ys: Vec<f64> = tr.running_max.iter().map(|r| r[0].ln_1p()).collect();
        let theta = log_log(&e.t_list, &ys).slope;
        let mut out = vec![theta];
        out.extend(ys);
        Ok(out)
    });
    let mut table = Table::new("theta", &sweep_header(&[], &report.names));
    append_sweep_rows(&mut table, &[], &report);
    let thetas: Vec<f64> = report.rows.iter().map(|r| r.values[0]).collect();
    let good = thetas.iter().filter(|t| **t <= e.theta_max).count();
    let fraction = good as f64 / thetas.len().max(1) as f64;
    let q = &report.aggregates[0];
    Ok(ExperimentOutput {
        experiment: "growth".into(),
        tables: vec![table],
        summary: json!({
            "a": sweep.a,
            "m": sweep.m,
            "params": params,
            "t_list": e.t_list,
            "theta_q10": q.q10,
            "theta_q50": q.q50,
            "theta_q90": q.q90,
            "theta_max": q.max,
            "fraction_below": fraction,
            "completeness": report.completeness,
        }),
        checks: vec![Check::new(
            "growth.theta_bound",
            fraction >= e.min_fraction,
            format!(
                "{:.1}% of k nodes have θ ≤ {} (need {:.0}%)",
                100.0 * fraction,
                e.theta_max,
                100.0 * e.min_fraction
            ),
        )],
    })
}
