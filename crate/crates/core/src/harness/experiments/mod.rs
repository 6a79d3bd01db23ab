//! One function per experiment; each returns tables, a JSON summary and the
//! outcome of its named checks.

mod basic;
mod diadic;
mod fuzz_appendix;
mod growth;
mod lemma22;
mod oscillatory;
mod theorem11;
mod variation;
mod wkb;

use crate::error::Result;

use super::config::{ExperimentConfig, RunConfig};
use super::report::{ExperimentOutput, Table};
use super::sweep::SweepReport;

pub use basic::{evolve_experiment, sweep_experiment};
pub use diadic::diadic_experiment;
pub use fuzz_appendix::fuzz_appendix_experiment;
pub use growth::growth_experiment;
pub use lemma22::lemma22_experiment;
pub use oscillatory::oscillatory_experiment;
pub use theorem11::theorem11_experiment;
pub use variation::variation_experiment;
pub use wkb::wkb_experiment;

/// Runs the configured experiment on the current rayon pool.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let sweep = cfg.sweep();
    let seed = cfg.seed;
    match &cfg.experiment {
        ExperimentConfig::Evolve(e) => evolve_experiment(e, seed),
        ExperimentConfig::Sweep(e) => sweep_experiment(e, &sweep, seed),
        ExperimentConfig::Theorem11(e) => theorem11_experiment(e, &sweep, seed),
        ExperimentConfig::Lemma22(e) => lemma22_experiment(e, &sweep, seed),
        ExperimentConfig::Growth(e) => growth_experiment(e, &sweep, seed),
        ExperimentConfig::Oscillatory(e) => oscillatory_experiment(e, &sweep, seed),
        ExperimentConfig::Wkb(e) => wkb_experiment(e, &sweep, seed),
        ExperimentConfig::Diadic(e) => diadic_experiment(e, &sweep, seed),
        ExperimentConfig::Variation(e) => variation_experiment(e, seed),
        ExperimentConfig::FuzzAppendix(e) => fuzz_appendix_experiment(e, seed),
    }
}

/// Per-k rows of a sweep, prefixed with fixed columns.
pub(crate) fn append_sweep_rows(
    table: &mut Table,
    prefix: &[super::report::Cell],
    report: &SweepReport,
) {
    for row in &report.rows {
        let mut cells = prefix.to_vec();
        cells.push(row.k.into());
        cells.extend(row.values.iter().map(|v| (*v).into()));
        cells.push(row.error.clone().unwrap_or_default().into());
        table.push(cells);
    }
}

pub(crate) fn sweep_header<'a>(prefix: &[&'a str], report_names: &'a [String]) -> Vec<&'a str> {
    let mut h: Vec<&str> = prefix.to_vec();
    h.push("k");
    h.extend(report_names.iter().map(|s| s.as_str()));
    h.push("error");
    h
}

/// Median of the finite entries.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    super::sweep::quantile(&v, 0.5)
}
