use serde_json::json;

use crate::error::{Error, Result};
use crate::harness::config::FuzzExperiment;
use crate::harness::fuzz::{fuzz_krein, fuzz_otriv};
use crate::harness::report::{Check, ExperimentOutput, Table};

pub fn fuzz_appendix_experiment(e: &FuzzExperiment, seed: u64) -> Result<ExperimentOutput> {
    let mut table = Table::new("fuzz", &["suite", "trials", "max_ratio", "extra"]);
    let otriv = match fuzz_otriv(e.otriv_trials, e.dim_max, seed) {
        Ok(rep) => {
            table.push(vec![
                "otriv".into(),
                rep.trials.into(),
                rep.max_ratio.into(),
                rep.max_excess.into(),
            ]);
            Check::new(
                "fuzz.otriv",
                true,
                format!("{} triples, max LHS/RHS {}", rep.trials, rep.max_ratio),
            )
        }
        Err(Error::Assertion { detail, .. }) => Check::new("fuzz.otriv", false, detail),
        Err(err) => return Err(err),
    };
    let base = fuzz_krein(e.krein_trials, e.krein_degree, seed);
    let doubled = fuzz_krein(2 * e.krein_trials, e.krein_degree, seed);
    for rep in [&base, &doubled] {
        table.push(vec![
            "krein".into(),
            rep.trials.into(),
            rep.max_ratio.into(),
            rep.mean_ratio.into(),
        ]);
    }
    let change = (doubled.max_ratio - base.max_ratio).abs() / base.max_ratio;
    let krein = Check::new(
        "fuzz.krein_stable",
        base.max_ratio.is_finite() && change <= e.krein_stability,
        format!(
            "max ratio {} at {} trials, {} at {}; change {change}",
            base.max_ratio, base.trials, doubled.max_ratio, doubled.trials
        ),
    );
    Ok(ExperimentOutput {
        experiment: "fuzz_appendix".into(),
        tables: vec![table],
        summary: json!({
            "krein_constant": doubled.max_ratio,
            "krein_relative_change": change,
        }),
        checks: vec![otriv, krein],
    })
}
