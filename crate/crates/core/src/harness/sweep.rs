//! Parallel k-sweeps with midpoint aggregation.
//!
//! Tasks run on the current rayon pool. Results are collected in node order,
//! and each node draws from its own seed, so reports do not depend on the
//! number of threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng;

use super::config::SweepConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    /// One value per quantity; `NaN` when the node failed.
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub name: String,
    /// Midpoint estimate of `∫_{-A}^{A}`, rescaled from the completed nodes.
    pub integral: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub a: f64,
    pub m: usize,
    pub seed: u64,
    pub names: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub completeness: f64,
    pub aggregates: Vec<Aggregate>,
}

impl SweepReport {
    pub fn completed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_none())
    }

    /// Values of quantity `i` over completed rows, in k order.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.completed().map(|r| r.values[i]).collect()
    }

    pub fn aggregate(&self, name: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.name == name)
    }

    /// Recomputes the aggregates from the rows; used as a consistency check.
    pub fn recompute(&self) -> Vec<Aggregate> {
        aggregates(self.a, &self.names, &self.rows)
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn aggregates(a: f64, names: &[String], rows: &[SweepRow]) -> Vec<Aggregate> {
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.error.is_none())
                .map(|r| r.values[i])
                .collect();
            let integral = if v.is_empty() {
                f64::NAN
            } else {
                2.0 * a * v.iter().sum::<f64>() / v.len() as f64
            };
            v.sort_by(f64::total_cmp);
            Aggregate {
                name: name.clone(),
                integral,
                q10: quantile(&v, 0.1),
                q50: quantile(&v, 0.5),
                q90: quantile(&v, 0.9),
                max: v.last().copied().unwrap_or(f64::NAN),
            }
        })
        .collect()
}

/// Evaluates `f(k, node_seed)` at every midpoint node.
///
/// A failing node is kept as a flagged row; aggregates use completed rows only.
pub fn k_sweep<F>(cfg: &SweepConfig, seed: u64, names: &[&str], f: F) -> SweepReport
where
    F: Fn(f64, u64) -> Result<Vec<f64>> + Sync,
{
    let nodes = cfg.nodes();
    let rows: Vec<SweepRow> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &k)| match f(k, rng::child_seed(seed, i as u64)) {
            Ok(values) => SweepRow {
                k,
                values,
                error: None,
            },
            Err(e) => SweepRow {
                k,
                values: vec![f64::NAN; names.len()],
                error: Some(e.to_string()),
            },
        })
        .collect();
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let done = rows.iter().filter(|r| r.error.is_none()).count();
    SweepReport {
        a: cfg.a,
        m: cfg.m,
        seed,
        aggregates: aggregates(cfg.a, &names, &rows),
        completeness: done as f64 / rows.len().max(1) as f64,
        names,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::harness::fit::log_log;

    #[test]
    fn constant_and_quadratic_integrals() {
        let r = k_sweep(&SweepConfig::new(2.0, 64), 0, &["one"], |_, _| Ok(vec![1.0]));
        assert!((r.aggregates[0].integral - 4.0).abs() < 1e-14);
        let r = k_sweep(&SweepConfig::new(1.0, 100), 0, &["k2"], |k, _| Ok(vec![k * k]));
        assert!((r.aggregates[0].integral - 2.0 / 3.0).abs() < 1e-3);
        assert_eq!(r.recompute(), r.aggregates);
    }

    #[test]
    fn midpoint_error_is_second_order() {
        let exact = 2.0 / 5.0 + 2.0 / 3.0;
        let (mut ms, mut errs) = (Vec::new(), Vec::new());
        for m in [8usize, 16, 32, 64, 128] {
            let r = k_sweep(&SweepConfig::new(1.0, m), 0, &["p"], |k, _| {
                Ok(vec![k.powi(4) + k * k + k])
            });
            ms.push(m as f64);
            errs.push((r.aggregates[0].integral - exact).abs());
        }
        let slope = -log_log(&ms, &errs).slope;
        assert!((slope - 2.0).abs() < 0.3, "{slope}");
    }

    #[test]
    fn failures_are_flagged() {
        let r = k_sweep(&SweepConfig::new(1.0, 10), 0, &["x"], |k, _| {
            if k > 0.6 {
                Err(Error::Domain("boom".into()))
            } else {
                Ok(vec![2.0])
            }
        });
        assert!((r.completeness - 0.8).abs() < 1e-15);
        assert!(r.rows.iter().filter(|r| r.error.is_some()).all(|r| r.values[0].is_nan()));
        assert!((r.aggregates[0].integral - 4.0).abs() < 1e-14);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.1) - 1.4).abs() < 1e-15);
    }
}
