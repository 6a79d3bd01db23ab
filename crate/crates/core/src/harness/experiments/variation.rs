use rand::Rng as _;
use serde_json::json;

use crate::error::Result;
use crate::estimators::variation::variation_norm_exhaustive;
use crate::estimators::{
    build_v2_curve, carleson_q, variation_norm, IncrementCurve, IncrementNorm, IntervalGrid,
};
use crate::harness::config::VariationExperiment;
use crate::harness::report::{Check, ExperimentOutput, Table};
use crate::potential::{make_random_bounded, uniform_nodes, PotentialModel};
use crate::rng;
use crate::spectral::{SymbolSpec, C64};

/// Relative roundoff allowed when comparing a refined grid against the coarse one.
const REFINEMENT_SLACK: f64 = 1e-12;

fn random_curve(r: &mut rng::Rng, points: usize, kind: usize) -> Result<IncrementCurve> {
    let times: Vec<f64> = (0..points).map(|i| i as f64).collect();
    match kind {
        0 => {
            let v = (0..points).map(|_| r.gen_range(-1.0..1.0)).collect();
            IncrementCurve::scalar(times, v)
        }
        1 => {
            let mut z = C64::new(0.0, 0.0);
            let v = (0..points)
                .map(|_| {
                    z += C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
                    z
                })
                .collect();
            IncrementCurve::planar(times, v)
        }
        _ => {
            let mut d = vec![vec![0.0; points]; points];
            for i in 0..points {
                for j in i + 1..points {
                    let x = r.gen_range(0.0..1.0);
                    d[i][j] = x;
                    d[j][i] = x;
                }
            }
            IncrementCurve::dense(times, d, IncrementNorm::HilbertSchmidt)
        }
    }
}

fn max_increment(c: &IncrementCurve) -> f64 {
    let n = c.len();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(c.d(i, j));
        }
    }
    m
}

/// Variation-norm and Carleson-estimator consistency checks on random data.
pub fn variation_experiment(e: &VariationExperiment, seed: u64) -> Result<ExperimentOutput> {
    let mut r = rng::stream(seed, 81);

    // Dynamic programme against enumeration on every small grid.
    let mut exact = Table::new("dp_vs_exhaustive", &["intervals", "kind", "beta", "trials", "mismatches"]);
    let mut mismatches = 0usize;
    for g in 1..=e.g_max {
        for kind in 0..3 {
            for &beta in &e.betas {
                let mut bad = 0;
                for _ in 0..e.trials.div_ceil(10).max(1) {
                    let c = random_curve(&mut r, g + 1, kind)?;
                    if variation_norm(&c, beta)?.norm != variation_norm_exhaustive(&c, beta) {
                        bad += 1;
                    }
                }
                mismatches += bad;
                exact.push(vec![
                    g.into(),
                    ["scalar", "planar", "dense"][kind].into(),
                    beta.into(),
                    e.trials.div_ceil(10).max(1).into(),
                    bad.into(),
                ]);
            }
        }
    }

    // Monotonicity in β and the single-increment lower bound.
    let mut curves = Table::new("beta_scan", &["trial", "beta", "norm", "max_increment"]);
    let mut monotone_fail = 0usize;
    let mut lower_fail = 0usize;
    for trial in 0..e.trials {
        let c = random_curve(&mut r, e.curve_grid + 1, trial % 3)?;
        let m = max_increment(&c);
        let mut prev = f64::INFINITY;
        for &beta in &e.betas {
            let v = variation_norm(&c, beta)?.norm;
            if v > prev * (1.0 + 1e-12) {
                monotone_fail += 1;
            }
            if v < m * (1.0 - 1e-12) {
                lower_fail += 1;
            }
            prev = v;
            curves.push(vec![trial.into(), beta.into(), v.into(), m.into()]);
        }
    }

    // Carleson: the circle traced by ∫ e^{2πit} has diameter 1/π.
    let one = C64::new(1.0, 0.0);
    let circle_pot = PotentialModel::stationary(1, &[(1, one)], false)?;
    let q_circle = carleson_q(&circle_pot, 1, 2.0 * std::f64::consts::PI, &IntervalGrid::uniform(0.0, 1.0, 4096)?);
    let circle_err = (q_circle - 1.0 / std::f64::consts::PI).abs();

    let mut refinement_fail = 0usize;
    let mut carleson = Table::new("carleson_refinement", &["profile", "l", "k", "q_coarse", "q_fine"]);
    for p in 0..e.carleson_profiles {
        let pot = make_random_bounded(rng::child_seed(seed, p as u64), 2, &uniform_nodes(0.0, 4.0, 8), 1.0)?;
        let l = r.gen_range(-2i64..=2);
        let k = r.gen_range(-4.0..4.0);
        let coarse = IntervalGrid::for_potential(&pot, 0.0, 4.0, 16)?;
        let fine = coarse.refined(4)?;
        let (qc, qf) = (carleson_q(&pot, l, k, &coarse), carleson_q(&pot, l, k, &fine));
        // fine prefix sums add more cells, so allow roundoff
        if qf < qc * (1.0 - REFINEMENT_SLACK) {
            refinement_fail += 1;
        }
        carleson.push(vec![p.into(), l.into(), k.into(), qc.into(), qf.into()]);
    }

    // The operator-norm increment curve of a small potential.
    let pot = make_random_bounded(seed, 2, &uniform_nodes(0.0, 2.0, 4), 1.0)?;
    let v2 = build_v2_curve(&pot, &SymbolSpec::schrodinger(), 0.7, 0.75, 6, &IntervalGrid::uniform(0.0, 2.0, 16)?)?;
    let v2_norms: Vec<f64> = e
        .betas
        .iter()
        .map(|&b| variation_norm(&v2, b).map(|v| v.norm))
        .collect::<Result<_>>()?;

    Ok(ExperimentOutput {
        experiment: "variation".into(),
        tables: vec![exact, curves, carleson],
        summary: json!({
            "mismatches": mismatches,
            "monotonicity_failures": monotone_fail,
            "lower_bound_failures": lower_fail,
            "circle_q": q_circle,
            "circle_error": circle_err,
            "refinement_failures": refinement_fail,
            "v2_curve_norms": v2_norms,
            "betas": e.betas,
        }),
        checks: vec![
            Check::new("variation.dp_exact", mismatches == 0, format!("{mismatches} mismatches")),
            Check::new(
                "variation.beta_monotone",
                monotone_fail == 0,
                format!("{monotone_fail} increases over {} curves", e.trials),
            ),
            Check::new(
                "variation.single_increment",
                lower_fail == 0,
                format!("{lower_fail} violations"),
            ),
            Check::new(
                "carleson.circle",
                circle_err <= 1e-6,
                format!("q = {q_circle}, error {circle_err:e}"),
            ),
            Check::new(
                "carleson.refinement",
                refinement_fail == 0,
                format!("{refinement_fail} of {} profiles decreased", e.carleson_profiles),
            ),
        ],
    })
}
