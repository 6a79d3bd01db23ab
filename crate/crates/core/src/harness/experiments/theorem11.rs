use serde_json::json;

use crate::error::Result;
use crate::estimators::{d1, d2, mean_square_integral};
use crate::harness::config::{SweepConfig, Theorem11Experiment};
use crate::harness::report::{Cell, Check, ExperimentOutput, Table};
use crate::harness::sweep::k_sweep;
use crate::propagator::{evolve, EvolveConfig, Observable};
use crate::rng;
use crate::spectral::{FourierState, SymbolSpec};

use super::{append_sweep_rows, sweep_header};

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `∫ sup_t ‖u‖²_{Ḣ^α} dk` against `D₁ + D₂`, and `∫ sup_t ‖u‖²_{Ḣ^1} dk`
/// against `1 + ∫∫ V²`, for an ensemble of potentials over a horizon ladder.
pub fn theorem11_experiment(
    e: &Theorem11Experiment,
    sweep: &SweepConfig,
    seed: u64,
) -> Result<ExperimentOutput> {
    let t_list = &e.t_list;
    let t_max = *t_list.last().expect("validated non-empty");
    let obs = vec![
        Observable::Sobolev {
            alpha: e.alpha,
            homogeneous: true,
        },
        Observable::Sobolev {
            alpha: 1.0,
            homogeneous: true,
        },
    ];
    let names: Vec<String> = t_list
        .iter()
        .flat_map(|t| [format!("hdot_alpha_sq@{t}"), format!("hdot_one_sq@{t}")])
        .collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let spec = SymbolSpec::schrodinger();
    let w = e.weight;

    let mut ratios = Table::new(
        "ratios",
        &["member", "T", "lhs", "d1", "d2", "ratio", "lhs_one", "open_rhs", "open_ratio"],
    );
    let mut sweep_table: Option<Table> = None;
    // ratio[member][j]
    let mut r_tab = vec![vec![0.0; t_list.len()]; e.ensemble];
    let mut completeness = 1.0f64;
    for m in 0..e.ensemble {
        let member_seed = rng::child_seed(seed, 1000 + m as u64);
        let pot = e.potential.build(member_seed)?;
        let report = k_sweep(sweep, member_seed, &name_refs, |k, _| {
            let cfg = EvolveConfig::new(k, 0.0, t_max)
                .with_tol(e.tol)
                .with_observers(t_list.clone())
                .with_observables(obs.clone());
            let tr = evolve(&FourierState::one(e.n_max), &spec, &pot, &cfg)?;
            Ok(tr
                .running_max
                .iter()
                .flat_map(|r| [r[0] * r[0], r[1] * r[1]])
                .collect())
        });
        completeness = completeness.min(report.completeness);
        let table = sweep_table
            .get_or_insert_with(|| Table::new("sweep", &sweep_header(&["member"], &report.names)));
        append_sweep_rows(table, &[Cell::from(m)], &report);
        for (j, &t) in t_list.iter().enumerate() {
            let lhs = report.aggregates[2 * j].integral;
            let lhs_one = report.aggregates[2 * j + 1].integral;
            let (a, b) = (d1(&pot, t)?, d2(&pot, t, &|s| w.eval(s))?);
            let open = 1.0 + mean_square_integral(&pot, t);
            r_tab[m][j] = ratio(lhs, a + b);
            ratios.push(vec![
                m.into(),
                t.into(),
                lhs.into(),
                a.into(),
                b.into(),
                r_tab[m][j].into(),
                lhs_one.into(),
                open.into(),
                (lhs_one / open).into(),
            ]);
        }
    }
    let max_at = |j: usize| r_tab.iter().map(|r| r[j]).fold(0.0f64, f64::max);
    let all_finite = r_tab.iter().flatten().all(|r| r.is_finite());
    let (first, last) = (max_at(0), max_at(t_list.len() - 1));
    let bounded = last <= e.growth_factor * first;
    let checks = vec![
        Check::new(
            "theorem11.ratios_finite",
            all_finite && completeness == 1.0,
            format!("completeness {completeness}"),
        ),
        Check::new(
            "theorem11.bounded_growth",
            all_finite && bounded,
            format!(
                "max ratio at T = {}: {last}; at T = {}: {first}; factor {}",
                t_max, t_list[0], e.growth_factor
            ),
        ),
    ];
    let max_ratios: Vec<f64> = (0..t_list.len()).map(max_at).collect();
    Ok(ExperimentOutput {
        experiment: "theorem11".into(),
        tables: vec![ratios, sweep_table.unwrap_or_else(|| Table::new("sweep", &["k"]))],
        summary: json!({
            "a": sweep.a,
            "m": sweep.m,
            "alpha": e.alpha,
            "t_list": t_list,
            "max_ratio_per_t": max_ratios,
            "weight": e.weight,
        }),
        checks,
    })
}
