//! Chaining block comparisons across `[2^j, 2^{j+1}]` and comparing the full
//! gaps evolution with the logarithmic transport solution `G`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::propagator::{evolve, EvolveConfig};
use crate::spectral::{FourierState, SymbolSpec};

use super::characteristics::{transport_spectrum, Speed};
use super::wkb::{wkb_compare, BlockOptions, DiadicParams};

/// Largest supported block index.
pub const MAX_J: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfNormReport {
    /// `sup_t ‖G(·,t)‖_{H^{1/2}}` over the sampled times.
    pub sup_norm: f64,
    /// `sup_t Σ_{n≠0} (1+|n|)|Ĝ_n(t)|²`.
    pub sup_homogeneous_sqr: f64,
    /// `∫_0^T (1+t) Σ_l |V̂_l(t)|² dt`, i.e. the space integral with `dx/2π`.
    pub bound: f64,
    pub samples: usize,
}

const HALF_NORM_SAMPLES: usize = 64;

/// `∫_{t0}^{t1} (1+t) Σ_l |V̂_l(t)|² dt`; Simpson per profile cell is exact
/// because the integrand is a cubic there.
pub fn weighted_mean_square(pot: &PotentialModel, t0: f64, t1: f64) -> f64 {
    let f = |t: f64| (1.0 + t) * pot.coeffs_at(t).iter().map(|c| c.norm_sqr()).sum::<f64>();
    let mut acc = 0.0;
    let mut a = t0;
    for b in pot
        .breakpoints_in(t0, t1)
        .into_iter()
        .chain(std::iter::once(t1))
    {
        acc += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
        a = b;
    }
    acc
}

/// Both sides of the `H^{1/2}` bound for the logarithmic transport solution on `[0, T]`.
pub fn h_half_norm_of_transport(pot: &PotentialModel, k: f64, t_end: f64) -> Result<HalfNormReport> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::domain(format!("horizon {t_end} must be positive")));
    }
    let mut sup_norm = 0.0f64;
    let mut sup_hom = 0.0f64;
    for i in 1..=HALF_NORM_SAMPLES {
        let t = t_end * i as f64 / HALF_NORM_SAMPLES as f64;
        let s = transport_spectrum(pot, k, Speed::Logarithmic, t)?;
        sup_norm = sup_norm.max(s.h_half_sqr(false).sqrt());
        sup_hom = sup_hom.max(s.h_half_sqr(true));
    }
    Ok(HalfNormReport {
        sup_norm: sup_norm.max(1.0),
        sup_homogeneous_sqr: sup_hom,
        bound: weighted_mean_square(pot, 0.0, t_end),
        samples: HALF_NORM_SAMPLES,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineOptions {
    pub n_max: usize,
    #[serde(default)]
    pub block: BlockOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiadicRow {
    pub k: f64,
    /// Sup error of each chained block `[2^j, 2^{j+1}]`, up to the first failure.
    pub block_errors: Vec<f64>,
    /// Block start at which the initial-data hypothesis failed.
    pub flagged_at: Option<f64>,
    /// `Σ_j ‖ν(2^j)‖²_{Ḣ^{1/2}} / 2^{2jβ}` for the diadic-speed transport.
    pub omega_sum: f64,
    pub in_omega: bool,
    /// `sup_t ‖u(t) - G(t)‖` over the observer times of the full evolution.
    pub sup_u_minus_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiadicReport {
    pub rows: Vec<DiadicRow>,
    /// Fraction of `k` nodes outside `Ω_λ` or flagged, times `2A`.
    pub bad_measure: f64,
    pub mean_sup_u_minus_g: f64,
}

/// One `k` of the pipeline over the blocks `j = 0..=j_max`.
pub fn diadic_row(
    pot: &PotentialModel,
    params: &DiadicParams,
    k: f64,
    j_max: u32,
    opts: &PipelineOptions,
) -> Result<DiadicRow> {
    params.validate()?;
    if j_max > MAX_J {
        return Err(Error::domain(format!("j_max {j_max} exceeds {MAX_J}")));
    }
    let per_block = opts.block.observers.max(1);
    let kappa = -k;
    let horizon = 2f64.powi(j_max as i32 + 1);

    // Observer times: `per_block` points in (0, 1] and in each (2^j, 2^{j+1}].
    let mut times = Vec::new();
    let mut a = 0.0;
    while a < horizon {
        let b = if a == 0.0 { 1.0 } else { 2.0 * a };
        times.extend((1..=per_block).map(|i| a + (b - a) * i as f64 / per_block as f64));
        a = b;
    }
    let cfg = EvolveConfig::new(k, 0.0, horizon)
        .with_tol(opts.block.tol)
        .with_observers(times.clone());
    let traj = evolve(&FourierState::one(opts.n_max), &SymbolSpec::gaps(), pot, &cfg)?;
    let mut sup_u_minus_g = 0.0f64;
    for (&t, u) in times.iter().zip(&traj.states) {
        let g = transport_spectrum(pot, kappa, Speed::Logarithmic, t)?;
        sup_u_minus_g = sup_u_minus_g.max(g.distance_sqr(u).sqrt());
    }

    let mut omega_sum = 0.0;
    for j in 0..=j_max + 1 {
        let tj = 2f64.powi(j as i32);
        let nu = transport_spectrum(pot, kappa, Speed::Diadic, tj)?;
        omega_sum += nu.h_half_sqr(true) / tj.powf(2.0 * params.beta_exp);
    }

    let mut block_errors = Vec::new();
    let mut flagged_at = None;
    let mut u0 = traj.states[per_block - 1].clone();
    for j in 0..=j_max {
        let tj = 2f64.powi(j as i32);
        match wkb_compare(pot, params, tj, k, &u0, &opts.block) {
            Ok(cmp) => {
                block_errors.push(cmp.sup_error);
                u0 = cmp.end_state;
            }
            Err(Error::Hypothesis(_)) => {
                flagged_at = Some(tj);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(DiadicRow {
        k,
        block_errors,
        flagged_at,
        omega_sum,
        in_omega: omega_sum < 1.0,
        sup_u_minus_g,
    })
}

/// Sequential pipeline over a `k` grid; see [`diadic_row`].
pub fn diadic_pipeline(
    pot: &PotentialModel,
    params: &DiadicParams,
    k_grid: &[f64],
    j_max: u32,
    opts: &PipelineOptions,
) -> Result<DiadicReport> {
    let rows = k_grid
        .iter()
        .map(|&k| diadic_row(pot, params, k, j_max, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(rows, params.a))
}

pub fn summarize(rows: Vec<DiadicRow>, a: f64) -> DiadicReport {
    let m = rows.len().max(1) as f64;
    let bad = rows
        .iter()
        .filter(|r| !r.in_omega || r.flagged_at.is_some())
        .count() as f64;
    let mean = rows.iter().map(|r| r.sup_u_minus_g).sum::<f64>() / m;
    DiadicReport {
        rows,
        bad_measure: 2.0 * a * bad / m,
        mean_sup_u_minus_g: mean,
    }
}
