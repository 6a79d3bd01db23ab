//! Block-wise comparison of the gaps evolution with its transport approximation.
//!
//! On a block `[T, 2T]` the modes `|n| ≤ ⌊T^α⌋` of the gaps multiplier are
//! frozen to the transport speed `n/T`; the difference is the diagonal
//! correction `V₁`. The frozen equation is evolved numerically and compared
//! with `ν(x,t)·u⁰(x + κ(t-T)/T)`.
//!
//! Sign note: the gaps multiplier acts on `e^{inx}` as `+n/(t+1)`, while the
//! transport equations are written with `i∂ₓ`, which acts as `-n`. All
//! comparisons therefore run the transport solutions with coupling `κ = -k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::propagator::{evolve, EvolveConfig};
use crate::spectral::{FourierState, Picture, SymbolSpec};

use super::characteristics::{modulated_translate, sup_norm, transport_spectrum, Speed};

/// Exponents and ranges for the diadic experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiadicParams {
    pub gamma: f64,
    /// Fourier cutoff exponent: low modes are `|n| ≤ ⌊T^α⌋`.
    pub alpha_exp: f64,
    pub delta_exp: f64,
    pub beta_exp: f64,
    /// `k ∈ [-A, A]`.
    pub a: f64,
    pub t_list: Vec<f64>,
}

impl DiadicParams {
    /// Defaults `α = 11(1-γ)`, `δ = 6(1-γ)`, `β = 1.5(1-γ)`, `A = 2`.
    pub fn new(gamma: f64, t_list: Vec<f64>) -> Result<Self> {
        let g = 1.0 - gamma;
        let p = DiadicParams {
            gamma,
            alpha_exp: 11.0 * g,
            delta_exp: 6.0 * g,
            beta_exp: 1.5 * g,
            a: 2.0,
            t_list,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let g = 1.0 - self.gamma;
        let fail = |m: String| Err(Error::domain(m));
        if !(self.gamma >= 83.0 / 87.0 && self.gamma < 1.0) {
            return fail(format!("gamma {} outside [83/87, 1)", self.gamma));
        }
        if !(self.alpha_exp < 0.5) {
            return fail(format!("cutoff exponent {} must be below 1/2", self.alpha_exp));
        }
        if !(self.delta_exp < self.alpha_exp) {
            return fail(format!(
                "delta {} must be below the cutoff exponent {}",
                self.delta_exp, self.alpha_exp
            ));
        }
        if !(self.alpha_exp > self.delta_exp + 4.0 * g) {
            return fail(format!(
                "cutoff exponent {} must exceed delta + 4(1-gamma) = {}",
                self.alpha_exp,
                self.delta_exp + 4.0 * g
            ));
        }
        if !(self.beta_exp > 0.0) {
            return fail("beta must be positive".into());
        }
        if !(self.a > 1.0) {
            return fail(format!("k-range half-width {} must exceed 1", self.a));
        }
        for &t in &self.t_list {
            if !(t >= 1.0) || t.log2().fract() != 0.0 {
                return fail(format!("block start {t} is not a power of two"));
            }
        }
        Ok(())
    }
}

/// `⌊T^α⌋`.
pub fn block_cutoff(t_block: f64, alpha_exp: f64) -> u64 {
    // guard against 2^{jα} landing a hair below an integer
    (t_block.powf(alpha_exp) + 1e-12).floor() as u64
}

/// Diagonal correction `V₁` at mode `n` and time `t ∈ [T, 2T]`:
/// `k(n²/(t+1)² + n/(t+1) - n/T)` on `|n| ≤ ⌊T^α⌋`, zero above.
pub fn gaps_rhs_correction(t_block: f64, alpha_exp: f64, t: f64, n: i64, k: f64) -> Result<f64> {
    if !(t_block > 0.0) || !(t >= t_block && t <= 2.0 * t_block) {
        return Err(Error::domain(format!("time {t} outside the block [{t_block}, {}]", 2.0 * t_block)));
    }
    if n.unsigned_abs() > block_cutoff(t_block, alpha_exp) {
        return Ok(0.0);
    }
    let (nf, s) = (n as f64, t + 1.0);
    Ok(k * (nf * nf / (s * s) + nf / s - nf / t_block))
}

/// `sup_{t ∈ [T,2T], |n| ≤ n_max} |V₁(n, t)|`.
///
/// For fixed `n` the correction is monotone on the block except at `t + 1 = 2|n|`
/// (negative `n`), so endpoints and that point suffice.
pub fn v1_sup(t_block: f64, alpha_exp: f64, k: f64, n_max: usize) -> f64 {
    let cutoff = block_cutoff(t_block, alpha_exp).min(n_max as u64) as i64;
    let mut best = 0.0f64;
    for n in -cutoff..=cutoff {
        let mut ts = vec![t_block, 2.0 * t_block];
        let crit = 2.0 * n.unsigned_abs() as f64 - 1.0;
        if crit > t_block && crit < 2.0 * t_block {
            ts.push(crit);
        }
        for t in ts {
            let v = gaps_rhs_correction(t_block, alpha_exp, t, n, k).unwrap_or(0.0);
            best = best.max(v.abs());
        }
    }
    best
}

/// Slack for the initial-data hypothesis `‖u⁰‖_∞ ≤ 1`, `‖u⁰‖_{H^{1/2}} ≤ C T^{1.5(1-γ)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetarCheck {
    /// Allowed excess of the sup norm over 1.
    pub sup_slack: f64,
    /// The constant `C`.
    pub h_half_const: f64,
}

impl Default for BetarCheck {
    fn default() -> Self {
        BetarCheck {
            sup_slack: 0.25,
            h_half_const: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetarReport {
    pub sup_norm: f64,
    pub h_half: f64,
    pub h_half_bound: f64,
}

impl BetarCheck {
    pub fn measure(&self, u0: &FourierState, t_block: f64, gamma: f64) -> BetarReport {
        let h_half = crate::spectral::sobolev_norm(u0, crate::spectral::SobolevIndex::new(0.5));
        BetarReport {
            sup_norm: sup_norm(u0),
            h_half,
            h_half_bound: self.h_half_const * t_block.powf(1.5 * (1.0 - gamma)),
        }
    }

    pub fn verify(&self, u0: &FourierState, t_block: f64, gamma: f64) -> Result<BetarReport> {
        let r = self.measure(u0, t_block, gamma);
        if r.sup_norm > 1.0 + self.sup_slack {
            return Err(Error::Hypothesis(format!(
                "initial sup norm {} exceeds 1 + {} at T = {t_block}",
                r.sup_norm, self.sup_slack
            )));
        }
        if r.h_half > r.h_half_bound {
            return Err(Error::Hypothesis(format!(
                "initial H^1/2 norm {} exceeds {} at T = {t_block}",
                r.h_half, r.h_half_bound
            )));
        }
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockOptions {
    pub tol: f64,
    /// Equispaced comparison times in `(T, 2T]`.
    pub observers: usize,
    #[serde(default)]
    pub betar: BetarCheck,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions {
            tol: 1e-9,
            observers: 16,
            betar: BetarCheck::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WkbComparison {
    pub t_block: f64,
    pub k: f64,
    /// `(t, ‖u(t) - ν(t)u⁰(· + κ(t-T)/T)‖)` at the observer times.
    pub errors: Vec<(f64, f64)>,
    pub sup_error: f64,
    /// State of the frozen equation at `2T`, lab picture.
    pub end_state: FourierState,
    pub v1_sup: f64,
    pub betar: BetarReport,
}

/// Evolves the frozen block equation on `[T, 2T]` from `u0` and measures its
/// distance to the transport approximation.
pub fn wkb_compare(
    pot: &PotentialModel,
    params: &DiadicParams,
    t_block: f64,
    k: f64,
    u0: &FourierState,
    opts: &BlockOptions,
) -> Result<WkbComparison> {
    params.validate()?;
    if opts.observers == 0 {
        return Err(Error::domain("need at least one observer time"));
    }
    let betar = opts.betar.verify(u0, t_block, params.gamma)?;
    let n_max = u0.n_max();
    let spec = SymbolSpec::block_gaps(t_block, block_cutoff(t_block, params.alpha_exp))?;
    let times: Vec<f64> = (1..=opts.observers)
        .map(|i| t_block + t_block * i as f64 / opts.observers as f64)
        .collect();
    let cfg = EvolveConfig::new(k, t_block, 2.0 * t_block)
        .with_tol(opts.tol)
        .with_observers(times.clone());
    let start = u0.clone().with_picture(Picture::Lab).with_time(t_block);
    let traj = evolve(&start, &spec, pot, &cfg)?;
    let kappa = -k;
    let speed = Speed::Frozen {
        start: t_block,
        scale: t_block,
    };
    let mut errors = Vec::with_capacity(times.len());
    for (&t, u) in times.iter().zip(&traj.states) {
        let nu = transport_spectrum(pot, kappa, speed, t)?;
        let approx = modulated_translate(&nu, &start, kappa * (t - t_block) / t_block)?;
        errors.push((t, approx.distance_sqr(u).sqrt()));
    }
    let sup_error = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(WkbComparison {
        t_block,
        k,
        errors,
        sup_error,
        end_state: traj.states.last().cloned().expect("observers are non-empty"),
        v1_sup: v1_sup(t_block, params.alpha_exp, k, n_max),
        betar,
    })
}

/// `u⁰ = 1` on the band.
pub fn unit_initial(n_max: usize) -> FourierState {
    FourierState::one(n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::C64;
    use crate::potential::{make_decaying, uniform_nodes};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn default_exponents_validate() {
        let p = DiadicParams::new(0.96, vec![64.0, 256.0]).unwrap();
        assert!((p.alpha_exp - 0.44).abs() < 1e-12);
        assert!(DiadicParams::new(0.9, vec![]).is_err());
        let mut bad = p.clone();
        bad.delta_exp = 0.43;
        assert!(bad.validate().is_err());
        bad = p.clone();
        bad.t_list = vec![48.0];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn correction_examples() {
        // |n| > T^α is projected away
        assert_eq!(gaps_rhs_correction(64.0, 0.44, 70.0, 7, 1.0).unwrap(), 0.0);
        let (t, n, k) = (64.0f64, 2i64, 1.5f64);
        let want = k * (2.0 * (1.0 / (t + 1.0) - 1.0 / t) + 4.0 / ((t + 1.0) * (t + 1.0)));
        assert!((gaps_rhs_correction(t, 0.44, t, n, k).unwrap() - want).abs() < 1e-16);
        assert!(gaps_rhs_correction(64.0, 0.44, 200.0, 1, 1.0).is_err());
    }

    #[test]
    fn correction_sup_matches_dense_scan() {
        for t_block in [16.0, 64.0, 256.0] {
            let k = -1.7;
            let s = v1_sup(t_block, 0.44, k, 128);
            let mut scan = 0.0f64;
            for i in 0..=4000 {
                let t = t_block * (1.0 + i as f64 / 4000.0);
                for n in -20i64..=20 {
                    scan = scan.max(gaps_rhs_correction(t_block, 0.44, t, n, k).unwrap().abs());
                }
            }
            assert!((s - scan).abs() <= 1e-9 * s, "{s} vs {scan}");
        }
    }

    #[test]
    fn zero_potential_leaves_constants_alone() {
        let p = DiadicParams::new(0.96, vec![16.0]).unwrap();
        let out = wkb_compare(
            &PotentialModel::zero(),
            &p,
            16.0,
            1.1,
            &unit_initial(16),
            &BlockOptions::default(),
        )
        .unwrap();
        assert!(out.sup_error < 1e-9, "{}", out.sup_error);
    }

    #[test]
    fn scalar_potential_phases_cancel() {
        let p = DiadicParams::new(0.96, vec![16.0]).unwrap();
        let pot = PotentialModel::scalar(vec![16.0, 24.0, 32.0], &[0.1, -0.2, 0.05]).unwrap();
        let out = wkb_compare(&pot, &p, 16.0, 0.6, &unit_initial(8), &BlockOptions::default()).unwrap();
        assert!(out.sup_error < 1e-8, "{}", out.sup_error);
    }

    #[test]
    fn low_mode_data_is_transported() {
        // u⁰ inside the frozen band and V = 0: the block flow is an exact translation.
        let p = DiadicParams::new(0.96, vec![64.0]).unwrap();
        let u0 = FourierState::from_modes(16, &[(0, re(0.9)), (1, C64::new(0.0, 0.3)), (-2, re(0.1))])
            .unwrap();
        let opts = BlockOptions {
            betar: BetarCheck {
                sup_slack: 0.5,
                h_half_const: 2.0,
            },
            ..BlockOptions::default()
        };
        let out = wkb_compare(&PotentialModel::zero(), &p, 64.0, 1.3, &u0, &opts).unwrap();
        assert!(out.sup_error < 1e-8, "{}", out.sup_error);
    }

    #[test]
    fn hypothesis_violation_is_reported() {
        let p = DiadicParams::new(0.96, vec![16.0]).unwrap();
        let u0 = FourierState::from_modes(8, &[(5, re(3.0))]).unwrap();
        let err = wkb_compare(&PotentialModel::zero(), &p, 16.0, 1.0, &u0, &BlockOptions::default());
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn decaying_potential_gives_small_errors() {
        let p = DiadicParams::new(0.96, vec![64.0]).unwrap();
        let pot = make_decaying(4, 3, 0.96, 1.0, &uniform_nodes(64.0, 128.0, 64)).unwrap();
        let out = wkb_compare(&pot, &p, 64.0, 0.9, &unit_initial(32), &BlockOptions::default()).unwrap();
        assert!(out.sup_error < 0.1, "{}", out.sup_error);
    }
}
