//! Randomized checks of two elementary inequalities.
//!
//! * For `v = v₁ + v₂` with `v₁ ⊥ v₂`, `a ⊥ v₂` and `‖v₁‖² + ‖v₂‖² = ‖a‖²`:
//!   `‖v - a‖ ≤ 2 (|‖a‖² - ⟨v₁, a⟩|)^{1/2}`.
//! * The product bound in `H^{1/2}(𝕋)`:
//!   `‖fg‖_{H^{1/2}} ≤ C (‖f‖_∞‖g‖_{H^{1/2}} + ‖g‖_∞‖f‖_{H^{1/2}})`, with the
//!   empirical `C` reported.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::{C64, ZERO};

pub const OTRIV_SLACK: f64 = 1e-9;

fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `(‖v₁ + v₂ - a‖, 2|‖a‖² - ⟨v₁, a⟩|^{1/2})`.
pub fn otriv_sides(v1: &[C64], v2: &[C64], a: &[C64]) -> (f64, f64) {
    let diff: Vec<C64> = (0..a.len()).map(|i| v1[i] + v2[i] - a[i]).collect();
    let lhs = norm(&diff);
    let rhs = 2.0 * (norm(a).powi(2) - inner(v1, a)).norm().sqrt();
    (lhs, rhs)
}

/// Largest deviation from the three hypotheses, relative to `‖a‖²`.
pub fn otriv_hypothesis_defect(v1: &[C64], v2: &[C64], a: &[C64]) -> f64 {
    let a2 = norm(a).powi(2).max(f64::MIN_POSITIVE);
    let d1 = inner(v1, v2).norm();
    let d2 = inner(a, v2).norm();
    let d3 = (norm(v1).powi(2) + norm(v2).powi(2) - norm(a).powi(2)).abs();
    d1.max(d2).max(d3) / a2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtrivReport {
    pub trials: usize,
    /// `max LHS/RHS` over trials with `RHS > 0`.
    pub max_ratio: f64,
    /// `max (LHS - RHS)`; must stay below the slack.
    pub max_excess: f64,
    pub max_hypothesis_defect: f64,
}

fn gaussian(r: &mut rng::Rng, d: usize) -> Vec<C64> {
    (0..d)
        .map(|_| C64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
        .collect()
}

/// Removes the component of `x` along `dir` (unit or zero).
fn remove(x: &mut [C64], dir: &[C64]) {
    let p = inner(x, dir);
    for (xi, di) in x.iter_mut().zip(dir) {
        *xi -= p * di;
    }
}

fn unit(x: &[C64]) -> Vec<C64> {
    let n = norm(x);
    if n == 0.0 {
        x.to_vec()
    } else {
        x.iter().map(|c| c / n).collect()
    }
}

/// One triple satisfying the hypotheses, built by orthogonalization.
pub fn sample_triple(r: &mut rng::Rng, dim_max: usize) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
    let d = r.gen_range(2..=dim_max.max(2));
    let scale = r.gen_range(-3.0f64..3.0).exp();
    let a: Vec<C64> = gaussian(r, d).into_iter().map(|c| c * scale).collect();
    let a_hat = unit(&a);
    let a2 = norm(&a).powi(2);

    let mut w2 = gaussian(r, d);
    remove(&mut w2, &a_hat);
    let v2_hat = unit(&w2);

    // Mix in configurations near the equality cases.
    let mode = r.gen_range(0..4);
    let mut w1 = match mode {
        0 => gaussian(r, d),
        _ => {
            let eps = 10f64.powf(r.gen_range(-8.0..0.0));
            a_hat
                .iter()
                .zip(gaussian(r, d))
                .map(|(x, g)| x + g * eps)
                .collect()
        }
    };
    remove(&mut w1, &v2_hat);
    let v1_hat = unit(&w1);

    let s: f64 = match r.gen_range(0..5) {
        0 => 1.0,
        1 => 0.0,
        _ => r.gen(),
    };
    let v1 = v1_hat.iter().map(|c| c * (s * a2).sqrt()).collect();
    let v2 = v2_hat.iter().map(|c| c * ((1.0 - s) * a2).sqrt()).collect();
    (v1, v2, a)
}

/// Checks the vector inequality on `trials` random triples of dimension
/// `2..=dim_max`. A violation beyond [`OTRIV_SLACK`] fails with the witness.
pub fn fuzz_otriv(trials: usize, dim_max: usize, seed: u64) -> Result<OtrivReport> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let mut r = rng::stream(seed, 51);
    let mut rep = OtrivReport {
        trials,
        max_ratio: 0.0,
        max_excess: f64::NEG_INFINITY,
        max_hypothesis_defect: 0.0,
    };
    for trial in 0..trials {
        let (v1, v2, a) = sample_triple(&mut r, dim_max);
        let (lhs, rhs) = otriv_sides(&v1, &v2, &a);
        rep.max_hypothesis_defect = rep
            .max_hypothesis_defect
            .max(otriv_hypothesis_defect(&v1, &v2, &a));
        rep.max_excess = rep.max_excess.max(lhs - rhs);
        if rhs > 0.0 {
            rep.max_ratio = rep.max_ratio.max(lhs / rhs);
        }
        if lhs > rhs + OTRIV_SLACK {
            return Err(Error::Assertion {
                criterion: "otriv".into(),
                detail: format!(
                    "trial {trial}: ‖v-a‖ = {lhs} > {rhs}; v1 = {v1:?}, v2 = {v2:?}, a = {a:?}"
                ),
            });
        }
    }
    Ok(rep)
}

/// Trigonometric polynomial `Σ_{|n| ≤ deg} c_n e^{inx}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub deg: usize,
    pub coeffs: Vec<C64>,
}

impl TrigPoly {
    pub fn new(deg: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * deg + 1 {
            return Err(Error::domain("trigonometric polynomial needs 2·deg + 1 coefficients"));
        }
        Ok(TrigPoly { deg, coeffs })
    }

    /// `(Σ (1+|n|)|c_n|²)^{1/2}`.
    pub fn h_half(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + (i as f64 - self.deg as f64).abs()) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let deg = self.deg + other.deg;
        let mut c = vec![ZERO; 2 * deg + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        TrigPoly { deg, coeffs: c }
    }

    /// Max of `|p|` on `m` equispaced points (`m > 2·deg`); a lower bound of the sup.
    pub fn grid_sup(&self, m: usize, planner: &mut FftPlanner<f64>) -> f64 {
        let mut buf = vec![ZERO; m];
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = i as i64 - self.deg as i64;
            buf[n.rem_euclid(m as i64) as usize] += c;
        }
        planner.plan_fft_inverse(m).process(&mut buf);
        buf.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `‖fg‖_{H^{1/2}} / (‖f‖_∞‖g‖_{H^{1/2}} + ‖g‖_∞‖f‖_{H^{1/2}})`, sup norms on
/// a grid oversampled 16 times.
pub fn krein_ratio(f: &TrigPoly, g: &TrigPoly, planner: &mut FftPlanner<f64>) -> f64 {
    let m = (16 * (2 * f.deg.max(g.deg) + 1)).next_power_of_two();
    let num = f.mul(g).h_half();
    let den = f.grid_sup(m, planner) * g.h_half() + g.grid_sup(m, planner) * f.h_half();
    num / den
}

fn random_poly(r: &mut rng::Rng, max_deg: usize) -> TrigPoly {
    let deg = r.gen_range(0..=max_deg);
    let decay = r.gen_range(0.0..2.0);
    let coeffs = (0..2 * deg + 1)
        .map(|i| {
            let n = (i as f64 - deg as f64).abs();
            let g = C64::new(r.sample(StandardNormal), r.sample(StandardNormal));
            g * (1.0 + n).powf(-decay)
        })
        .collect();
    TrigPoly { deg, coeffs }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KreinReport {
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Max product ratio over `trials` random pairs of degree `≤ max_deg`.
///
/// Trial `i` always uses stream `i`, so a run with more trials extends a
/// shorter one with the same seed.
pub fn fuzz_krein(trials: usize, max_deg: usize, seed: u64) -> KreinReport {
    let mut planner = FftPlanner::new();
    let mut max_ratio = 0.0f64;
    let mut sum = 0.0;
    for i in 0..trials {
        let mut r = rng::stream(seed, 1000 + i as u64);
        let f = random_poly(&mut r, max_deg);
        let g = random_poly(&mut r, max_deg);
        let q = krein_ratio(&f, &g, &mut planner);
        if q.is_finite() {
            max_ratio = max_ratio.max(q);
            sum += q;
        }
    }
    KreinReport {
        trials,
        max_ratio,
        mean_ratio: sum / trials.max(1) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(d: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; d];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn otriv_examples() {
        let a = vec![C64::new(0.3, 1.0), C64::new(-2.0, 0.5)];
        let (l, r) = otriv_sides(&a, &[ZERO, ZERO], &a);
        assert!(l < 1e-15 && r < 1e-7);
        let (l, r) = otriv_sides(&[ZERO; 2], &e(2, 1), &e(2, 0));
        assert!((l - 2f64.sqrt()).abs() < 1e-15 && (r - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_triples_satisfy_hypotheses() {
        let mut r = rng::stream(5, 0);
        for _ in 0..1000 {
            let (v1, v2, a) = sample_triple(&mut r, 16);
            assert!(otriv_hypothesis_defect(&v1, &v2, &a) < 1e-12);
        }
    }

    #[test]
    fn small_fuzz_run_passes() {
        let rep = fuzz_otriv(2000, 8, 1).unwrap();
        assert!(rep.max_ratio <= 1.0 && rep.max_ratio > 0.5, "{rep:?}");
    }

    #[test]
    fn krein_examples() {
        let mut p = FftPlanner::new();
        let one = TrigPoly::new(0, vec![C64::new(1.0, 0.0)]).unwrap();
        assert!((krein_ratio(&one, &one, &mut p) - 0.5).abs() < 1e-14);
        let ex = TrigPoly::new(1, vec![ZERO, ZERO, C64::new(1.0, 0.0)]).unwrap();
        let want = 3f64.sqrt() / (2.0 * 2f64.sqrt());
        assert!((krein_ratio(&ex, &ex, &mut p) - want).abs() < 1e-14);
    }

    #[test]
    fn krein_runs_extend() {
        let a = fuzz_krein(50, 8, 3);
        let b = fuzz_krein(100, 8, 3);
        assert!(b.max_ratio >= a.max_ratio);
        assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
    }
}
