//! Weighted operator norms and the increment curves of the integrated
//! interaction-picture potential.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{SymbolSpec, C64};

use super::carleson::IntervalGrid;
use super::variation::{IncrementCurve, IncrementNorm};

const POWER_TOL: f64 = 1e-10;
const POWER_ITERS: usize = 1000;

/// Largest singular value of `D M D^{-1}` with `D = diag((1+|j|)^α)`, rows and
/// columns indexed by centered modes `j = i - (dim-1)/2`.
pub fn weighted_opnorm(matrix: &DMatrix<C64>, alpha: f64) -> Result<f64> {
    let b = conjugate_by_weights(matrix, &sobolev_weights(matrix.nrows(), alpha));
    power_norm(&b)
}

/// `(1+|j|)^α` on centered indices.
pub fn sobolev_weights(dim: usize, alpha: f64) -> Vec<f64> {
    let c = ((dim.max(1) - 1) / 2) as i64;
    (0..dim)
        .map(|i| (1.0 + (i as i64 - c).abs() as f64).powf(alpha))
        .collect()
}

/// `Λ^μ` weights `(2+|n|)^μ` on the band `[-n, n]`.
pub fn lambda_weights(band: usize, mu: f64) -> Vec<f64> {
    (0..=2 * band)
        .map(|i| (2.0 + (i as i64 - band as i64).abs() as f64).powf(mu))
        .collect()
}

fn conjugate_by_weights(m: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        m[(r, c)] * (w[r.min(w.len() - 1)] / w[c.min(w.len() - 1)])
    })
}

/// Power iteration on `B*B`; the Rayleigh quotient `‖Bv‖²` is the estimate.
pub fn power_norm(b: &DMatrix<C64>) -> Result<f64> {
    let n = b.ncols();
    if n == 0 {
        return Ok(0.0);
    }
    let mut r = crate::rng::stream(0x5eed, 0);
    let mut v = DVector::<C64>::from_fn(n, |_, _| {
        C64::new(1.0 + 0.25 * r.gen_range(-1.0..1.0), 0.25 * r.gen_range(-1.0..1.0))
    });
    v /= C64::from(v.norm());
    let mut last = 0.0f64;
    for it in 0..POWER_ITERS {
        let bv = b * &v;
        let est = bv.norm_squared();
        let x = b.adjoint() * bv;
        let xn = x.norm();
        if xn == 0.0 {
            return Ok(0.0);
        }
        if it > 0 && (est - last).abs() <= POWER_TOL * est {
            return Ok(est.sqrt());
        }
        last = est;
        v = x / C64::from(xn);
    }
    Err(Error::NotConverged {
        last: last.sqrt(),
        iterations: POWER_ITERS,
    })
}

fn static_symbol(spec: &SymbolSpec) -> Result<()> {
    if spec.is_static() {
        Ok(())
    } else {
        Err(Error::domain("integrated interaction matrices need a time-independent symbol"))
    }
}

/// `∫_{t0}^{t1} Ṽ(τ) dτ` restricted to the band, as a dense matrix.
pub fn integrated_interaction(
    pot: &PotentialModel,
    spec: &SymbolSpec,
    k: f64,
    band: usize,
    t0: f64,
    t1: f64,
) -> Result<DMatrix<C64>> {
    static_symbol(spec)?;
    let dim = 2 * band + 1;
    let b = band as i64;
    let l = pot.l_max as i64;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for row in -b..=b {
        for col in (row - l).max(-b)..=(row + l).min(b) {
            let omega = k * (spec.multiplier(row, 0.0) - spec.multiplier(col, 0.0));
            m[((row + b) as usize, (col + b) as usize)] =
                pot.integrate_mode(row - col, omega, t0, t1);
        }
    }
    Ok(m)
}

/// Hilbert–Schmidt norm of `[Λ^μ, ∫_{t_i}^{t_j} Ṽ] Λ^{-μ}` on the band.
pub fn commutator_increment(
    pot: &PotentialModel,
    spec: &SymbolSpec,
    mu: f64,
    k: f64,
    band: usize,
    t_i: f64,
    t_j: f64,
) -> Result<f64> {
    if !(mu > 0.5 && mu <= 1.0) {
        return Err(Error::domain(format!("μ = {mu} outside (1/2, 1]")));
    }
    let m = integrated_interaction(pot, spec, k, band, t_i, t_j)?;
    let w = lambda_weights(band, mu);
    let mut acc = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let f = (w[r] - w[c]) / w[c];
            acc += (m[(r, c)] * f).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// Increment curve `d(i,j) = ‖Λ^μ (∫_{t_i}^{t_j} Ṽ) Λ^{-μ}‖_{ℓ²→ℓ²}` on the grid.
pub fn build_v2_curve(
    pot: &PotentialModel,
    spec: &SymbolSpec,
    k: f64,
    mu: f64,
    band: usize,
    grid: &IntervalGrid,
) -> Result<IncrementCurve> {
    static_symbol(spec)?;
    let w = lambda_weights(band, mu);
    let pts = grid.points();
    // prefix[i] = ∫_{t_0}^{t_i}, conjugated by Λ^μ
    let mut prefix = Vec::with_capacity(pts.len());
    let dim = 2 * band + 1;
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    prefix.push(acc.clone());
    for win in pts.windows(2) {
        let cell = integrated_interaction(pot, spec, k, band, win[0], win[1])?;
        acc += conjugate_by_weights(&cell, &w);
        prefix.push(acc.clone());
    }
    let n = pts.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let diff = &prefix[j] - &prefix[i];
            let v = match power_norm(&diff) {
                Ok(v) => v,
                Err(_) => diff.singular_values().iter().fold(0.0f64, |m, &x| m.max(x)),
            };
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    IncrementCurve::dense(pts.to_vec(), d, IncrementNorm::Operator { mu })
}

/// Validated parameters `(p, p', s₀, μ, α)` of the complex-potential growth bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexVParams {
    pub p: f64,
    pub p_prime: f64,
    pub s0: f64,
    pub mu: f64,
    pub alpha: f64,
}

impl ComplexVParams {
    /// Derives `p' = p/(p-1)`, `s₀ = αp'/2` and `μ = 2/p'`.
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p > 4.0 / 3.0 && p < 2.0) {
            return Err(Error::domain(format!("p = {p} outside (4/3, 2)")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("α = {alpha} outside (0, 1)")));
        }
        if !(alpha * p < 2.0 * (p - 1.0)) {
            return Err(Error::domain(format!("αp = {} must be below 2(p-1)", alpha * p)));
        }
        let p_prime = p / (p - 1.0);
        let mu = 2.0 / p_prime;
        Ok(ComplexVParams {
            p,
            p_prime,
            s0: alpha * p_prime / 2.0,
            mu,
            alpha,
        })
    }
}
