//! Increment curves on a time grid and their `V^β` variation norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::C64;

use super::carleson::MAX_GRID;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IncrementNorm {
    /// `ℓ²` operator norm of `Λ^μ (·) Λ^{-μ}`.
    Operator { mu: f64 },
    HilbertSchmidt,
    Scalar,
}

#[derive(Clone, Debug, PartialEq)]
enum Table {
    Real(Vec<f64>),
    Planar(Vec<C64>),
    Dense(Vec<Vec<f64>>),
}

/// Increment sizes `d(i, j)` between grid points `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementCurve {
    pub times: Vec<f64>,
    pub norm: IncrementNorm,
    table: Table,
}

impl IncrementCurve {
    /// `d(i,j) = |x_j - x_i|`.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::check_len(&times, values.len())?;
        Ok(IncrementCurve {
            times,
            norm: IncrementNorm::Scalar,
            table: Table::Real(values),
        })
    }

    /// `d(i,j) = |z_j - z_i|` for complex samples (e.g. a prefix integral).
    pub fn planar(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        Self::check_len(&times, values.len())?;
        Ok(IncrementCurve {
            times,
            norm: IncrementNorm::Scalar,
            table: Table::Planar(values),
        })
    }

    /// Explicit symmetric table with zero diagonal.
    pub fn dense(times: Vec<f64>, d: Vec<Vec<f64>>, norm: IncrementNorm) -> Result<Self> {
        Self::check_len(&times, d.len())?;
        for (i, row) in d.iter().enumerate() {
            if row.len() != d.len() {
                return Err(Error::domain("increment table must be square"));
            }
            if row[i] != 0.0 {
                return Err(Error::domain("increment table needs a zero diagonal"));
            }
            if row.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::domain("increments must be finite and non-negative"));
            }
        }
        Ok(IncrementCurve {
            times,
            norm,
            table: Table::Dense(d),
        })
    }

    fn check_len(times: &[f64], n: usize) -> Result<()> {
        if times.len() != n || n == 0 {
            return Err(Error::domain("curve needs one sample per grid time"));
        }
        if n - 1 > MAX_GRID {
            return Err(Error::domain(format!("curve grid exceeds {MAX_GRID} intervals")));
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        match &self.table {
            Table::Real(x) => (x[j] - x[i]).abs(),
            Table::Planar(z) => (z[j] - z[i]).norm(),
            Table::Dense(d) => d[i][j],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationResult {
    pub norm: f64,
    /// Grid indices of the maximizing partition, first and last point included.
    pub partition: Vec<usize>,
}

/// `sup_P (Σ d(t_i, t_{i+1})^β)^{1/β}` over partitions with grid breakpoints,
/// by the recursion `best(j) = max_{i<j} best(i) + d(i,j)^β`.
pub fn variation_norm(curve: &IncrementCurve, beta: f64) -> Result<VariationResult> {
    if !(1.0..=2.0).contains(&beta) {
        return Err(Error::domain(format!("β = {beta} outside [1, 2]")));
    }
    let n = curve.len();
    let mut best = vec![0.0f64; n];
    let mut from = vec![0usize; n];
    for j in 1..n {
        let mut b = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, bi) in best.iter().enumerate().take(j) {
            let v = bi + curve.d(i, j).powf(beta);
            if v > b {
                b = v;
                arg = i;
            }
        }
        best[j] = b;
        from[j] = arg;
    }
    let mut partition = vec![n - 1];
    let mut j = n - 1;
    while j > 0 {
        j = from[j];
        partition.push(j);
    }
    partition.reverse();
    Ok(VariationResult {
        norm: best[n - 1].powf(1.0 / beta),
        partition,
    })
}

/// Exhaustive maximum over all `2^{G-1}` partitions; for small grids only.
pub fn variation_norm_exhaustive(curve: &IncrementCurve, beta: f64) -> f64 {
    let n = curve.len();
    if n < 2 {
        return 0.0;
    }
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u64..(1u64 << interior) {
        let mut last = 0;
        let mut s = 0.0;
        for p in 1..n {
            let keep = p == n - 1 || mask & (1 << (p - 1)) != 0;
            if keep {
                s += curve.d(last, p).powf(beta);
                last = p;
            }
        }
        best = best.max(s);
    }
    best.powf(1.0 / beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn examples() {
        let c = IncrementCurve::scalar(times(4), vec![1.0; 4]).unwrap();
        assert_eq!(variation_norm(&c, 1.5).unwrap().norm, 0.0);
        let c = IncrementCurve::scalar(times(3), vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(variation_norm(&c, 1.0).unwrap().norm, 2.0);
        assert!((variation_norm(&c, 2.0).unwrap().norm - 2f64.sqrt()).abs() < 1e-15);
        assert!((variation_norm_exhaustive(&c, 2.0) - 2f64.sqrt()).abs() < 1e-15);
        let c = IncrementCurve::scalar(times(5), vec![0.0, 0.5, 0.7, 2.0, 3.5]).unwrap();
        assert!((variation_norm(&c, 1.0).unwrap().norm - 3.5).abs() < 1e-15);
    }

    #[test]
    fn partition_reaches_the_norm() {
        let c = IncrementCurve::scalar(times(6), vec![0.0, 2.0, 1.5, 3.0, -1.0, 0.0]).unwrap();
        let r = variation_norm(&c, 1.3).unwrap();
        let s: f64 = r
            .partition
            .windows(2)
            .map(|w| c.d(w[0], w[1]).powf(1.3))
            .sum();
        assert!((s.powf(1.0 / 1.3) - r.norm).abs() < 1e-12);
        assert_eq!(r.partition[0], 0);
        assert_eq!(*r.partition.last().unwrap(), 5);
    }

    #[test]
    fn invalid_inputs() {
        let c = IncrementCurve::scalar(times(3), vec![0.0, 1.0, 0.0]).unwrap();
        assert!(variation_norm(&c, 0.5).is_err());
        assert!(IncrementCurve::scalar(times(3), vec![0.0]).is_err());
        assert!(IncrementCurve::dense(times(2), vec![vec![0.0, 1.0], vec![1.0, 0.5]], IncrementNorm::HilbertSchmidt).is_err());
    }
}
