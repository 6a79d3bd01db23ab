//! `υ₁(t) = sup_x |V(x,t)|` and the double integrals built from it.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PotentialModel, X_GRID};
use crate::quadrature::{integrate, Cumulative};
use crate::spectral::C64;

const OUTER_REL: f64 = 1e-10;
const INNER_REL: f64 = 1e-12;

/// Cached evaluator of `υ₁` on the certificate grid. Grid values are built
/// once per profile node and interpolated linearly in between, as the
/// coefficients are.
pub struct Upsilon<'a> {
    pot: &'a PotentialModel,
    table: Vec<C64>,
    nodes: Vec<Option<Vec<C64>>>,
}

impl<'a> Upsilon<'a> {
    pub fn new(pot: &'a PotentialModel) -> Self {
        let width = pot.width();
        let l_max = pot.l_max as f64;
        let mut table = Vec::with_capacity(X_GRID * width);
        for j in 0..X_GRID {
            let x = 2.0 * PI * j as f64 / X_GRID as f64;
            for i in 0..width {
                table.push(C64::from_polar(1.0, (i as f64 - l_max) * x));
            }
        }
        Upsilon {
            pot,
            table,
            nodes: vec![None; pot.times.len()],
        }
    }

    fn node(&mut self, i: usize) -> &[C64] {
        let (pot, table) = (self.pot, &self.table);
        self.nodes[i].get_or_insert_with(|| {
            let row = &pot.coefficients[i];
            table
                .chunks_exact(row.len())
                .map(|e| e.iter().zip(row).map(|(a, b)| a * b).sum())
                .collect()
        })
    }

    pub fn eval(&mut self, t: f64) -> f64 {
        if self.pot.width() == 1 {
            return self.pot.coeff(0, t).norm();
        }
        let last = self.pot.times.len() - 1;
        let sup = match self.pot.cell(t) {
            None => sup_sqr(self.node(0).iter().copied()),
            Some(i) if i >= last => sup_sqr(self.node(last).iter().copied()),
            Some(i) => {
                let (a, b) = (self.pot.times[i], self.pot.times[i + 1]);
                let s = (t - a) / (b - a);
                self.node(i);
                self.node(i + 1);
                let (x, y) = (self.nodes[i].as_deref(), self.nodes[i + 1].as_deref());
                let (x, y) = (x.expect("cached"), y.expect("cached"));
                sup_sqr(x.iter().zip(y).map(|(&x, &y)| x + (y - x) * s))
            }
        };
        sup.sqrt()
    }
}

fn sup_sqr(values: impl Iterator<Item = C64>) -> f64 {
    values.map(|v| v.norm_sqr()).fold(0.0, f64::max)
}

/// Sup over the 512-point grid; a lower bound of the true sup norm.
pub fn upsilon1(pot: &PotentialModel, t: f64) -> f64 {
    Upsilon::new(pot).eval(t)
}

/// Weight functions accepted by [`d2`] through configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Weight {
    One,
    /// `(1+t)^{1/2}`
    #[default]
    SqrtOnePlusT,
    /// `(1+t)^p`
    Power { p: f64 },
}

impl Weight {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Weight::One => 1.0,
            Weight::SqrtOnePlusT => (1.0 + t).sqrt(),
            Weight::Power { p } => (1.0 + t).powf(p),
        }
    }
}

fn stops(breakpoints: &[f64], t_end: f64) -> Result<Vec<f64>> {
    if !(t_end > 0.0) {
        return Err(Error::domain("horizon must be positive"));
    }
    let mut s = vec![0.0];
    s.extend(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < t_end));
    s.push(t_end);
    s.sort_by(f64::total_cmp);
    s.dedup();
    Ok(s)
}

/// `D₁(T) = ∫_0^T υ₁²(τ)(1 + ∫_0^τ υ₁) dτ` for an arbitrary profile `υ₁`.
/// `breakpoints` lists kinks of the profile.
pub fn d1_with(
    upsilon: &mut dyn FnMut(f64) -> f64,
    breakpoints: &[f64],
    t_end: f64,
) -> Result<f64> {
    let s = stops(breakpoints, t_end)?;
    let f = std::cell::RefCell::new(upsilon);
    let mut cum = Cumulative::new(|t| (*f.borrow_mut())(t), &s, 1e-300, INNER_REL)?;
    let est = integrate(
        |t| {
            let u = (*f.borrow_mut())(t);
            u * u * (1.0 + cum.eval(t))
        },
        &s,
        1e-300,
        OUTER_REL,
    )?;
    Ok(est.value)
}

/// `D₂(T) = (∫_0^T υ₁² w)(∫_0^T υ₁²(τ) ∫_0^τ w^{-1} dτ)`.
pub fn d2_with(
    upsilon: &mut dyn FnMut(f64) -> f64,
    w: &dyn Fn(f64) -> f64,
    breakpoints: &[f64],
    t_end: f64,
) -> Result<f64> {
    let s = stops(breakpoints, t_end)?;
    let bad = Cell::new(None::<f64>);
    let check = |t: f64| {
        let v = w(t);
        if !(v > 0.0) || !v.is_finite() {
            bad.set(Some(t));
            1.0
        } else {
            v
        }
    };
    let first = integrate(
        |t| {
            let u = upsilon(t);
            u * u * check(t)
        },
        &s,
        1e-300,
        OUTER_REL,
    )?;
    let mut inv = Cumulative::new(|t| 1.0 / check(t), &s, 1e-300, INNER_REL)?;
    let second = integrate(
        |t| {
            let u = upsilon(t);
            u * u * inv.eval(t)
        },
        &s,
        1e-300,
        OUTER_REL,
    )?;
    if let Some(t) = bad.get() {
        return Err(Error::domain(format!("weight is not positive at t = {t}")));
    }
    Ok(first.value * second.value)
}

/// [`d1_with`] for the potential's `υ₁`.
pub fn d1(pot: &PotentialModel, t_end: f64) -> Result<f64> {
    let mut u = Upsilon::new(pot);
    d1_with(&mut |t| u.eval(t), &pot.times, t_end)
}

/// [`d2_with`] for the potential's `υ₁`.
pub fn d2(pot: &PotentialModel, t_end: f64, w: &dyn Fn(f64) -> f64) -> Result<f64> {
    let mut u = Upsilon::new(pot);
    d2_with(&mut |t| u.eval(t), w, &pot.times, t_end)
}

/// `∫_0^T ∫_𝕋 |V|² dx/2π dτ = ∫_0^T Σ_l |V̂_l|² dτ`, exact for linear profiles.
pub fn mean_square_integral(pot: &PotentialModel, t_end: f64) -> f64 {
    let mut s = vec![0.0];
    s.extend(pot.breakpoints_in(0.0, t_end));
    s.push(t_end);
    let energy = |t: f64| pot.coeffs_at(t).iter().map(|c| c.norm_sqr()).sum::<f64>();
    s.windows(2)
        .map(|w| {
            // quadratic on each cell, Simpson is exact
            let h = w[1] - w[0];
            h / 6.0 * (energy(w[0]) + 4.0 * energy(0.5 * (w[0] + w[1])) + energy(w[1]))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn upsilon_examples() {
        assert_eq!(upsilon1(&PotentialModel::zero(), 1.0), 0.0);
        let one = C64::new(1.0, 0.0);
        let cos = PotentialModel::stationary(1, &[(1, one), (-1, one)], true).unwrap();
        assert_abs_diff_eq!(upsilon1(&cos, 0.3), 2.0, epsilon = 1e-4);
        let imag = crate::potential::make_constant_imag(-0.7);
        assert_abs_diff_eq!(upsilon1(&imag, 5.0), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn constant_profile_examples() {
        let d = d1_with(&mut |_| 1.0, &[], 2.0).unwrap();
        assert_abs_diff_eq!(d, 4.0, epsilon = 1e-12);
        let d = d2_with(&mut |_| 1.0, &|_| 1.0, &[], 2.0).unwrap();
        assert_abs_diff_eq!(d, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn decaying_profile_matches_closed_forms() {
        // υ = (1+t)^{-1}, w = (1+t)^{1/2}
        let t = 50.0;
        let u = |t: f64| 1.0 / (1.0 + t);
        let d = d1_with(&mut |s| u(s), &[], t).unwrap();
        // ∫ (1+τ)^{-2}(1 + ln(1+τ)) dτ = [-(2 + ln(1+τ))/(1+τ)]
        let f = |s: f64| -(2.0 + (1.0 + s).ln()) / (1.0 + s);
        let want = f(t) - f(0.0);
        assert!((d - want).abs() < 1e-8 * want);
        let d = d2_with(&mut |s| u(s), &|s| (1.0 + s).sqrt(), &[], t).unwrap();
        let a = 2.0 * (1.0 - (1.0 + t).powf(-0.5));
        // ∫ (1+τ)^{-2}·2((1+τ)^{1/2} - 1) dτ = [-4(1+τ)^{-1/2} + 2(1+τ)^{-1}]
        let g = |s: f64| -4.0 * (1.0 + s).powf(-0.5) + 2.0 / (1.0 + s);
        let want = a * (g(t) - g(0.0));
        assert!((d - want).abs() < 1e-8 * want);
    }

    #[test]
    fn nonpositive_weight_is_rejected() {
        assert!(d2_with(&mut |_| 1.0, &|t| t - 1.0, &[], 2.0).is_err());
    }
}
