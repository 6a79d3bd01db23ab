//! Dense comparison of `i ψ₁' = O ψ₁` against `i ψ₂' = (O + O₁) ψ₂ + j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationGap {
    /// `sup_t ‖ψ₁(t) - ψ₂(t)‖` on the step grid.
    pub sup_distance: f64,
    /// `∫_0^T (‖O₁‖ + ‖j‖) dt + ‖f₂ - f₁‖`.
    pub bound: f64,
    /// `sup_t ‖ψ₂(t)‖`.
    pub sup_norm_psi2: f64,
}

type MatrixFn<'a> = &'a dyn Fn(f64) -> DMatrix<C64>;
type VectorFn<'a> = &'a dyn Fn(f64) -> DVector<C64>;

/// RK4 on both systems with `steps` uniform steps on `[0, t_end]`; the bound's
/// time integral uses composite Simpson on the same grid.
pub fn perturbation_gap(
    o: MatrixFn,
    o1: MatrixFn,
    j: VectorFn,
    f1: &DVector<C64>,
    f2: &DVector<C64>,
    t_end: f64,
    steps: usize,
) -> Result<PerturbationGap> {
    if steps < 2 || steps % 2 == 1 || !(t_end > 0.0) {
        return Err(Error::domain("need an even step count >= 2 and t_end > 0"));
    }
    let mi = C64::new(0.0, -1.0);
    let rhs1 = |t: f64, y: &DVector<C64>| (o(t) * y) * mi;
    let rhs2 = |t: f64, y: &DVector<C64>| ((o(t) + o1(t)) * y + j(t)) * mi;
    let rk4 = |f: &dyn Fn(f64, &DVector<C64>) -> DVector<C64>, t: f64, h: f64, y: &DVector<C64>| {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, &(y + &k1 * C64::from(0.5 * h)));
        let k3 = f(t + 0.5 * h, &(y + &k2 * C64::from(0.5 * h)));
        let k4 = f(t + h, &(y + &k3 * C64::from(h)));
        y + (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0)
    };
    let h = t_end / steps as f64;
    let mut psi1 = f1.clone();
    let mut psi2 = f2.clone();
    let mut sup_distance = (&psi1 - &psi2).norm();
    let mut sup_norm_psi2 = psi2.norm();
    for s in 0..steps {
        let t = s as f64 * h;
        psi1 = rk4(&rhs1, t, h, &psi1);
        psi2 = rk4(&rhs2, t, h, &psi2);
        sup_distance = sup_distance.max((&psi1 - &psi2).norm());
        sup_norm_psi2 = sup_norm_psi2.max(psi2.norm());
    }
    let density = |t: f64| {
        let op = o1(t).singular_values().iter().fold(0.0f64, |m, &x| m.max(x));
        op + j(t).norm()
    };
    let mut integral = density(0.0) + density(t_end);
    for s in 1..steps {
        integral += density(s as f64 * h) * if s % 2 == 1 { 4.0 } else { 2.0 };
    }
    integral *= h / 3.0;
    Ok(PerturbationGap {
        sup_distance,
        bound: integral + (f2 - f1).norm(),
        sup_norm_psi2,
    })
}
