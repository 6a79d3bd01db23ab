//! Step kernels: the interaction-frame generator `D V D*` with
//! `D = diag(e^{ikΦ_n})`, and the lab-frame generator `kΛ + V`.

use crate::potential::PotentialModel;
use crate::spectral::{convolve_into, SymbolSpec, C64, ZERO};

/// Scaled Taylor substeps are sized so that `‖dt·A‖ ≤ THETA` per substep.
const THETA: f64 = 1.0;
const MAX_TERMS: usize = 60;

/// `x ← exp(-i·dt·(diag(d) + V*)) x` by scaled Taylor series on the vector.
///
/// `v` holds the potential coefficients `V̂_{-L..L}`; `d` is an optional real
/// diagonal. Scratch buffers must have the length of `x`.
pub(crate) fn expmv(
    v: &[C64],
    d: Option<&[f64]>,
    dt: f64,
    x: &mut [C64],
    term: &mut Vec<C64>,
    next: &mut Vec<C64>,
) {
    let vnorm: f64 = v.iter().map(|c| c.norm()).sum();
    let dnorm = d.map_or(0.0, |d| d.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let rho = dt.abs() * (vnorm + dnorm);
    if rho == 0.0 {
        return;
    }
    let substeps = (rho / THETA).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;
    let minus_ih = C64::new(0.0, -h);
    term.resize(x.len(), ZERO);
    next.resize(x.len(), ZERO);
    for _ in 0..substeps {
        term.copy_from_slice(x);
        let mut small = 0;
        for j in 1..=MAX_TERMS {
            convolve_into(v, term, next);
            if let Some(d) = d {
                for ((n, t), dd) in next.iter_mut().zip(term.iter()).zip(d) {
                    *n += t * dd;
                }
            }
            let f = minus_ih / j as f64;
            let mut tn = 0.0f64;
            let mut xn = 0.0f64;
            for (xi, ni) in x.iter_mut().zip(next.iter_mut()) {
                *ni *= f;
                *xi += *ni;
                tn = tn.max(ni.norm_sqr());
                xn = xn.max(xi.norm_sqr());
            }
            std::mem::swap(term, next);
            if tn <= 1e-34 * xn {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }
}

/// Scratch space and cached data for one trajectory.
pub(crate) struct Frame<'a> {
    pub spec: &'a SymbolSpec,
    pub pot: &'a PotentialModel,
    pub k: f64,
    /// Phases are `Φ_n(t_ref, t)`.
    pub t_ref: f64,
    pub n_max: usize,
    v: Vec<C64>,
    phase: Vec<C64>,
    diag: Vec<f64>,
    term: Vec<C64>,
    next: Vec<C64>,
}

impl<'a> Frame<'a> {
    pub fn new(spec: &'a SymbolSpec, pot: &'a PotentialModel, k: f64, t_ref: f64, n_max: usize) -> Self {
        let len = 2 * n_max + 1;
        Frame {
            spec,
            pot,
            k,
            t_ref,
            n_max,
            v: vec![ZERO; pot.width()],
            phase: vec![ZERO; len],
            diag: vec![0.0; len],
            term: vec![ZERO; len],
            next: vec![ZERO; len],
        }
    }

    /// Fills `phase[n] = e^{ikΦ_n(t_ref, t)}`.
    fn load_phases(&mut self, t: f64) {
        let off = self.n_max as i64;
        for (i, p) in self.phase.iter_mut().enumerate() {
            let n = i as i64 - off;
            let phi = self.spec.phase_integral(n, self.t_ref, t);
            *p = C64::from_polar(1.0, self.k * phi);
        }
    }

    /// Lab → frame or frame → lab rotation at time `t` (`sign = +1` into the frame).
    pub fn rotate(&mut self, x: &mut [C64], t: f64, sign: f64) {
        self.load_phases(t);
        for (xi, p) in x.iter_mut().zip(&self.phase) {
            *xi *= if sign > 0.0 { *p } else { p.conj() };
        }
    }

    /// Exponential-midpoint step in the interaction frame.
    pub fn step_interaction(&mut self, w: &mut [C64], t: f64, dt: f64) {
        let tm = t + 0.5 * dt;
        self.pot.coeffs_into(tm, &mut self.v);
        self.load_phases(tm);
        for (wi, p) in w.iter_mut().zip(&self.phase) {
            *wi *= p.conj();
        }
        expmv(&self.v, None, dt, w, &mut self.term, &mut self.next);
        for (wi, p) in w.iter_mut().zip(&self.phase) {
            *wi *= p;
        }
    }

    /// Exponential-midpoint step with the full generator `kΛ(t) + V(t)`.
    pub fn step_lab(&mut self, u: &mut [C64], t: f64, dt: f64) {
        let tm = t + 0.5 * dt;
        self.pot.coeffs_into(tm, &mut self.v);
        let off = self.n_max as i64;
        for (i, d) in self.diag.iter_mut().enumerate() {
            *d = self.k * self.spec.multiplier(i as i64 - off, tm);
        }
        expmv(&self.v, Some(&self.diag), dt, u, &mut self.term, &mut self.next);
    }

    /// `y = H(t) x` with `H = D V D*` (interaction frame generator).
    pub fn apply_generator(&mut self, t: f64, x: &[C64], y: &mut [C64]) {
        self.pot.coeffs_into(t, &mut self.v);
        self.load_phases(t);
        for ((ti, xi), p) in self.term.iter_mut().zip(x).zip(&self.phase) {
            *ti = xi * p.conj();
        }
        convolve_into(&self.v, &self.term, y);
        for (yi, p) in y.iter_mut().zip(&self.phase) {
            *yi *= p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expmv_of_scalar_is_exact() {
        let v = [C64::new(0.3, 0.0)];
        let mut x = vec![C64::new(1.0, 0.0); 3];
        let (mut a, mut b) = (Vec::new(), Vec::new());
        expmv(&v, None, 7.0, &mut x, &mut a, &mut b);
        let want = C64::from_polar(1.0, -2.1);
        for xi in x {
            assert!((xi - want).norm() < 1e-14);
        }
    }

    #[test]
    fn expmv_matches_dense_exponential() {
        // V = 2cos x on band 2: tridiagonal with ones; compare against eigen-decomposition
        let v = [C64::new(1.0, 0.0), ZERO, C64::new(1.0, 0.0)];
        let d = [0.5, -1.0, 0.0, 2.0, 0.25];
        let n = 5;
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = d[i];
            if i + 1 < n {
                m[(i, i + 1)] = 1.0;
                m[(i + 1, i)] = 1.0;
            }
        }
        let eig = m.clone().symmetric_eigen();
        let dt = 3.7;
        let mut x = vec![ZERO; n];
        x[1] = C64::new(1.0, 0.0);
        let mut want = vec![ZERO; n];
        for r in 0..n {
            for c in 0..n {
                let mut s = ZERO;
                for j in 0..n {
                    s += C64::from_polar(1.0, -dt * eig.eigenvalues[j])
                        * eig.eigenvectors[(r, j)]
                        * eig.eigenvectors[(c, j)];
                }
                want[r] += s * x[c];
            }
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        expmv(&v, Some(&d), dt, &mut x, &mut a, &mut b);
        for (g, w) in x.iter().zip(&want) {
            assert!((g - w).norm() < 1e-13, "{g} vs {w}");
        }
    }
}
