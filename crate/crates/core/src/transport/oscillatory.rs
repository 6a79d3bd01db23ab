//! Zero-mode tracking for oscillatory potentials `V = Q_x/(t+1)` under the
//! Laplacian with coefficient `(1+t)^{-2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::propagator::{evolve_observed, EvolveConfig, Scheme};
use crate::spectral::{FourierState, SymbolSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeDeviation {
    /// `sup_t |1 - û₀(t)|`.
    pub sup_zero: f64,
    /// `sup_t ‖1 - u(t)‖`.
    pub sup_l2: f64,
    /// Largest `‖1-u‖² - 3|1-û₀|` seen; non-positive up to integrator drift.
    pub trick_margin: f64,
    pub samples: usize,
}

/// Starts from `u = 1` at `t_start` (the potential is switched on there) and
/// tracks both deviations at every accepted step up to `t_end`.
///
/// Every sample is checked against `‖1-u‖² ≤ 3|1-û₀|`, which follows from
/// `‖1-u‖² = 2 Re(1-û₀)` when `‖u‖ = 1`; the allowance is `10·tol·(t_end - t_start)`.
pub fn zero_mode_deviation(
    pot: &PotentialModel,
    t_start: f64,
    k: f64,
    t_end: f64,
    n_max: usize,
    tol: f64,
) -> Result<ZeroModeDeviation> {
    if !pot.reality {
        return Err(Error::domain("zero-mode tracking needs a real potential"));
    }
    let spec = SymbolSpec::decaying_quadratic();
    let cfg = EvolveConfig::new(k, t_start, t_end).with_tol(tol);
    let init = FourierState::one(n_max).with_time(t_start);
    let allowance = 10.0 * tol * (t_end - t_start) + 1e-12;
    let mut out = ZeroModeDeviation {
        sup_zero: 0.0,
        sup_l2: 0.0,
        trick_margin: f64::NEG_INFINITY,
        samples: 0,
    };
    let mut violation = None;
    let center = n_max;
    evolve_observed(&init, &spec, pot, &cfg, Scheme::Interaction, |t, w| {
        let d0 = (1.0 - w[center]).norm();
        let rest: f64 = w
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != center)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        let l2_sqr = d0 * d0 + rest;
        out.sup_zero = out.sup_zero.max(d0);
        out.sup_l2 = out.sup_l2.max(l2_sqr.sqrt());
        let margin = l2_sqr - 3.0 * d0;
        out.trick_margin = out.trick_margin.max(margin);
        out.samples += 1;
        if margin > allowance && violation.is_none() {
            violation = Some((t, l2_sqr, d0));
        }
    })?;
    if let Some((t, l2, d0)) = violation {
        return Err(Error::Assertion {
            criterion: "zero-mode chain".into(),
            detail: format!("at t = {t}: ‖1-u‖² = {l2} > 3|1-û₀| = {}", 3.0 * d0),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_oscillatory, uniform_nodes, OscillatoryQSpec};
    use crate::spectral::C64;

    fn cos_q(lambda: f64) -> PotentialModel {
        let shape = [(1, C64::new(0.5, 0.0)), (-1, C64::new(0.5, 0.0))];
        let spec =
            OscillatoryQSpec::separable(&shape, 1, 0.9, lambda, 2.0, uniform_nodes(2.0, 12.0, 20))
                .unwrap();
        make_oscillatory(&spec).unwrap()
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let r = zero_mode_deviation(&cos_q(0.0), 2.0, 1.0, 12.0, 8, 1e-9).unwrap();
        assert_eq!((r.sup_zero, r.sup_l2), (0.0, 0.0));
    }

    #[test]
    fn x_independent_q_gives_zero() {
        let spec = OscillatoryQSpec::separable(
            &[(0, C64::new(1.0, 0.0))],
            2,
            0.9,
            0.5,
            0.0,
            uniform_nodes(0.0, 4.0, 4),
        )
        .unwrap();
        let pot = make_oscillatory(&spec).unwrap();
        let r = zero_mode_deviation(&pot, 0.0, 1.0, 4.0, 8, 1e-9).unwrap();
        assert!(r.sup_zero < 1e-15 && r.sup_l2 < 1e-15);
    }

    #[test]
    fn deviations_scale_with_amplitude() {
        let small = zero_mode_deviation(&cos_q(0.02), 2.0, 0.7, 12.0, 8, 1e-11).unwrap();
        let big = zero_mode_deviation(&cos_q(0.04), 2.0, 0.7, 12.0, 8, 1e-11).unwrap();
        // no mean: the zero mode moves at second order, the state at first order
        let r0 = big.sup_zero / small.sup_zero;
        let r2 = big.sup_l2 / small.sup_l2;
        assert!((r0 - 4.0).abs() < 0.2, "{r0}");
        assert!((r2 - 2.0).abs() < 0.1, "{r2}");
        assert!(big.trick_margin <= 1e-12);
    }
}
