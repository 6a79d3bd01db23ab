use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{FourierState, Picture, SymbolSpec};

use super::{evolve, EvolveConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub n: usize,
    /// Sup over observer times of the ℓ² distance to the reference solution.
    pub deviation: f64,
}

/// Solves at each band in `n_list` and compares against a reference solved on
/// twice the largest band, at every observer time of `cfg` (lab picture).
pub fn truncation_scan(
    spec: &SymbolSpec,
    pot: &PotentialModel,
    initial: &FourierState,
    cfg: &EvolveConfig,
    n_list: &[usize],
) -> Result<Vec<TruncationRow>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("band list must be non-empty and ascending"));
    }
    let mut cfg = cfg.clone();
    cfg.picture = Picture::Lab;
    if cfg.observer_times.is_empty() {
        cfg.observer_times = vec![cfg.t1];
    }
    let reference_band = 2 * n_list.last().unwrap();
    let reference = evolve(&initial.rebanded(reference_band), spec, pot, &cfg)?;
    n_list
        .iter()
        .map(|&n| {
            let tr = evolve(&initial.rebanded(n), spec, pot, &cfg)?;
            let deviation = tr
                .states
                .iter()
                .zip(&reference.states)
                .map(|(a, b)| a.distance(b))
                .fold(0.0, f64::max);
            Ok(TruncationRow { n, deviation })
        })
        .collect()
}
