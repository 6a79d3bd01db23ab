//! Hilbert–Schmidt norms of the off-diagonal block `P_N Ṽ_S Q_N` of the
//! interaction-picture potential integrated over `S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{SymbolSpec, C64};

use super::carleson::{diameter, prefix_curve, IntervalGrid};

/// Entries `(m, n)` with `|m| ≤ N < |n| ≤ band` that the potential can couple.
pub fn offdiag_entries(n_cut: usize, band: usize, l_max: usize) -> Vec<(i64, i64)> {
    let (nc, b, l) = (n_cut as i64, band as i64, l_max as i64);
    let mut out = Vec::new();
    for m in -nc..=nc {
        for n in (m - l).max(-b)..=(m + l).min(b) {
            if n.abs() > nc {
                out.push((m, n));
            }
        }
    }
    out
}

fn check(spec: &SymbolSpec, n_cut: usize, band: usize) -> Result<()> {
    if !spec.is_static() {
        return Err(Error::domain(
            "off-diagonal Hilbert–Schmidt norms need a time-independent symbol",
        ));
    }
    if n_cut >= band {
        return Err(Error::domain(format!("cut {n_cut} must be below band {band}")));
    }
    Ok(())
}

/// Entry frequency: `Ṽ_{mn}(t) = e^{iωt} V̂_{m-n}(t)` with `ω = k(λ_m - λ_n)`.
fn frequency(spec: &SymbolSpec, k: f64, m: i64, n: i64) -> f64 {
    k * (spec.multiplier(m, 0.0) - spec.multiplier(n, 0.0))
}

/// `‖P_N Ṽ_S Q_N‖_{S₂}` for `S = [s.0, s.1]`.
pub fn hs_offdiag(
    pot: &PotentialModel,
    spec: &SymbolSpec,
    n_cut: usize,
    band: usize,
    s: (f64, f64),
    k: f64,
) -> Result<f64> {
    check(spec, n_cut, band)?;
    Ok(offdiag_entries(n_cut, band, pot.l_max)
        .into_iter()
        .map(|(m, n)| {
            pot.integrate_mode(m - n, frequency(spec, k, m, n), s.0, s.1)
                .norm_sqr()
        })
        .sum::<f64>()
        .sqrt())
}

/// Same as [`hs_offdiag`] for the transposed block `Q_N Ṽ_S P_N`.
pub fn hs_offdiag_transposed(
    pot: &PotentialModel,
    spec: &SymbolSpec,
    n_cut: usize,
    band: usize,
    s: (f64, f64),
    k: f64,
) -> Result<f64> {
    check(spec, n_cut, band)?;
    Ok(offdiag_entries(n_cut, band, pot.l_max)
        .into_iter()
        .map(|(m, n)| {
            pot.integrate_mode(n - m, frequency(spec, k, n, m), s.0, s.1)
                .norm_sqr()
        })
        .sum::<f64>()
        .sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsBounds {
    /// Exact joint sup over subintervals of the coarse grid.
    pub lower: f64,
    /// `(Σ_entries diam²)^{1/2}`, each entry maximized independently.
    pub upper: f64,
    pub grid_size: usize,
    pub coarse_size: usize,
}

/// Bounds on `sup_S ‖P_N Ṽ_S Q_N‖_{S₂}` over subintervals with grid endpoints.
pub fn sup_hs_offdiag(
    pot: &PotentialModel,
    spec: &SymbolSpec,
    n_cut: usize,
    band: usize,
    k: f64,
    grid: &IntervalGrid,
    coarse: usize,
) -> Result<HsBounds> {
    check(spec, n_cut, band)?;
    let entries = offdiag_entries(n_cut, band, pot.l_max);
    let curves: Vec<Vec<C64>> = entries
        .iter()
        .map(|&(m, n)| prefix_curve(pot, m - n, frequency(spec, k, m, n), grid))
        .collect();
    let upper = curves
        .iter()
        .map(|c| diameter(c).powi(2))
        .sum::<f64>()
        .sqrt();
    let g = grid.intervals();
    let stride = g.div_ceil(coarse.max(1)).max(1);
    let mut idx: Vec<usize> = (0..=g).step_by(stride).collect();
    if *idx.last().unwrap() != g {
        idx.push(g);
    }
    let mut best = 0.0f64;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let s: f64 = curves.iter().map(|c| (c[j] - c[i]).norm_sqr()).sum();
            best = best.max(s);
        }
    }
    Ok(HsBounds {
        lower: best.sqrt(),
        upper,
        grid_size: g,
        coarse_size: idx.len() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_random_bounded, uniform_nodes};

    fn cos2() -> PotentialModel {
        let one = C64::new(1.0, 0.0);
        PotentialModel::stationary(1, &[(1, one), (-1, one)], true).unwrap()
    }

    #[test]
    fn cosine_example_has_two_unit_entries() {
        let s = SymbolSpec::schrodinger();
        for n in [1usize, 3, 6] {
            let v = hs_offdiag(&cos2(), &s, n, n + 1, (0.0, 1.0), 0.0).unwrap();
            assert!((v - 2f64.sqrt()).abs() < 1e-14);
        }
        let zero = hs_offdiag(&PotentialModel::zero(), &s, 2, 3, (0.0, 1.0), 1.0).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn real_potential_blocks_have_equal_norms() {
        let s = SymbolSpec::schrodinger();
        let pot = make_random_bounded(3, 3, &uniform_nodes(0.0, 2.0, 5), 1.0).unwrap();
        let a = hs_offdiag(&pot, &s, 5, 8, (0.3, 1.7), 0.9).unwrap();
        let b = hs_offdiag_transposed(&pot, &s, 5, 8, (0.3, 1.7), 0.9).unwrap();
        assert!((a - b).abs() < 1e-13 * a);
    }

    #[test]
    fn single_entry_bounds_coincide_with_carleson() {
        let s = SymbolSpec::schrodinger();
        let one = C64::new(1.0, 0.0);
        let pot = PotentialModel::custom(
            1,
            vec![0.0, 1.0, 2.0],
            vec![
                vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), one],
                vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), one * 0.3],
                vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), one * -0.5],
            ],
            false,
        )
        .unwrap();
        // only V̂_1 ≠ 0 and band N+1: the single entry (N, N+1) needs m - n = -1,
        // so use V̂_{-1} through the transposed orientation instead
        let grid = IntervalGrid::uniform(0.0, 2.0, 64).unwrap();
        let b = sup_hs_offdiag(&pot, &s, 0, 1, 1.3, &grid, 64).unwrap();
        // entries: (0, 1) uses V̂_{-1} = 0, (0, -1) uses V̂_1
        let q = super::super::carleson::carleson_q(&pot, 1, 1.3 * (0.0 - 1.0), &grid);
        assert!((b.upper - q).abs() < 1e-14);
        assert!((b.lower - q).abs() < 1e-14);
    }

    #[test]
    fn time_dependent_symbols_are_rejected() {
        assert!(hs_offdiag(&cos2(), &SymbolSpec::gaps(), 1, 2, (0.0, 1.0), 1.0).is_err());
    }
}
