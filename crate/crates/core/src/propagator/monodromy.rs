use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{FourierState, Picture, SymbolSpec, C64};

use super::{evolve, EvolveConfig};

/// Largest band for which the dense solution operator is assembled.
pub const MAX_DENSE_BAND: usize = 64;

/// Lab-picture solution operator on the band `[-n, n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyMatrix {
    pub entries: DMatrix<C64>,
    pub n: usize,
    pub k: f64,
    pub t0: f64,
    pub t1: f64,
}

impl MonodromyMatrix {
    pub fn apply(&self, state: &FourierState) -> Result<FourierState> {
        if state.n_max() != self.n {
            return Err(Error::domain(format!(
                "state band {} does not match operator band {}",
                state.n_max(),
                self.n
            )));
        }
        let x = DVector::from_column_slice(state.coeffs());
        let y = &self.entries * x;
        Ok(FourierState::from_coeffs(self.n, y.as_slice().to_vec())?.with_time(self.t1))
    }

    /// Frobenius norm of `X*X - I` (an upper bound for the spectral norm).
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.entries.nrows();
        let g = self.entries.adjoint() * &self.entries - DMatrix::<C64>::identity(dim, dim);
        g.norm()
    }
}

/// Evolves every basis vector `δ_n`, `|n| ≤ n`, from `t0` to `t1`.
pub fn dense_monodromy(
    spec: &SymbolSpec,
    pot: &PotentialModel,
    k: f64,
    n: usize,
    tspan: (f64, f64),
    tol: f64,
) -> Result<MonodromyMatrix> {
    if n > MAX_DENSE_BAND {
        return Err(Error::domain(format!(
            "dense monodromy limited to band {MAX_DENSE_BAND}, got {n}"
        )));
    }
    let dim = 2 * n + 1;
    let cfg = EvolveConfig::new(k, tspan.0, tspan.1).with_tol(tol);
    let mut entries = DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let basis = FourierState::delta(n, col as i64 - n as i64)?
            .with_time(tspan.0)
            .with_picture(Picture::Lab);
        let tr = evolve(&basis, spec, pot, &cfg)?;
        let out = tr.final_state().expect("observer at t1");
        for (row, c) in out.coeffs().iter().enumerate() {
            entries[(row, col)] = *c;
        }
    }
    Ok(MonodromyMatrix {
        entries,
        n,
        k,
        t0: tspan.0,
        t1: tspan.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_random_bounded, uniform_nodes};

    #[test]
    fn zero_potential_with_zero_coupling_is_identity() {
        let m = dense_monodromy(
            &SymbolSpec::schrodinger(),
            &PotentialModel::zero(),
            0.0,
            3,
            (0.0, 1.0),
            1e-10,
        )
        .unwrap();
        assert!((m.entries.clone() - DMatrix::<C64>::identity(7, 7)).norm() < 1e-15);
    }

    #[test]
    fn real_potential_gives_unitary_operator() {
        let pot = make_random_bounded(5, 3, &uniform_nodes(0.0, 1.0, 4), 1.0).unwrap();
        let m = dense_monodromy(&SymbolSpec::schrodinger(), &pot, 1.0, 4, (0.0, 1.0), 1e-10)
            .unwrap();
        assert!(m.unitarity_defect() < 1e-8, "{}", m.unitarity_defect());
    }

    #[test]
    fn oversized_band_is_rejected() {
        assert!(dense_monodromy(
            &SymbolSpec::schrodinger(),
            &PotentialModel::zero(),
            1.0,
            65,
            (0.0, 1.0),
            1e-9
        )
        .is_err());
    }
}
