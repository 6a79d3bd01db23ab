//! Bound-side quantities: `υ₁`, `D₁`, `D₂`, Carleson suprema, off-diagonal
//! Hilbert–Schmidt norms, weighted operator norms and variation norms.

pub mod carleson;
pub mod hilbert_schmidt;
pub mod opnorm;
pub mod upsilon;
pub mod variation;

pub use carleson::{carleson_q, diameter, prefix_curve, IntervalGrid};
pub use hilbert_schmidt::{hs_offdiag, sup_hs_offdiag, HsBounds};
pub use opnorm::{
    build_v2_curve, commutator_increment, lambda_weights, weighted_opnorm, ComplexVParams,
};
pub use upsilon::{d1, d1_with, d2, d2_with, mean_square_integral, upsilon1, Upsilon, Weight};
pub use variation::{variation_norm, IncrementCurve, IncrementNorm, VariationResult};
