//! Transport approximations of the gaps evolution: exact characteristic
//! solutions, block-wise WKB comparisons, the diadic pipeline and the
//! zero-mode tracker for oscillatory potentials.

mod characteristics;
mod diadic;
mod oscillatory;
mod wkb;

pub use characteristics::{
    modulated_translate, phase_modes, power_linear_integral, sup_norm, transport_field,
    transport_g, transport_nu, transport_spectrum, Spectrum, Speed, TransportSolution,
};
pub use diadic::{
    diadic_pipeline, diadic_row, h_half_norm_of_transport, summarize, weighted_mean_square,
    DiadicReport, DiadicRow, HalfNormReport, PipelineOptions, MAX_J,
};
pub use oscillatory::{zero_mode_deviation, ZeroModeDeviation};
pub use wkb::{
    block_cutoff, gaps_rhs_correction, unit_initial, v1_sup, wkb_compare, BetarCheck,
    BetarReport, BlockOptions, DiadicParams, WkbComparison,
};
