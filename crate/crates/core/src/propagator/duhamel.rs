//! Truncated Duhamel (Dyson) series in the interaction frame.
//!
//! Each iterated integral is computed cell by cell with a Gauss–Legendre
//! collocation: the integrand is sampled at the Gauss nodes of the cell and
//! integrated through the exact integration matrix of its interpolant. The cell
//! size is halved until the summed state stops changing.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::quadrature::gauss_legendre;
use crate::spectral::{FourierState, SymbolSpec, C64, ZERO};

use super::{convert, EvolveConfig, Frame};

const NODES: usize = 16;
const MAX_LEVELS: usize = 12;
const SETTLE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct DuhamelResult {
    /// Sum of the first `n_terms` terms at `cfg.t1`, in `cfg.picture`.
    pub state: FourierState,
    /// Norm of the last retained term.
    pub remainder: f64,
    /// Number of collocation cells used by the accepted level.
    pub cells: usize,
}

struct Collocation {
    nodes: Vec<f64>,
    /// `matrix[i][j] = ∫_{-1}^{x_i} ℓ_j`, with the last row for `x = 1`.
    matrix: Vec<Vec<f64>>,
}

fn collocation() -> &'static Collocation {
    static RULE: OnceLock<Collocation> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(NODES);
        let bary: Vec<f64> = (0..NODES)
            .map(|j| {
                1.0 / (0..NODES)
                    .filter(|&m| m != j)
                    .map(|m| x[j] - x[m])
                    .product::<f64>()
            })
            .collect();
        // ℓ_j(s) via the barycentric form; s never coincides with a node here
        // because the quadrature points of a sub-interval are interior.
        let lagrange = |j: usize, s: f64| -> f64 {
            let denom: f64 = (0..NODES).map(|m| bary[m] / (s - x[m])).sum();
            bary[j] / (s - x[j]) / denom
        };
        let mut matrix = Vec::with_capacity(NODES + 1);
        for i in 0..NODES {
            let hi = x[i];
            let half = 0.5 * (hi + 1.0);
            let row = (0..NODES)
                .map(|j| {
                    x.iter()
                        .zip(&w)
                        .map(|(q, wq)| wq * half * lagrange(j, -1.0 + half * (q + 1.0)))
                        .sum()
                })
                .collect();
            matrix.push(row);
        }
        matrix.push(w.clone());
        Collocation { nodes: x, matrix }
    })
}

/// `n_terms`-term Duhamel expansion of the evolution from `cfg.t0` to `cfg.t1`.
///
/// `n_terms = 1` is the free evolution; the remainder proxy is the norm of the
/// highest retained term.
pub fn duhamel_series(
    initial: &FourierState,
    spec: &SymbolSpec,
    pot: &PotentialModel,
    cfg: &EvolveConfig,
    n_terms: usize,
) -> Result<DuhamelResult> {
    cfg.validate()?;
    if n_terms == 0 {
        return Err(Error::domain("n_terms must be at least 1"));
    }
    let n_max = initial.n_max();
    let lab0 = convert(&initial.clone().with_time(cfg.t0), spec, cfg.k, crate::Picture::Lab);
    let mut stops = vec![cfg.t0];
    stops.extend(pot.breakpoints_in(cfg.t0, cfg.t1));
    stops.extend(spec.crossings(n_max, cfg.t0, cfg.t1));
    stops.push(cfg.t1);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    // Initial cell size from the fastest phase in the band.
    let omega = 2.0 * cfg.k.abs() * spec.max_multiplier(n_max, cfg.t0)
        + pot
            .coefficients
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            * pot.width() as f64;
    let h0 = 4.0 / (1.0 + omega);

    let mut frame = Frame::new(spec, pot, cfg.k, cfg.t0, n_max);
    let mut prev: Option<(Vec<C64>, f64, usize)> = None;
    for level in 0..MAX_LEVELS {
        let h = h0 / (1u64 << level) as f64;
        let cells = subdivide(&stops, h);
        let (sum, rem) = run(&mut frame, lab0.coeffs(), &cells, n_terms);
        if let Some((p, _, _)) = &prev {
            let diff = p
                .iter()
                .zip(&sum)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale = sum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1.0);
            if diff <= SETTLE * scale {
                prev = Some((sum, rem, cells.len() - 1));
                break;
            }
        }
        prev = Some((sum, rem, cells.len() - 1));
    }
    let (mut sum, remainder, cells) = prev.expect("at least one level");
    frame.rotate(&mut sum, cfg.t1, -1.0);
    let lab = FourierState::from_coeffs(n_max, sum)?.with_time(cfg.t1);
    Ok(DuhamelResult {
        state: convert(&lab, spec, cfg.k, cfg.picture),
        remainder,
        cells,
    })
}

fn subdivide(stops: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![stops[0]];
    for w in stops.windows(2) {
        let m = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for i in 1..m {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / m as f64);
        }
        out.push(w[1]);
    }
    out
}

/// Returns `(Σ_j w_j(t1), ‖w_{n-1}(t1)‖)`.
fn run(frame: &mut Frame, w0: &[C64], cells: &[f64], n_terms: usize) -> (Vec<C64>, f64) {
    let rule = collocation();
    let len = w0.len();
    // value of each term at the current cell start
    let mut start: Vec<Vec<C64>> = vec![vec![ZERO; len]; n_terms];
    start[0].copy_from_slice(w0);
    // node values of the previous term and the current term
    let mut prev_nodes = vec![vec![ZERO; len]; NODES];
    let mut cur_nodes = vec![vec![ZERO; len]; NODES];
    let mut f = vec![vec![ZERO; len]; NODES];
    let minus_i = C64::new(0.0, -1.0);
    for cell in cells.windows(2) {
        let (a, b) = (cell[0], cell[1]);
        let half = 0.5 * (b - a);
        let times: Vec<f64> = rule.nodes.iter().map(|x| a + half * (x + 1.0)).collect();
        for node in prev_nodes.iter_mut() {
            node.copy_from_slice(w0);
        }
        for j in 1..n_terms {
            for (fi, (ti, xi)) in f.iter_mut().zip(times.iter().zip(&prev_nodes)) {
                frame.apply_generator(*ti, xi, fi);
                fi.iter_mut().for_each(|c| *c *= minus_i);
            }
            let a_j = start[j].clone();
            for (i, row) in rule.matrix.iter().enumerate() {
                let target: &mut [C64] = if i < NODES {
                    &mut cur_nodes[i]
                } else {
                    &mut start[j]
                };
                for (m, slot) in target.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for (s, fl) in row.iter().zip(&f) {
                        acc += fl[m] * *s;
                    }
                    *slot = a_j[m] + acc * half;
                }
            }
            std::mem::swap(&mut prev_nodes, &mut cur_nodes);
        }
    }
    let mut sum = vec![ZERO; len];
    for term in &start {
        for (s, c) in sum.iter_mut().zip(term) {
            *s += c;
        }
    }
    let rem = start[n_terms - 1]
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    (sum, rem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_constant_imag;

    #[test]
    fn collocation_integrates_polynomials() {
        let rule = collocation();
        // ∫_{-1}^{x_i} s^5 ds = (x_i^6 - 1)/6
        for (i, row) in rule.matrix.iter().enumerate() {
            let hi = if i < NODES { rule.nodes[i] } else { 1.0 };
            let got: f64 = row.iter().zip(&rule.nodes).map(|(s, x)| s * x.powi(5)).sum();
            assert!((got - (hi.powi(6) - 1.0) / 6.0).abs() < 1e-13);
        }
    }

    #[test]
    fn one_term_is_free_evolution() {
        let spec = SymbolSpec::schrodinger();
        let pot = PotentialModel::stationary(1, &[(1, C64::new(1.0, 0.0)), (-1, C64::new(1.0, 0.0))], true).unwrap();
        let init = FourierState::from_modes(3, &[(2, C64::new(1.0, 0.0))]).unwrap();
        let cfg = EvolveConfig::new(1.5, 0.0, 0.7);
        let r = duhamel_series(&init, &spec, &pot, &cfg, 1).unwrap();
        let want = C64::from_polar(1.0, -1.5 * 4.0 * 0.7);
        assert!((r.state.get(2) - want).norm() < 1e-14);
        assert!((r.remainder - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_series_gives_exponential_partial_sums() {
        let spec = SymbolSpec::schrodinger();
        let pot = make_constant_imag(1.0);
        let t = 0.8;
        let cfg = EvolveConfig::new(0.3, 0.0, t);
        for n in 1..6 {
            let r = duhamel_series(&FourierState::one(2), &spec, &pot, &cfg, n).unwrap();
            let mut fact = 1.0;
            let mut want = 0.0;
            for j in 0..n {
                if j > 0 {
                    fact *= j as f64;
                }
                want += t.powi(j as i32) / fact;
            }
            assert!((r.state.get(0).re - want).abs() < 1e-13, "n={n}");
        }
    }
}
