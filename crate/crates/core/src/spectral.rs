//! Band-limited Fourier states on the torus and the diagonal/banded operators
//! acting on them.
//!
//! Modes are indexed by `n ∈ [-N, N]` and stored at offset `n + N`. There is no
//! wraparound anywhere: a mode that would leave the band is dropped.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    #[default]
    Lab,
    Interaction,
}

/// Fourier coefficients `û_n`, `|n| ≤ n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    coeffs: Vec<C64>,
    n_max: usize,
    picture: Picture,
    time: f64,
}

impl FourierState {
    pub fn zeros(n_max: usize) -> Self {
        FourierState {
            coeffs: vec![ZERO; 2 * n_max + 1],
            n_max,
            picture: Picture::Lab,
            time: 0.0,
        }
    }

    /// `e^{inx}` with unit amplitude.
    pub fn delta(n_max: usize, n: i64) -> Result<Self> {
        let mut s = Self::zeros(n_max);
        s.set(n, ONE)?;
        Ok(s)
    }

    /// The constant function 1, i.e. `δ_0`.
    pub fn one(n_max: usize) -> Self {
        let mut s = Self::zeros(n_max);
        s.coeffs[n_max] = ONE;
        s
    }

    pub fn from_modes(n_max: usize, modes: &[(i64, C64)]) -> Result<Self> {
        let mut s = Self::zeros(n_max);
        for &(n, c) in modes {
            let cur = s.get(n);
            s.set(n, cur + c)?;
        }
        Ok(s)
    }

    pub fn from_coeffs(n_max: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * n_max + 1 {
            return Err(Error::domain(format!(
                "expected {} coefficients for band {n_max}, got {}",
                2 * n_max + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::domain("non-finite Fourier coefficient"));
        }
        Ok(FourierState {
            coeffs,
            n_max,
            picture: Picture::Lab,
            time: 0.0,
        })
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn with_picture(mut self, picture: Picture) -> Self {
        self.picture = picture;
        self
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn contains(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.n_max
    }

    /// Amplitude of mode `n`; zero outside the band.
    pub fn get(&self, n: i64) -> C64 {
        if self.contains(n) {
            self.coeffs[(n + self.n_max as i64) as usize]
        } else {
            ZERO
        }
    }

    pub fn set(&mut self, n: i64, value: C64) -> Result<()> {
        if !self.contains(n) {
            return Err(Error::Band {
                n,
                n_max: self.n_max,
            });
        }
        let idx = (n + self.n_max as i64) as usize;
        self.coeffs[idx] = value;
        Ok(())
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let off = self.n_max as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - off, c))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = Σ self_n · conj(other_n)` over the common band.
    pub fn inner(&self, other: &FourierState) -> C64 {
        let n = self.n_max.min(other.n_max) as i64;
        (-n..=n).map(|m| self.get(m) * other.get(m).conj()).sum()
    }

    /// ℓ² distance; modes present in only one state count in full.
    pub fn distance(&self, other: &FourierState) -> f64 {
        let n = self.n_max.max(other.n_max) as i64;
        (-n..=n)
            .map(|m| (self.get(m) - other.get(m)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Zero-pad or truncate to a new band limit.
    pub fn rebanded(&self, n_max: usize) -> FourierState {
        let mut out = FourierState::zeros(n_max);
        out.picture = self.picture;
        out.time = self.time;
        let n = self.n_max.min(n_max) as i64;
        for m in -n..=n {
            out.coeffs[(m + n_max as i64) as usize] = self.get(m);
        }
        out
    }

    pub fn scale(&self, a: C64) -> FourierState {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    fn zip_with(&self, other: &FourierState, f: impl Fn(C64, C64) -> C64) -> FourierState {
        let n_max = self.n_max.max(other.n_max);
        let mut out = FourierState::zeros(n_max);
        out.picture = self.picture;
        out.time = self.time;
        let n = n_max as i64;
        for m in -n..=n {
            out.coeffs[(m + n) as usize] = f(self.get(m), other.get(m));
        }
        out
    }
}

impl Add for &FourierState {
    type Output = FourierState;
    fn add(self, rhs: &FourierState) -> FourierState {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &FourierState {
    type Output = FourierState;
    fn sub(self, rhs: &FourierState) -> FourierState {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<C64> for &FourierState {
    type Output = FourierState;
    fn mul(self, rhs: C64) -> FourierState {
        self.scale(rhs)
    }
}

/// Which dispersion multiplier drives the free flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `P(i∂ₓ)` with constant coefficients.
    #[default]
    Static,
    /// `n/(t+1) + [|n| ≤ t/2]·n²/(t+1)²`.
    Gaps,
    /// `n²/(t+1)²`: the Laplacian with coefficient `(1+t)^{-2}`.
    DecayingQuadratic,
    /// The `Gaps` multiplier with the modes `|n| ≤ cutoff` replaced by the
    /// frozen transport speed `n/scale`.
    BlockGaps { scale: f64, cutoff: u64 },
}

/// Dispersion symbol. For `Static`, `poly_coeffs = [p_1, …, p_d]` with `d ≤ 3`;
/// the other kinds ignore the coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub poly_coeffs: Vec<f64>,
    pub kind: SymbolKind,
}

impl Default for SymbolSpec {
    fn default() -> Self {
        Self::schrodinger()
    }
}

impl SymbolSpec {
    /// `P(x) = x²`, i.e. `-Δ`.
    pub fn schrodinger() -> Self {
        SymbolSpec {
            poly_coeffs: vec![0.0, 1.0],
            kind: SymbolKind::Static,
        }
    }

    pub fn polynomial(poly_coeffs: Vec<f64>) -> Result<Self> {
        if poly_coeffs.len() > 3 {
            return Err(Error::domain(format!(
                "symbol degree {} exceeds 3",
                poly_coeffs.len()
            )));
        }
        if poly_coeffs.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("non-finite symbol coefficient"));
        }
        Ok(SymbolSpec {
            poly_coeffs,
            kind: SymbolKind::Static,
        })
    }

    pub fn gaps() -> Self {
        SymbolSpec {
            poly_coeffs: Vec::new(),
            kind: SymbolKind::Gaps,
        }
    }

    pub fn decaying_quadratic() -> Self {
        SymbolSpec {
            poly_coeffs: Vec::new(),
            kind: SymbolKind::DecayingQuadratic,
        }
    }

    /// Low modes `|n| ≤ cutoff` move with speed `1/scale`; see [`SymbolKind::BlockGaps`].
    pub fn block_gaps(scale: f64, cutoff: u64) -> Result<Self> {
        let spec = SymbolSpec {
            poly_coeffs: Vec::new(),
            kind: SymbolKind::BlockGaps { scale, cutoff },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SymbolKind::Static => {
                Self::polynomial(self.poly_coeffs.clone())?;
            }
            SymbolKind::BlockGaps { scale, .. } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(Error::domain(format!("block scale {scale} must be positive")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.kind == SymbolKind::Static
    }

    /// Eigenvalue on `e^{inx}` at time `t`, without the coupling `k`.
    pub fn multiplier(&self, n: i64, t: f64) -> f64 {
        let nf = n as f64;
        match self.kind {
            SymbolKind::Static => {
                // (i∂ₓ)^j e^{inx} = (-n)^j e^{inx}
                let x = -nf;
                let mut pow = 1.0;
                let mut acc = 0.0;
                for &p in &self.poly_coeffs {
                    pow *= x;
                    acc += p * pow;
                }
                acc
            }
            SymbolKind::Gaps => {
                let s = t + 1.0;
                let quad = if (n.unsigned_abs() as f64) <= t / 2.0 {
                    nf * nf / (s * s)
                } else {
                    0.0
                };
                nf / s + quad
            }
            SymbolKind::DecayingQuadratic => {
                let s = t + 1.0;
                nf * nf / (s * s)
            }
            SymbolKind::BlockGaps { scale, cutoff } => {
                if n.unsigned_abs() <= cutoff {
                    nf / scale
                } else {
                    SymbolSpec::gaps().multiplier(n, t)
                }
            }
        }
    }

    /// `∫_{t0}^{t1} λ(n, τ) dτ` in closed form.
    pub fn phase_integral(&self, n: i64, t0: f64, t1: f64) -> f64 {
        let nf = n as f64;
        match self.kind {
            SymbolKind::Static => self.multiplier(n, 0.0) * (t1 - t0),
            SymbolKind::Gaps => {
                let lin = nf * ((1.0 + t1) / (1.0 + t0)).ln();
                let on = (2 * n.unsigned_abs()) as f64;
                let a = t0.max(on);
                let quad = if t1 > a {
                    nf * nf * (t1 - a) / ((1.0 + a) * (1.0 + t1))
                } else {
                    0.0
                };
                lin + quad
            }
            SymbolKind::DecayingQuadratic => nf * nf * (t1 - t0) / ((1.0 + t0) * (1.0 + t1)),
            SymbolKind::BlockGaps { scale, cutoff } => {
                if n.unsigned_abs() <= cutoff {
                    nf * (t1 - t0) / scale
                } else {
                    SymbolSpec::gaps().phase_integral(n, t0, t1)
                }
            }
        }
    }

    /// Times in `(t0, t1)` where the multiplier of some `|n| ≤ n_max` jumps.
    pub fn crossings(&self, n_max: usize, t0: f64, t1: f64) -> Vec<f64> {
        match self.kind {
            SymbolKind::Gaps => (1..=n_max)
                .map(|n| 2.0 * n as f64)
                .filter(|&c| c > t0 && c < t1)
                .collect(),
            SymbolKind::BlockGaps { cutoff, .. } => (cutoff as usize + 1..=n_max)
                .map(|n| 2.0 * n as f64)
                .filter(|&c| c > t0 && c < t1)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Upper bound of `|λ(n,t)|` over the band and `t ≥ t0`.
    pub fn max_multiplier(&self, n_max: usize, t0: f64) -> f64 {
        let n = n_max as f64;
        match self.kind {
            SymbolKind::Static => (0..=n_max as i64)
                .map(|m| self.multiplier(m, 0.0).abs().max(self.multiplier(-m, 0.0).abs()))
                .fold(0.0, f64::max),
            SymbolKind::Gaps => n / (1.0 + t0) + n * n / ((1.0 + t0) * (1.0 + t0)),
            SymbolKind::DecayingQuadratic => n * n / ((1.0 + t0) * (1.0 + t0)),
            SymbolKind::BlockGaps { scale, cutoff } => {
                let low = (cutoff as f64).min(n) / scale;
                low.max(n / (1.0 + t0) + n * n / ((1.0 + t0) * (1.0 + t0)))
            }
        }
    }
}

/// Checked form of [`SymbolSpec::multiplier`].
pub fn symbol_multiplier(spec: &SymbolSpec, n: i64, n_max: usize, t: f64) -> Result<f64> {
    if n.unsigned_abs() as usize > n_max {
        return Err(Error::Band { n, n_max });
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::domain(format!("time {t} must be finite and non-negative")));
    }
    Ok(spec.multiplier(n, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub alpha: f64,
    #[serde(default)]
    pub homogeneous: bool,
}

impl SobolevIndex {
    pub fn new(alpha: f64) -> Self {
        SobolevIndex {
            alpha,
            homogeneous: false,
        }
    }

    pub fn homogeneous(alpha: f64) -> Self {
        SobolevIndex {
            alpha,
            homogeneous: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.alpha) {
            return Err(Error::domain(format!(
                "Sobolev index {} outside [0, 2]",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Low,
    High,
}

/// `P_N` (low: `|n| ≤ N`) or `Q_N` (high: `|n| > N`).
pub fn project(state: &FourierState, cutoff: usize, part: Part) -> FourierState {
    let mut out = state.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let n = (i as i64 - state.n_max as i64).unsigned_abs() as usize;
        let keep = match part {
            Part::Low => n <= cutoff,
            Part::High => n > cutoff,
        };
        if !keep {
            *c = ZERO;
        }
    }
    out
}

/// Sobolev norm with weights `(1+|n|)^{2α}`.
pub fn sobolev_norm(state: &FourierState, idx: SobolevIndex) -> f64 {
    sobolev_norm_sqr_of(state.coeffs(), state.n_max, idx).sqrt()
}

pub(crate) fn sobolev_norm_sqr_of(coeffs: &[C64], n_max: usize, idx: SobolevIndex) -> f64 {
    let two_alpha = 2.0 * idx.alpha;
    coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let n = (i as i64 - n_max as i64).unsigned_abs();
            if idx.homogeneous && n == 0 {
                None
            } else {
                Some((1.0 + n as f64).powf(two_alpha) * c.norm_sqr())
            }
        })
        .sum()
}

/// `Σ_{|n|>μ} |û_n|²`.
pub fn tail_mass(state: &FourierState, mu: usize) -> f64 {
    tail_mass_of(state.coeffs(), state.n_max, mu)
}

pub(crate) fn tail_mass_of(coeffs: &[C64], n_max: usize, mu: usize) -> f64 {
    if mu >= n_max {
        return 0.0;
    }
    let cut = n_max - mu;
    coeffs[..cut]
        .iter()
        .chain(coeffs[coeffs.len() - cut..].iter())
        .map(|c| c.norm_sqr())
        .sum()
}

/// Truncated convolution `out_m = Σ_d v_d · x_{m-d}` with `v` indexed
/// `d ∈ [-l_max, l_max]` and `x`, `out` indexed over the same band.
pub(crate) fn convolve_into(v: &[C64], x: &[C64], out: &mut [C64]) {
    let l_max = (v.len() - 1) / 2;
    let len = x.len();
    debug_assert_eq!(out.len(), len);
    for (m, o) in out.iter_mut().enumerate() {
        // source index j = m - d, d = m - j
        let lo = m.saturating_sub(l_max);
        let hi = (m + l_max).min(len - 1);
        let mut acc = ZERO;
        for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
            let d = l_max + m - j;
            acc += v[d] * xj;
        }
        *o = acc;
    }
}

/// Multiplication by `V(·, t)`, truncated to the band of `state`.
pub fn apply_potential(pot: &PotentialModel, t: f64, state: &FourierState) -> FourierState {
    let v = pot.coeffs_at(t);
    let mut out = state.clone();
    convolve_into(&v, state.coeffs(), &mut out.coeffs);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn multiplier_examples() {
        let s = SymbolSpec::schrodinger();
        assert_eq!(symbol_multiplier(&s, 3, 4, 0.0).unwrap(), 9.0);
        let g = SymbolSpec::gaps();
        assert_abs_diff_eq!(g.multiplier(1, 3.0), 0.3125, epsilon = 1e-15);
        assert_abs_diff_eq!(g.multiplier(4, 3.0), 1.0, epsilon = 1e-15);
        assert!(matches!(
            symbol_multiplier(&s, 5, 4, 0.0),
            Err(Error::Band { n: 5, n_max: 4 })
        ));
    }

    #[test]
    fn polynomial_degree_is_capped() {
        assert!(SymbolSpec::polynomial(vec![1.0, 0.0, 0.0, 1.0]).is_err());
        let p = SymbolSpec::polynomial(vec![1.0]).unwrap();
        // P(x) = x acts as i∂ₓ, eigenvalue -n
        assert_eq!(p.multiplier(2, 0.0), -2.0);
    }

    #[test]
    fn gaps_multiplier_jumps_only_at_threshold() {
        let g = SymbolSpec::gaps();
        // |n| = 3 crosses at t = 6
        let below = g.multiplier(3, 6.0 - 1e-9);
        let at = g.multiplier(3, 6.0);
        assert_abs_diff_eq!(below, 3.0 / (7.0 - 1e-9), epsilon = 1e-12);
        assert_abs_diff_eq!(at, 3.0 / 7.0 + 9.0 / 49.0, epsilon = 1e-12);
        // continuous away from the crossing
        let a = g.multiplier(3, 8.0);
        let b = g.multiplier(3, 8.0 + 1e-7);
        assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn phase_integrals_match_quadrature() {
        for spec in [
            SymbolSpec::schrodinger(),
            SymbolSpec::gaps(),
            SymbolSpec::decaying_quadratic(),
            SymbolSpec::block_gaps(6.0, 2).unwrap(),
        ] {
            for n in [-5i64, -1, 0, 2, 4] {
                let (t0, t1) = (0.3, 13.7);
                let steps = 400_000;
                let h = (t1 - t0) / steps as f64;
                let num: f64 = (0..steps)
                    .map(|i| spec.multiplier(n, t0 + (i as f64 + 0.5) * h) * h)
                    .sum();
                let exact = spec.phase_integral(n, t0, t1);
                assert!(
                    (num - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "{spec:?} n={n}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn projection_examples() {
        let d0 = FourierState::one(3);
        assert_eq!(project(&d0, 0, Part::Low), d0);
        assert_eq!(project(&d0, 0, Part::High).norm(), 0.0);
        let s = FourierState::from_modes(3, &[(-2, ONE), (1, ONE)]).unwrap();
        let hi = project(&s, 1, Part::High);
        assert_eq!(hi.get(-2), ONE);
        assert_eq!(hi.get(1), ZERO);
    }

    #[test]
    fn sobolev_examples() {
        let d0 = FourierState::one(2);
        assert_abs_diff_eq!(sobolev_norm(&d0, SobolevIndex::new(0.5)), 1.0);
        let d1 = FourierState::delta(2, 1).unwrap();
        assert_abs_diff_eq!(
            sobolev_norm(&d1, SobolevIndex::homogeneous(0.5)),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(sobolev_norm(&d0, SobolevIndex::homogeneous(1.3)), 0.0);
    }

    #[test]
    fn tail_examples() {
        assert_eq!(tail_mass(&FourierState::one(4), 0), 0.0);
        assert_eq!(tail_mass(&FourierState::delta(4, 2).unwrap(), 1), 1.0);
        let s = FourierState::from_modes(4, &[(4, ONE), (-3, ONE)]).unwrap();
        assert_eq!(tail_mass(&s, 4), 0.0);
        assert_eq!(tail_mass(&s, 3), 1.0);
    }

    #[test]
    fn band_violation_is_an_error() {
        let mut s = FourierState::zeros(2);
        assert!(s.set(3, ONE).is_err());
        assert_eq!(s.get(7), ZERO);
    }
}
