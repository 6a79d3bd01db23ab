//! Potentials `V(x,t) = Σ_l V̂_l(t) e^{ilx}` with piecewise-linear coefficient
//! profiles in time.
//!
//! Each model stores coefficient rows at a strictly increasing list of nodes.
//! Between nodes the coefficients are interpolated linearly; before the first
//! and after the last node they are held constant. Every time integral of
//! `V̂_l(t) e^{iωt}` therefore splits into cells with exact antiderivatives.

use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectral::{C64, ZERO};

/// Number of equispaced points used for sup-norm certificates in `x`.
pub const X_GRID: usize = 512;

/// Mode support cap for potentials.
pub const MAX_L: usize = 64;

const FORMAT: &str = "sobolev-lab/potential@1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    RandomBounded,
    Decaying,
    OscillatoryQ,
    ConstantImag,
    Custom,
}

/// Declared bound on `sup_x |V(x,t)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Envelope {
    #[default]
    None,
    Constant {
        bound: f64,
    },
    /// `c (t+1)^{-γ}`
    Decaying {
        c: f64,
        gamma: f64,
    },
    /// `λ (t+1)^{-γ}`, the bound on `|V| = |Q_x|/(t+1)` implied by the `Q_x` envelope.
    Oscillatory {
        lambda: f64,
        gamma: f64,
    },
}

impl Envelope {
    pub fn at(&self, t: f64) -> Option<f64> {
        match *self {
            Envelope::None => None,
            Envelope::Constant { bound } => Some(bound),
            Envelope::Decaying { c, gamma } => Some(c * (t + 1.0).powf(-gamma)),
            Envelope::Oscillatory { lambda, gamma } => Some(lambda * (t + 1.0).powf(-gamma)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub kind: PotentialKind,
    pub l_max: usize,
    pub reality: bool,
    /// Profile nodes, strictly increasing.
    pub times: Vec<f64>,
    /// `coefficients[i][l + l_max] = V̂_l(times[i])`.
    pub coefficients: Vec<Vec<C64>>,
    #[serde(default)]
    pub envelope: Envelope,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub decay_gamma: Option<f64>,
    #[serde(default)]
    pub amplitude_lambda: Option<f64>,
}

/// Linear piece `V̂_l(t) = value + slope·(t - start)` valid on `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearPiece {
    pub start: f64,
    pub end: f64,
    pub value: C64,
    pub slope: C64,
}

impl PotentialModel {
    pub fn zero() -> Self {
        PotentialModel {
            kind: PotentialKind::Custom,
            l_max: 0,
            reality: true,
            times: vec![0.0],
            coefficients: vec![vec![ZERO]],
            envelope: Envelope::Constant { bound: 0.0 },
            seed: None,
            decay_gamma: None,
            amplitude_lambda: None,
        }
    }

    /// General constructor; checks shapes, finiteness and (if requested) the
    /// reality symmetry.
    pub fn custom(
        l_max: usize,
        times: Vec<f64>,
        coefficients: Vec<Vec<C64>>,
        reality: bool,
    ) -> Result<Self> {
        let pot = PotentialModel {
            kind: PotentialKind::Custom,
            l_max,
            reality,
            times,
            coefficients,
            envelope: Envelope::None,
            seed: None,
            decay_gamma: None,
            amplitude_lambda: None,
        };
        pot.validate()?;
        Ok(pot)
    }

    /// `V(x,t) = g(t)` with `g` piecewise linear through `(times[i], values[i])`.
    pub fn scalar(times: Vec<f64>, values: &[f64]) -> Result<Self> {
        let rows = values.iter().map(|&g| vec![C64::new(g, 0.0)]).collect();
        Self::custom(0, times, rows, true)
    }

    /// Time-independent trigonometric polynomial with the given modes.
    pub fn stationary(l_max: usize, modes: &[(i64, C64)], reality: bool) -> Result<Self> {
        let mut row = vec![ZERO; 2 * l_max + 1];
        for &(l, c) in modes {
            if l.unsigned_abs() as usize > l_max {
                return Err(Error::Band { n: l, n_max: l_max });
            }
            row[(l + l_max as i64) as usize] += c;
        }
        Self::custom(l_max, vec![0.0], vec![row], reality)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_max > MAX_L {
            return Err(Error::domain(format!(
                "mode support {} exceeds {MAX_L}",
                self.l_max
            )));
        }
        if self.times.is_empty() {
            return Err(Error::domain("potential needs at least one time node"));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("non-finite time node"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("time nodes must be strictly increasing"));
        }
        if self.coefficients.len() != self.times.len() {
            return Err(Error::domain(format!(
                "{} coefficient rows for {} time nodes",
                self.coefficients.len(),
                self.times.len()
            )));
        }
        let width = 2 * self.l_max + 1;
        for (i, row) in self.coefficients.iter().enumerate() {
            if row.len() != width {
                return Err(Error::domain(format!(
                    "row {i} has {} coefficients, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::domain(format!("non-finite coefficient in row {i}")));
            }
            if self.reality {
                let scale = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
                for l in 0..=self.l_max {
                    let a = row[self.l_max + l];
                    let b = row[self.l_max - l].conj();
                    if (a - b).norm() > 1e-12 * scale.max(1e-300) {
                        return Err(Error::domain(format!(
                            "reality symmetry broken at l={l}, t={}",
                            self.times[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        2 * self.l_max + 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().flatten().all(|c| *c == ZERO)
    }

    /// Index of the cell containing `t`: `None` before the first node,
    /// `Some(i)` for `[t_i, t_{i+1})` (the last node maps to the hold region).
    pub(crate) fn cell(&self, t: f64) -> Option<usize> {
        if t < self.times[0] {
            return None;
        }
        Some(self.times.partition_point(|&s| s <= t) - 1)
    }

    /// All coefficients at time `t`, indexed `l + l_max`.
    pub fn coeffs_at(&self, t: f64) -> Vec<C64> {
        let mut out = vec![ZERO; self.width()];
        self.coeffs_into(t, &mut out);
        out
    }

    pub fn coeffs_into(&self, t: f64, out: &mut [C64]) {
        let last = self.times.len() - 1;
        match self.cell(t) {
            None => out.copy_from_slice(&self.coefficients[0]),
            Some(i) if i >= last => out.copy_from_slice(&self.coefficients[last]),
            Some(i) => {
                let (a, b) = (self.times[i], self.times[i + 1]);
                let s = (t - a) / (b - a);
                let (ra, rb) = (&self.coefficients[i], &self.coefficients[i + 1]);
                for ((o, &x), &y) in out.iter_mut().zip(ra).zip(rb) {
                    *o = x + (y - x) * s;
                }
            }
        }
    }

    /// `V̂_l(t)`; zero outside the mode support.
    pub fn coeff(&self, l: i64, t: f64) -> C64 {
        if l.unsigned_abs() as usize > self.l_max {
            return ZERO;
        }
        let idx = (l + self.l_max as i64) as usize;
        let last = self.times.len() - 1;
        match self.cell(t) {
            None => self.coefficients[0][idx],
            Some(i) if i >= last => self.coefficients[last][idx],
            Some(i) => {
                let (a, b) = (self.times[i], self.times[i + 1]);
                let s = (t - a) / (b - a);
                let (x, y) = (self.coefficients[i][idx], self.coefficients[i + 1][idx]);
                x + (y - x) * s
            }
        }
    }

    /// `V(x,t)` by direct summation.
    pub fn value(&self, x: f64, t: f64) -> C64 {
        let row = self.coeffs_at(t);
        let l_max = self.l_max as i64;
        row.iter()
            .enumerate()
            .map(|(i, c)| c * C64::from_polar(1.0, (i as i64 - l_max) as f64 * x))
            .sum()
    }

    /// Interior nodes strictly inside `(t0, t1)`.
    pub fn breakpoints_in(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.times
            .iter()
            .copied()
            .filter(|&s| s > t0 && s < t1)
            .collect()
    }

    /// The linear piece of `V̂_l` that contains `t`; pieces are closed at both ends.
    pub fn piece(&self, l: i64, t: f64) -> LinearPiece {
        let last = self.times.len() - 1;
        match self.cell(t) {
            None => LinearPiece {
                start: f64::NEG_INFINITY,
                end: self.times[0],
                value: self.coeff(l, self.times[0]),
                slope: ZERO,
            },
            Some(i) if i >= last => LinearPiece {
                start: self.times[last],
                end: f64::INFINITY,
                value: self.coeff(l, self.times[last]),
                slope: ZERO,
            },
            Some(i) => {
                let (a, b) = (self.times[i], self.times[i + 1]);
                let (x, y) = (self.coeff(l, a), self.coeff(l, b));
                LinearPiece {
                    start: a,
                    end: b,
                    value: x,
                    slope: (y - x) / (b - a),
                }
            }
        }
    }

    /// `∫_{t0}^{t1} V̂_l(t) e^{iωt} dt` over any interval, split at nodes.
    pub fn integrate_mode(&self, l: i64, omega: f64, t0: f64, t1: f64) -> C64 {
        if l.unsigned_abs() as usize > self.l_max || t1 == t0 {
            return ZERO;
        }
        let (lo, hi, sign) = if t1 > t0 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
        let mut acc = ZERO;
        let mut a = lo;
        for b in self
            .breakpoints_in(lo, hi)
            .into_iter()
            .chain(std::iter::once(hi))
        {
            let p = self.piece(l, 0.5 * (a + b));
            let va = p.value + p.slope * if p.start.is_finite() { a - p.start } else { 0.0 };
            acc += linear_exp_integral(va, p.slope, omega, a, b - a);
            a = b;
        }
        acc * sign
    }

    /// Multiply every coefficient by `factor` (e.g. amplitude scans).
    pub fn scaled(&self, factor: f64) -> PotentialModel {
        let mut out = self.clone();
        out.coefficients
            .iter_mut()
            .flatten()
            .for_each(|c| *c *= factor);
        out.envelope = match out.envelope {
            Envelope::None => Envelope::None,
            Envelope::Constant { bound } => Envelope::Constant {
                bound: bound * factor.abs(),
            },
            Envelope::Decaying { c, gamma } => Envelope::Decaying {
                c: c * factor.abs(),
                gamma,
            },
            Envelope::Oscillatory { lambda, gamma } => Envelope::Oscillatory {
                lambda: lambda * factor.abs(),
                gamma,
            },
        };
        out.amplitude_lambda = out.amplitude_lambda.map(|l| l * factor.abs());
        out
    }

    /// `sup_x |V(x, t)|` over the certificate grid.
    pub fn sup_at(&self, t: f64) -> f64 {
        sup_abs(&self.coeffs_at(t))
    }

    /// Checks the declared envelope at every node on the certificate grid.
    pub fn check_envelope(&self) -> Result<()> {
        for (i, &t) in self.times.iter().enumerate() {
            if let Some(bound) = self.envelope.at(t) {
                let value = sup_abs(&self.coefficients[i]);
                if value > bound * (1.0 + 1e-12) + 1e-300 {
                    return Err(Error::Envelope {
                        l: dominant_mode(&self.coefficients[i], self.l_max, false),
                        t,
                        value,
                        bound,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct File<'a> {
            format: &'static str,
            #[serde(flatten)]
            model: &'a PotentialModel,
        }
        Ok(serde_json::to_string_pretty(&File {
            format: FORMAT,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            format: String,
            #[serde(flatten)]
            model: PotentialModel,
        }
        let file: File = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(Error::Config {
                key: "format".into(),
                message: format!("expected {FORMAT}, found {}", file.format),
            });
        }
        file.model.validate()?;
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `∫_0^h (a + b s) e^{iω(t0+s)} ds`.
pub fn linear_exp_integral(a: C64, b: C64, omega: f64, t0: f64, h: f64) -> C64 {
    let z = C64::new(0.0, omega * h);
    let (phi1, psi) = if z.norm() < 1.0 {
        // φ1 = Σ z^j/(j+1)!,  ψ = Σ z^j/(j!(j+2))
        let mut phi1 = ZERO;
        let mut psi = ZERO;
        let mut zj_over_fact = C64::new(1.0, 0.0);
        for j in 0..30 {
            phi1 += zj_over_fact / (j as f64 + 1.0);
            psi += zj_over_fact / (j as f64 + 2.0);
            zj_over_fact *= z / (j as f64 + 1.0);
            if zj_over_fact.norm() < 1e-18 {
                break;
            }
        }
        (phi1, psi)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z))
    };
    C64::from_polar(1.0, omega * t0) * (a * h * phi1 + b * h * h * psi)
}

/// Exact `∫_{t0}^{t1} V̂_l(t) e^{iωt} dt` on a single linear piece.
pub fn oscillatory_cell_integral(
    pot: &PotentialModel,
    l: i64,
    omega: f64,
    t0: f64,
    t1: f64,
) -> Result<C64> {
    if !(t1 >= t0) {
        return Err(Error::Contract(format!("cell [{t0}, {t1}] is reversed")));
    }
    let p = pot.piece(l, 0.5 * (t0 + t1));
    let eps = 1e-12 * (1.0 + t0.abs().max(t1.abs()));
    if t0 < p.start - eps || t1 > p.end + eps {
        return Err(Error::Contract(format!(
            "cell [{t0}, {t1}] straddles a profile breakpoint of mode {l}"
        )));
    }
    let va = p.value + p.slope * if p.start.is_finite() { t0 - p.start } else { 0.0 };
    Ok(linear_exp_integral(va, p.slope, omega, t0, t1 - t0))
}

/// `sup |Σ_l c_l e^{ilx}|` over `X_GRID` equispaced points.
pub fn sup_abs(row: &[C64]) -> f64 {
    let l_max = (row.len() - 1) / 2;
    if l_max == 0 {
        return row[0].norm();
    }
    (0..X_GRID)
        .map(|j| {
            let x = 2.0 * std::f64::consts::PI * j as f64 / X_GRID as f64;
            eval_trig(row, l_max, x).norm()
        })
        .fold(0.0, f64::max)
}

/// Sup of the x-derivative over the certificate grid.
fn sup_abs_derivative(row: &[C64]) -> f64 {
    let l_max = (row.len() - 1) / 2;
    let d: Vec<C64> = row
        .iter()
        .enumerate()
        .map(|(i, c)| c * C64::new(0.0, i as f64 - l_max as f64))
        .collect();
    sup_abs(&d)
}

fn eval_trig(row: &[C64], l_max: usize, x: f64) -> C64 {
    let step = C64::from_polar(1.0, x);
    let mut z = C64::from_polar(1.0, -(l_max as f64) * x);
    let mut acc = ZERO;
    for c in row {
        acc += c * z;
        z *= step;
    }
    acc
}

fn dominant_mode(row: &[C64], l_max: usize, weighted: bool) -> i64 {
    row.iter()
        .enumerate()
        .map(|(i, c)| {
            let l = i as i64 - l_max as i64;
            let w = if weighted { l.abs() as f64 } else { 1.0 };
            (l, w * c.norm())
        })
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

fn random_row(rng: &mut rng::Rng, l_max: usize, reality: bool) -> Vec<C64> {
    let mut row = vec![ZERO; 2 * l_max + 1];
    let gauss = |rng: &mut rng::Rng| -> f64 { rng.sample(StandardNormal) };
    if reality {
        row[l_max] = C64::new(gauss(rng), 0.0);
        for l in 1..=l_max {
            let amp = 1.0 / (1.0 + l as f64) / std::f64::consts::SQRT_2;
            let c = C64::new(gauss(rng), gauss(rng)) * amp;
            row[l_max + l] = c;
            row[l_max - l] = c.conj();
        }
    } else {
        for (i, slot) in row.iter_mut().enumerate() {
            let l = i as i64 - l_max as i64;
            let amp = 1.0 / (1.0 + l.abs() as f64) / std::f64::consts::SQRT_2;
            *slot = C64::new(gauss(rng), gauss(rng)) * amp;
        }
    }
    row
}

fn rescale_to(row: &mut [C64], target: f64) {
    let s = sup_abs(row);
    let f = if s > 0.0 { target / s } else { 0.0 };
    row.iter_mut().for_each(|c| *c *= f);
}

fn check_grid(time_grid: &[f64]) -> Result<()> {
    if time_grid.is_empty() {
        return Err(Error::domain("empty time grid"));
    }
    if time_grid.windows(2).any(|w| w[1] <= w[0]) || time_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// `n + 1` equispaced nodes on `[t0, t1]`.
pub fn uniform_nodes(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| {
            if i == n {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Real random potential with `sup_x |V(x,t_i)| = bound` at every node
/// (hence `≤ bound` everywhere, by convexity of the interpolation).
pub fn make_random_bounded(
    seed: u64,
    l_max: usize,
    time_grid: &[f64],
    bound: f64,
) -> Result<PotentialModel> {
    make_random(seed, l_max, time_grid, bound, true)
}

/// Complex-valued variant of [`make_random_bounded`] (no reality symmetry).
pub fn make_random_complex(
    seed: u64,
    l_max: usize,
    time_grid: &[f64],
    bound: f64,
) -> Result<PotentialModel> {
    make_random(seed, l_max, time_grid, bound, false)
}

fn make_random(
    seed: u64,
    l_max: usize,
    time_grid: &[f64],
    bound: f64,
    reality: bool,
) -> Result<PotentialModel> {
    check_grid(time_grid)?;
    if !(bound >= 0.0) || !bound.is_finite() {
        return Err(Error::domain(format!("bound {bound} must be finite and >= 0")));
    }
    let mut rng = rng::stream(seed, 0);
    let coefficients = time_grid
        .iter()
        .map(|_| {
            let mut row = random_row(&mut rng, l_max, reality);
            rescale_to(&mut row, bound);
            row
        })
        .collect();
    let pot = PotentialModel {
        kind: PotentialKind::RandomBounded,
        l_max,
        reality,
        times: time_grid.to_vec(),
        coefficients,
        envelope: Envelope::Constant { bound },
        seed: Some(seed),
        decay_gamma: None,
        amplitude_lambda: None,
    };
    pot.validate()?;
    Ok(pot)
}

/// Real random potential under the envelope `c (t+1)^{-γ}`.
///
/// Node `i` is scaled to the envelope value at the next node, so the
/// interpolated profile stays below the envelope on every cell.
pub fn make_decaying(
    seed: u64,
    l_max: usize,
    gamma: f64,
    c: f64,
    time_grid: &[f64],
) -> Result<PotentialModel> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("decay exponent {gamma} outside (0, 1]")));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("envelope constant {c} must be >= 0")));
    }
    check_grid(time_grid)?;
    let envelope = Envelope::Decaying { c, gamma };
    let mut rng = rng::stream(seed, 1);
    let coefficients = (0..time_grid.len())
        .map(|i| {
            let t_next = time_grid[(i + 1).min(time_grid.len() - 1)];
            let mut row = random_row(&mut rng, l_max, true);
            rescale_to(&mut row, envelope.at(t_next).unwrap_or(0.0));
            row
        })
        .collect();
    let pot = PotentialModel {
        kind: PotentialKind::Decaying,
        l_max,
        reality: true,
        times: time_grid.to_vec(),
        coefficients,
        envelope,
        seed: Some(seed),
        decay_gamma: Some(gamma),
        amplitude_lambda: None,
    };
    pot.validate()?;
    Ok(pot)
}

/// `V ≡ i c`.
pub fn make_constant_imag(c: f64) -> PotentialModel {
    PotentialModel {
        kind: PotentialKind::ConstantImag,
        l_max: 0,
        reality: false,
        times: vec![0.0],
        coefficients: vec![vec![C64::new(0.0, c)]],
        envelope: Envelope::Constant { bound: c.abs() },
        seed: None,
        decay_gamma: None,
        amplitude_lambda: None,
    }
}

/// `Q(x,t)` tabulated at nodes, for `V = Q_x/(t+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryQSpec {
    pub l_max: usize,
    pub times: Vec<f64>,
    /// `q_table[i][l + l_max] = Q̂_l(times[i])`.
    pub q_table: Vec<Vec<C64>>,
    pub gamma: f64,
    pub lambda: f64,
    pub start_t: f64,
}

impl OscillatoryQSpec {
    /// `Q(x,t) = λ (t+1)^{-γ} q(x)` with `q` given by its modes.
    pub fn separable(
        shape: &[(i64, C64)],
        l_max: usize,
        gamma: f64,
        lambda: f64,
        start_t: f64,
        times: Vec<f64>,
    ) -> Result<Self> {
        let mut q = vec![ZERO; 2 * l_max + 1];
        for &(l, c) in shape {
            if l.unsigned_abs() as usize > l_max {
                return Err(Error::Band { n: l, n_max: l_max });
            }
            q[(l + l_max as i64) as usize] += c;
        }
        let q_table = times
            .iter()
            .map(|&t| {
                let s = lambda * (t + 1.0).powf(-gamma);
                q.iter().map(|c| c * s).collect()
            })
            .collect();
        Ok(OscillatoryQSpec {
            l_max,
            times,
            q_table,
            gamma,
            lambda,
            start_t,
        })
    }

    /// Random real shape `q` normalized to `max(‖q‖_∞, ‖q_x‖_∞) = 1`, then
    /// [`OscillatoryQSpec::separable`].
    pub fn random(
        seed: u64,
        l_max: usize,
        gamma: f64,
        lambda: f64,
        start_t: f64,
        times: Vec<f64>,
    ) -> Result<Self> {
        let mut rng = rng::stream(seed, 2);
        let mut row = random_row(&mut rng, l_max, true);
        // Q_x carries no mean, so drop it from Q as well.
        row[l_max] = ZERO;
        let norm = sup_abs(&row).max(sup_abs_derivative(&row));
        if norm > 0.0 {
            row.iter_mut().for_each(|c| *c /= norm);
        }
        let shape: Vec<(i64, C64)> = row
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as i64 - l_max as i64, c))
            .collect();
        Self::separable(&shape, l_max, gamma, lambda, start_t, times)
    }
}

/// `V̂_l(t_i) = i·l·Q̂_l(t_i)/(t_i+1)` at every node, linear in between.
///
/// `Q` is symmetrized to be real first. Both envelopes
/// `‖Q‖_∞ ≤ λ(t+1)^{-γ}` and `‖Q_x‖_∞ ≤ λ(t+1)^{1-γ}` are verified at the nodes on
/// the certificate grid; equality is accepted.
pub fn make_oscillatory(spec: &OscillatoryQSpec) -> Result<PotentialModel> {
    if !(spec.gamma > 0.75) {
        return Err(Error::domain(format!(
            "oscillation exponent {} must exceed 3/4",
            spec.gamma
        )));
    }
    if !(spec.lambda >= 0.0) || !spec.lambda.is_finite() {
        return Err(Error::domain(format!("amplitude {} must be >= 0", spec.lambda)));
    }
    if !(spec.start_t >= 0.0) {
        return Err(Error::domain("start time must be >= 0"));
    }
    check_grid(&spec.times)?;
    if spec.q_table.len() != spec.times.len() {
        return Err(Error::domain("Q table and time grid differ in length"));
    }
    let l_max = spec.l_max;
    let mut coefficients = Vec::with_capacity(spec.times.len());
    for (&t, q_raw) in spec.times.iter().zip(&spec.q_table) {
        if q_raw.len() != 2 * l_max + 1 {
            return Err(Error::domain("Q row has the wrong width"));
        }
        let q: Vec<C64> = (0..q_raw.len())
            .map(|i| 0.5 * (q_raw[i] + q_raw[2 * l_max - i].conj()))
            .collect();
        let tol = 1.0 + 1e-12;
        let q_bound = spec.lambda * (t + 1.0).powf(-spec.gamma);
        let q_sup = sup_abs(&q);
        if q_sup > q_bound * tol {
            return Err(Error::Envelope {
                l: dominant_mode(&q, l_max, false),
                t,
                value: q_sup,
                bound: q_bound,
            });
        }
        let qx_bound = spec.lambda * (t + 1.0).powf(1.0 - spec.gamma);
        let qx_sup = sup_abs_derivative(&q);
        if qx_sup > qx_bound * tol {
            return Err(Error::Envelope {
                l: dominant_mode(&q, l_max, true),
                t,
                value: qx_sup,
                bound: qx_bound,
            });
        }
        let row = q
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let l = i as f64 - l_max as f64;
                C64::new(0.0, l) * c / (t + 1.0)
            })
            .collect();
        coefficients.push(row);
    }
    let pot = PotentialModel {
        kind: PotentialKind::OscillatoryQ,
        l_max,
        reality: true,
        times: spec.times.clone(),
        coefficients,
        envelope: Envelope::None,
        seed: None,
        decay_gamma: Some(spec.gamma),
        amplitude_lambda: Some(spec.lambda),
    };
    pot.validate()?;
    Ok(pot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn cell_integral_examples() {
        let flat = PotentialModel::stationary(0, &[(0, one())], false).unwrap();
        let a = oscillatory_cell_integral(&flat, 0, 0.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(a.re, 1.0, epsilon = 1e-15);
        let b = oscillatory_cell_integral(&flat, 0, 2.0 * PI, 0.0, 1.0).unwrap();
        assert!(b.norm() < 1e-14);
        let ramp = PotentialModel::scalar(vec![0.0, 2.0], &[0.0, 2.0]).unwrap();
        let c = oscillatory_cell_integral(&ramp, 0, 0.0, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(c.re, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn straddling_cell_is_a_contract_error() {
        let p = PotentialModel::scalar(vec![0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            oscillatory_cell_integral(&p, 0, 1.0, 0.5, 1.5),
            Err(Error::Contract(_))
        ));
        // integrate_mode splits on its own
        let v = p.integrate_mode(0, 0.0, 0.5, 1.5);
        assert_abs_diff_eq!(v.re, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn cell_integral_matches_simpson_on_random_cells() {
        let mut rng = rng::stream(7, 0);
        for _ in 0..200 {
            let a = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let omega = rng.gen_range(-50.0..50.0);
            let t0 = rng.gen_range(0.0..10.0);
            let h = rng.gen_range(1e-3..2.0);
            let exact = linear_exp_integral(a, b, omega, t0, h);
            let n = 20_000;
            let dh = h / n as f64;
            let f = |s: f64| (a + b * s) * C64::from_polar(1.0, omega * (t0 + s));
            let mut acc = f(0.0) + f(h);
            for i in 1..n {
                acc += f(i as f64 * dh) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc *= dh / 3.0;
            assert!((acc - exact).norm() < 1e-9 * (1.0 + exact.norm()));
        }
    }

    #[test]
    fn random_bounded_examples() {
        let grid = uniform_nodes(0.0, 4.0, 8);
        let p = make_random_bounded(1, 0, &grid, 1.0).unwrap();
        for t in [0.0, 0.3, 2.2, 4.0] {
            assert!(p.coeff(0, t).norm() <= 1.0 + 1e-15);
            assert_eq!(p.coeff(0, t).im, 0.0);
        }
        let q = make_random_bounded(1, 0, &grid, 1.0).unwrap();
        assert_eq!(p, q);
        assert!(make_random_bounded(3, 5, &grid, 0.0).unwrap().is_zero());
        let r = make_random_bounded(3, 5, &grid, 2.0).unwrap();
        r.check_envelope().unwrap();
        for &t in &grid {
            assert_abs_diff_eq!(r.sup_at(t), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn decaying_envelope_holds_between_nodes() {
        let grid = uniform_nodes(0.0, 10.0, 10);
        let p = make_decaying(4, 3, 1.0, 1.0, &grid).unwrap();
        assert!(p.sup_at(3.0) <= 0.25 + 1e-12);
        for j in 0..200 {
            let t = j as f64 * 0.05;
            assert!(p.sup_at(t) <= (1.0 + t).powf(-1.0) * (1.0 + 1e-12));
        }
        let q = make_decaying(5, 3, 1.0, 1.0, &grid).unwrap();
        assert_ne!(p.coefficients, q.coefficients);
        assert!(make_decaying(1, 2, 0.0, 1.0, &grid).is_err());
        let s = make_decaying(1, 0, 0.5, 2.0, &grid).unwrap();
        for j in 0..100 {
            let t = j as f64 * 0.1;
            assert!(s.coeff(0, t).norm() <= 2.0 * (1.0 + t).powf(-0.5) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn oscillatory_cosine_example() {
        let (lambda, gamma) = (0.3, 0.9);
        let times = uniform_nodes(0.0, 4.0, 4);
        let half = C64::new(0.5, 0.0);
        let spec =
            OscillatoryQSpec::separable(&[(1, half), (-1, half)], 1, gamma, lambda, 0.0, times)
                .unwrap();
        let v = make_oscillatory(&spec).unwrap();
        for &t in &v.times {
            let amp = lambda * (t + 1.0).powf(-gamma - 1.0);
            // -amp sin x = amp·(i/2) e^{ix} - amp·(i/2) e^{-ix}
            assert!((v.coeff(1, t) - C64::new(0.0, amp / 2.0)).norm() < 1e-15);
            assert!((v.coeff(-1, t) - C64::new(0.0, -amp / 2.0)).norm() < 1e-15);
            assert_eq!(v.coeff(0, t), ZERO);
            assert_abs_diff_eq!(v.value(PI / 2.0, t).re, -amp, epsilon = 1e-14);
        }
        let flat = OscillatoryQSpec::separable(
            &[(0, one())],
            1,
            gamma,
            lambda,
            0.0,
            uniform_nodes(0.0, 1.0, 1),
        )
        .unwrap();
        assert!(make_oscillatory(&flat).unwrap().is_zero());
        let zero = OscillatoryQSpec::random(3, 4, gamma, 0.0, 0.0, uniform_nodes(0.0, 1.0, 2))
            .unwrap();
        assert!(make_oscillatory(&zero).unwrap().is_zero());
    }

    #[test]
    fn oscillatory_envelope_violation_names_the_mode() {
        let spec = OscillatoryQSpec::separable(
            &[(3, C64::new(1.0, 0.0)), (-3, C64::new(1.0, 0.0))],
            3,
            0.9,
            1.0,
            0.0,
            vec![0.0, 1.0],
        )
        .unwrap();
        match make_oscillatory(&spec) {
            Err(Error::Envelope { l, t, .. }) => {
                assert_eq!(l.abs(), 3);
                assert_eq!(t, 0.0);
            }
            other => panic!("expected envelope error, got {other:?}"),
        }
    }

    #[test]
    fn constant_imag_examples() {
        let p = make_constant_imag(1.0);
        assert_eq!(p.coeff(0, 7.0), C64::new(0.0, 1.0));
        assert!(!p.reality);
        assert!(make_constant_imag(0.0).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let grid = uniform_nodes(0.0, 2.0, 4);
        let p = make_random_bounded(9, 3, &grid, 1.0).unwrap();
        let text = p.to_json().unwrap();
        assert!(text.contains("\"format\""));
        let q = PotentialModel::from_json(&text).unwrap();
        assert_eq!(p, q);
        let broken = text.replace(FORMAT, "something-else");
        assert!(PotentialModel::from_json(&broken).is_err());
    }

    #[test]
    fn reality_symmetry_at_random_probes() {
        let grid = uniform_nodes(0.0, 5.0, 7);
        let p = make_random_bounded(11, 6, &grid, 1.0).unwrap();
        let mut rng = rng::stream(12, 0);
        for _ in 0..100 {
            let l = rng.gen_range(-6i64..=6);
            let t = rng.gen_range(0.0..5.0);
            assert!((p.coeff(-l, t) - p.coeff(l, t).conj()).norm() < 1e-15);
        }
    }
}
