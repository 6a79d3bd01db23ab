//! Exact solutions of `iν_t = ik c(t) ν_x + Vν` along characteristics.
//!
//! The characteristic through `(x, t)` is `X(s) = x + k∫_s^t c`, so
//! `ν(x,t) = exp(-i μ(x,t))` with `μ(x,t) = ∫ V(X(s), s) ds`. For trigonometric
//! potentials with piecewise-linear profiles every mode of `μ` is a sum of
//! closed-form cell integrals.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{FourierState, C64, ZERO};

/// Transport speed `c(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Speed {
    /// `c = 1/scale`, started at `t = start`.
    Frozen { start: f64, scale: f64 },
    /// `c = 1/(1+t)`, started at `t = 0`.
    Logarithmic,
    /// `c = 2^{-j}` on `[2^j, 2^{j+1})` and `c = 1` on `[0, 1)`, started at `t = 0`.
    Diadic,
}

impl Speed {
    pub fn start(&self) -> f64 {
        match *self {
            Speed::Frozen { start, .. } => start,
            _ => 0.0,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Speed::Frozen { scale, .. } => 1.0 / scale,
            Speed::Logarithmic => 1.0 / (1.0 + t),
            Speed::Diadic => {
                if t < 1.0 {
                    1.0
                } else {
                    1.0 / diadic_floor(t)
                }
            }
        }
    }

    /// `∫_s^t c`.
    pub fn travel(&self, s: f64, t: f64) -> f64 {
        match *self {
            Speed::Frozen { scale, .. } => (t - s) / scale,
            Speed::Logarithmic => ((1.0 + t) / (1.0 + s)).ln(),
            Speed::Diadic => diadic_clock(t) - diadic_clock(s),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Speed::Frozen { start, scale } = *self {
            if !(scale > 0.0 && scale.is_finite()) || !(start >= 0.0) {
                return Err(Error::domain(format!(
                    "frozen speed needs scale > 0 and start >= 0, got {scale}, {start}"
                )));
            }
        }
        Ok(())
    }
}

/// Largest power of two `≤ t`, for `t ≥ 1`.
fn diadic_floor(t: f64) -> f64 {
    let mut p = 1.0;
    while 2.0 * p <= t {
        p *= 2.0;
    }
    p
}

/// `∫_0^t c` for the diadic speed: one unit per completed block.
fn diadic_clock(t: f64) -> f64 {
    if t < 1.0 {
        return t;
    }
    let p = diadic_floor(t);
    1.0 + p.log2() + (t - p) / p
}

fn expm1(w: C64) -> C64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    C64::new(w.re.exp_m1() * c - 2.0 * half * half, w.re.exp() * s)
}

/// `∫_a^b (p + q(s-a)) (1+s)^{iβ} ds`.
pub fn power_linear_integral(p: C64, q: C64, beta: f64, a: f64, b: f64) -> C64 {
    let ya = 1.0 + a;
    let log_ratio = ((b - a) / ya).ln_1p();
    let z1 = C64::new(1.0, beta);
    let z2 = C64::new(2.0, beta);
    let base = |z: C64| (z * ya.ln()).exp();
    let i0 = base(z1) * expm1(z1 * log_ratio) / z1;
    // Σ_m L^m/m! (z2^{m-1} - z1^{m-1}) avoids the cancellation for short cells.
    let bracket = if (z2 * log_ratio).norm() < 0.5 {
        let mut acc = ZERO;
        let mut lm = log_ratio;
        let (mut p1, mut p2) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for m in 1..40 {
            if m > 1 {
                lm *= log_ratio / m as f64;
                p1 *= z1;
                p2 *= z2;
            }
            let term = lm * (p2 - p1);
            acc += term;
            if m > 2 && term.norm() <= 1e-18 * acc.norm() {
                break;
            }
        }
        acc
    } else {
        expm1(z2 * log_ratio) / z2 - expm1(z1 * log_ratio) / z1
    };
    p * i0 + q * base(z2) * bracket
}

/// Fourier modes `μ̂_l(t)`, `l = -L..L`, of the phase at time `t`.
pub fn phase_modes(pot: &PotentialModel, k: f64, speed: Speed, t: f64) -> Result<Vec<C64>> {
    speed.validate()?;
    let start = speed.start();
    if !(t >= start) || !t.is_finite() {
        return Err(Error::domain(format!("time {t} precedes the transport start {start}")));
    }
    let l_max = pot.l_max as i64;
    let mut out = vec![ZERO; pot.width()];
    for l in -l_max..=l_max {
        let lf = l as f64;
        let slot = &mut out[(l + l_max) as usize];
        *slot = match speed {
            Speed::Frozen { scale, .. } => {
                let c = 1.0 / scale;
                C64::from_polar(1.0, lf * k * c * t) * pot.integrate_mode(l, -lf * k * c, start, t)
            }
            Speed::Diadic => {
                let mut acc = ZERO;
                let mut a = 0.0;
                while a < t {
                    let (b, c) = if a < 1.0 {
                        (1.0f64.min(t), 1.0)
                    } else {
                        ((2.0 * a).min(t), 1.0 / a)
                    };
                    // e^{ilk(clock(t) - clock(s))} with clock(s) = clock(a) + c(s - a)
                    let shift = diadic_clock(t) - diadic_clock(a) + c * a;
                    acc += C64::from_polar(1.0, lf * k * shift)
                        * pot.integrate_mode(l, -lf * k * c, a, b);
                    a = if a < 1.0 { 1.0 } else { 2.0 * a };
                }
                acc
            }
            Speed::Logarithmic => {
                let beta = -lf * k;
                let mut acc = ZERO;
                let mut a = 0.0;
                for b in pot
                    .breakpoints_in(0.0, t)
                    .into_iter()
                    .chain(std::iter::once(t))
                {
                    if b > a {
                        let piece = pot.piece(l, 0.5 * (a + b));
                        let va = piece.value
                            + piece.slope
                                * if piece.start.is_finite() { a - piece.start } else { 0.0 };
                        acc += power_linear_integral(va, piece.slope, beta, a, b);
                    }
                    a = b;
                }
                acc * C64::from_polar(1.0, lf * k * (1.0 + t).ln())
            }
        };
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportSolution {
    pub speed: Speed,
    pub k: f64,
    pub t: f64,
    pub x_grid: Vec<f64>,
    /// `μ(x_j, t)`; real for real potentials.
    pub phase: Vec<C64>,
    /// `ν(x_j, t) = exp(-i μ(x_j, t))`.
    pub values: Vec<C64>,
}

impl TransportSolution {
    /// `max_j ||ν(x_j)| - 1|`.
    pub fn unimodularity_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn eval_modes(modes: &[C64], x: f64) -> C64 {
    let l_max = (modes.len() - 1) / 2;
    let step = C64::from_polar(1.0, x);
    let mut z = C64::from_polar(1.0, -(l_max as f64) * x);
    let mut acc = ZERO;
    for c in modes {
        acc += c * z;
        z *= step;
    }
    acc
}

/// Transport solution on an arbitrary `x` grid.
pub fn transport_field(
    pot: &PotentialModel,
    k: f64,
    speed: Speed,
    x_grid: &[f64],
    t: f64,
) -> Result<TransportSolution> {
    let modes = phase_modes(pot, k, speed, t)?;
    let phase: Vec<C64> = x_grid.iter().map(|&x| eval_modes(&modes, x)).collect();
    let minus_i = C64::new(0.0, -1.0);
    let values = phase.iter().map(|m| (minus_i * m).exp()).collect();
    Ok(TransportSolution {
        speed,
        k,
        t,
        x_grid: x_grid.to_vec(),
        phase,
        values,
    })
}

/// `ν` with speed `k/scale` on the block starting at `t_start`.
pub fn transport_nu(
    pot: &PotentialModel,
    k: f64,
    scale: f64,
    t_start: f64,
    x_grid: &[f64],
    t: f64,
) -> Result<TransportSolution> {
    transport_field(pot, k, Speed::Frozen { start: t_start, scale }, x_grid, t)
}

/// `G` with speed `k/(1+t)`, `G(·, 0) = 1`.
pub fn transport_g(
    pot: &PotentialModel,
    k: f64,
    x_grid: &[f64],
    t: f64,
) -> Result<TransportSolution> {
    transport_field(pot, k, Speed::Logarithmic, x_grid, t)
}

/// Fourier coefficients `c_n`, `|n| ≤ half`, of a periodic function.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub half: usize,
    pub coeffs: Vec<C64>,
}

const MAX_GRID: usize = 1 << 16;

impl Spectrum {
    pub fn get(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.half {
            ZERO
        } else {
            self.coeffs[(n + self.half as i64) as usize]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ (1+|n|)|c_n|²`, over `n ≠ 0` when `homogeneous`.
    pub fn h_half_sqr(&self, homogeneous: bool) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = (i as i64 - self.half as i64).unsigned_abs();
                if homogeneous && n == 0 {
                    0.0
                } else {
                    (1.0 + n as f64) * c.norm_sqr()
                }
            })
            .sum()
    }

    /// `‖u - f‖²` for a band-limited `u`, counting the part of `f` outside the band.
    pub fn distance_sqr(&self, u: &FourierState) -> f64 {
        let n_max = u.n_max() as i64;
        let h = self.half as i64;
        let mut acc = 0.0;
        for n in -h.max(n_max)..=h.max(n_max) {
            acc += (u.get(n) - self.get(n)).norm_sqr();
        }
        acc
    }

    pub fn to_state(&self, n_max: usize) -> FourierState {
        let coeffs = (-(n_max as i64)..=n_max as i64).map(|n| self.get(n)).collect();
        FourierState::from_coeffs(n_max, coeffs).expect("finite spectrum")
    }
}

/// Samples `f` on `m` equispaced points and returns its discrete Fourier
/// coefficients for `|n| < m/2`.
fn sample_spectrum(m: usize, f: &dyn Fn(f64) -> C64) -> Spectrum {
    let buf: Vec<C64> = (0..m)
        .map(|j| f(2.0 * std::f64::consts::PI * j as f64 / m as f64))
        .collect();
    grid_spectrum(buf)
}

fn grid_spectrum(mut buf: Vec<C64>) -> Spectrum {
    let m = buf.len();
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2 - 1;
    let scale = 1.0 / m as f64;
    let coeffs = (-(half as i64)..=half as i64)
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * scale)
        .collect();
    Spectrum { half, coeffs }
}

/// Doubles the sampling grid until the upper half of the retained modes
/// carries relative mass below `1e-26`.
pub(crate) fn resolved_spectrum(min_half: usize, f: &dyn Fn(f64) -> C64) -> Result<Spectrum> {
    let mut m = (4 * (min_half + 1)).next_power_of_two().max(64);
    loop {
        let s = sample_spectrum(m, f);
        let quarter = s.half / 2;
        let total = s.norm_sqr();
        let tail: f64 = s
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as i64 - s.half as i64).unsigned_abs() as usize > quarter)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        if tail <= 1e-26 * total.max(1e-300) {
            return Ok(s);
        }
        if m >= MAX_GRID {
            return Err(Error::NotConverged {
                last: (tail / total).sqrt(),
                iterations: m,
            });
        }
        m *= 2;
    }
}

/// Fourier spectrum of `ν(·, t)`.
pub fn transport_spectrum(pot: &PotentialModel, k: f64, speed: Speed, t: f64) -> Result<Spectrum> {
    let modes = phase_modes(pot, k, speed, t)?;
    let minus_i = C64::new(0.0, -1.0);
    resolved_spectrum(pot.l_max, &|x| (minus_i * eval_modes(&modes, x)).exp())
}

/// Spectrum of `ν(x) · u(x + shift)` for a band-limited `u`.
pub fn modulated_translate(nu: &Spectrum, u: &FourierState, shift: f64) -> Result<Spectrum> {
    let n_max = u.n_max() as i64;
    let nu_modes: Vec<(i64, C64)> = (-(nu.half as i64)..=nu.half as i64)
        .map(|n| (n, nu.get(n)))
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .collect();
    let u_modes: Vec<(i64, C64)> = (-n_max..=n_max)
        .map(|n| (n, u.get(n) * C64::from_polar(1.0, n as f64 * shift)))
        .collect();
    let min_half = nu.half + u.n_max();
    let m = (4 * (min_half + 1)).next_power_of_two();
    if m > MAX_GRID {
        return Err(Error::domain("product spectrum exceeds the sampling cap"));
    }
    // Both factors are band-limited, so one grid resolves the product exactly.
    let nu_grid = grid_values(&nu_modes, m);
    let u_grid = grid_values(&u_modes, m);
    Ok(grid_spectrum(
        nu_grid.iter().zip(&u_grid).map(|(a, b)| a * b).collect(),
    ))
}

/// Values of `Σ c_n e^{inx}` at `x_j = 2πj/m` via an inverse FFT.
fn grid_values(modes: &[(i64, C64)], m: usize) -> Vec<C64> {
    let mut buf = vec![ZERO; m];
    for &(n, c) in modes {
        buf[n.rem_euclid(m as i64) as usize] += c;
    }
    FftPlanner::<f64>::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Sup norm of a band-limited state on a grid of at least `8(2N+1)` points.
pub fn sup_norm(u: &FourierState) -> f64 {
    let n = u.n_max() as i64;
    let modes: Vec<(i64, C64)> = (-n..=n).map(|i| (i, u.get(i))).collect();
    let m = (8 * (2 * u.n_max() + 1)).next_power_of_two();
    grid_values(&modes, m)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_decaying, make_random_bounded, uniform_nodes};
    use rand::Rng;

    #[test]
    fn power_integral_matches_simpson() {
        let mut r = crate::rng::stream(3, 0);
        for _ in 0..200 {
            let p = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let q = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let beta = r.gen_range(-20.0..20.0);
            let a = r.gen_range(0.0..200.0);
            let h = 10f64.powf(r.gen_range(-4.0..1.0));
            let exact = power_linear_integral(p, q, beta, a, a + h);
            let n = 20_000;
            let dh = h / n as f64;
            let f = |s: f64| (p + q * (s - a)) * C64::new(0.0, beta * (1.0 + s).ln()).exp();
            let mut acc = f(a) + f(a + h);
            for i in 1..n {
                acc += f(a + i as f64 * dh) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc *= dh / 3.0;
            assert!(
                (acc - exact).norm() < 1e-10 * (h + exact.norm()),
                "{acc} vs {exact}, beta={beta} a={a} h={h}"
            );
        }
    }

    #[test]
    fn diadic_clock_counts_blocks() {
        assert_eq!(diadic_clock(0.5), 0.5);
        assert_eq!(diadic_clock(1.0), 1.0);
        assert_eq!(diadic_clock(3.0), 2.5);
        assert_eq!(diadic_clock(8.0), 4.0);
        assert_eq!(Speed::Diadic.at(5.0), 0.25);
    }

    fn grid(m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / m as f64)
            .collect()
    }

    #[test]
    fn trivial_fields() {
        let xs = grid(16);
        let zero = PotentialModel::zero();
        let nu = transport_nu(&zero, 1.0, 4.0, 0.0, &xs, 3.0).unwrap();
        assert!(nu.values.iter().all(|v| (v - 1.0).norm() < 1e-15));
        let g = PotentialModel::scalar(vec![0.0, 2.0], &[1.0, -1.0]).unwrap();
        // ∫_0^1.5 (1 - s) ds = 0.375
        for sol in [
            transport_nu(&g, 0.7, 2.0, 0.0, &xs, 1.5).unwrap(),
            transport_g(&g, 0.7, &xs, 1.5).unwrap(),
            transport_field(&g, 0.7, Speed::Diadic, &xs, 1.5).unwrap(),
        ] {
            let want = C64::from_polar(1.0, -0.375);
            assert!(sol.values.iter().all(|v| (v - want).norm() < 1e-14));
        }
        let cos = PotentialModel::stationary(1, &[(1, C64::new(0.5, 0.0)), (-1, C64::new(0.5, 0.0))], true)
            .unwrap();
        let nu = transport_nu(&cos, 0.0, 1.0, 0.0, &xs, 2.0).unwrap();
        for (x, v) in xs.iter().zip(&nu.values) {
            assert!((v - C64::from_polar(1.0, -2.0 * x.cos())).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_fields_coincide() {
        let pot = make_random_bounded(5, 3, &uniform_nodes(0.0, 6.0, 12), 1.0).unwrap();
        let xs = grid(32);
        let a = transport_nu(&pot, 0.0, 3.0, 0.0, &xs, 5.0).unwrap();
        let b = transport_g(&pot, 0.0, &xs, 5.0).unwrap();
        let c = transport_field(&pot, 0.0, Speed::Diadic, &xs, 5.0).unwrap();
        for i in 0..xs.len() {
            assert!((a.values[i] - b.values[i]).norm() < 1e-12);
            assert!((a.values[i] - c.values[i]).norm() < 1e-12);
        }
        assert!(a.unimodularity_defect() < 1e-12);
    }

    /// Fourth-order centered-difference residual of `iν_t - ikc(t)ν_x - Vν`,
    /// relative to `max |Vν|`.
    fn residual(pot: &PotentialModel, k: f64, speed: Speed, t: f64) -> f64 {
        let m = 1024;
        let xs = grid(m);
        let h = 1e-3;
        let dx = xs[1];
        let at = |dt: f64| transport_field(pot, k, speed, &xs, t + dt).unwrap().values;
        let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
        let nu = at(0.0);
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for j in 0..m {
            let nt = (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h);
            let x = |o: usize| nu[(j + o) % m];
            let nx = (-x(2) + 8.0 * x(1) - 8.0 * x(m - 1) + x(m - 2)) / (12.0 * dx);
            let v = pot.value(xs[j], t) * nu[j];
            let r = C64::new(0.0, 1.0) * nt - C64::new(0.0, k * speed.at(t)) * nx - v;
            worst = worst.max(r.norm());
            scale = scale.max(v.norm());
        }
        worst / scale.max(1e-300)
    }

    #[test]
    fn fields_solve_their_transport_equations() {
        let pot = make_decaying(2, 2, 0.9, 1.0, &uniform_nodes(0.0, 20.0, 40)).unwrap();
        for speed in [
            Speed::Frozen { start: 4.0, scale: 4.0 },
            Speed::Logarithmic,
            Speed::Diadic,
        ] {
            for t in [5.3, 6.7, 9.2] {
                let r = residual(&pot, 1.3, speed, t);
                assert!(r < 1e-6, "{speed:?} t={t}: {r}");
            }
        }
    }

    #[test]
    fn spectrum_of_pure_phase_is_bessel_like_and_unit_norm() {
        let pot = make_random_bounded(8, 4, &uniform_nodes(0.0, 4.0, 8), 1.0).unwrap();
        let s = transport_spectrum(&pot, 0.8, Speed::Logarithmic, 3.0).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let cos = PotentialModel::stationary(1, &[(1, C64::new(0.5, 0.0)), (-1, C64::new(0.5, 0.0))], true)
            .unwrap();
        // e^{-i t cos x} = Σ (-i)^n J_n(t) e^{inx}; J_1(1) = 0.44005058574493355
        let s = transport_spectrum(&cos, 0.0, Speed::Logarithmic, 1.0).unwrap();
        assert!((s.get(1) - C64::new(0.0, -0.44005058574493355)).norm() < 1e-13);
    }

    #[test]
    fn modulated_translate_matches_direct_convolution() {
        let pot = make_random_bounded(1, 2, &uniform_nodes(0.0, 2.0, 4), 0.5).unwrap();
        let nu = transport_spectrum(&pot, 1.0, Speed::Logarithmic, 1.0).unwrap();
        let u = FourierState::from_modes(3, &[(0, C64::new(0.6, 0.0)), (2, C64::new(0.0, 0.8))]).unwrap();
        let shift = 0.37;
        let p = modulated_translate(&nu, &u, shift).unwrap();
        for n in -8i64..=8 {
            let mut want = ZERO;
            for (m, c) in u.modes() {
                want += nu.get(n - m) * c * C64::from_polar(1.0, m as f64 * shift);
            }
            assert!((p.get(n) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn sup_norm_of_plane_wave_sum() {
        let u = FourierState::from_modes(2, &[(0, C64::new(0.5, 0.0)), (1, C64::new(0.5, 0.0))]).unwrap();
        assert!((sup_norm(&u) - 1.0).abs() < 1e-14);
    }
}
