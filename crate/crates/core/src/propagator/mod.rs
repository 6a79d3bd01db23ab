//! Time evolution of Fourier states under `i u_t = (kΛ(t) + V) u`.
//!
//! The integrator works in the interaction frame `w_n = e^{ikΦ_n} u_n`, where
//! `Φ_n` is the exact time integral of the symbol multiplier, so that only the
//! banded potential is exponentiated. States are reported in either picture;
//! the interaction picture is always referenced to `t = 0`.

mod duhamel;
mod frame;
mod monodromy;
mod perturbation;
mod truncation;

pub use duhamel::{duhamel_series, DuhamelResult};
pub use monodromy::{dense_monodromy, MonodromyMatrix};
pub use perturbation::{perturbation_gap, PerturbationGap};
pub use truncation::{truncation_scan, TruncationRow};

pub(crate) use frame::Frame;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{
    sobolev_norm_sqr_of, tail_mass_of, FourierState, Picture, SobolevIndex, SymbolSpec, C64,
};

pub const DEFAULT_TOL: f64 = 1e-9;
const MIN_DT: f64 = 1e-12;

/// Scalar quantities tracked along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Observable {
    L2Norm,
    /// `|‖u‖ - 1|`
    NormDeviation,
    Sobolev {
        alpha: f64,
        #[serde(default)]
        homogeneous: bool,
    },
    /// `Σ_{|n|>μ} |û_n|²`
    Tail {
        mu: usize,
    },
    /// `|1 - û_0|`
    ZeroModeDeviation,
    /// `‖1 - u‖_{L²}` (normalized measure)
    DistanceFromOne,
}

impl Observable {
    /// Value on frame coefficients; every observable depends on moduli and on
    /// `û_0`, which both pictures share.
    pub fn eval(&self, coeffs: &[C64], n_max: usize) -> f64 {
        match *self {
            Observable::L2Norm => norm(coeffs),
            Observable::NormDeviation => (norm(coeffs) - 1.0).abs(),
            Observable::Sobolev { alpha, homogeneous } => sobolev_norm_sqr_of(
                coeffs,
                n_max,
                SobolevIndex { alpha, homogeneous },
            )
            .sqrt(),
            Observable::Tail { mu } => tail_mass_of(coeffs, n_max, mu),
            Observable::ZeroModeDeviation => (C64::new(1.0, 0.0) - coeffs[n_max]).norm(),
            Observable::DistanceFromOne => {
                let rest = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
                    - coeffs[n_max].norm_sqr();
                ((C64::new(1.0, 0.0) - coeffs[n_max]).norm_sqr() + rest.max(0.0)).sqrt()
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Observable::L2Norm => "l2".into(),
            Observable::NormDeviation => "norm_deviation".into(),
            Observable::Sobolev { alpha, homogeneous } => {
                format!("{}h{alpha}", if homogeneous { "dot_" } else { "" })
            }
            Observable::Tail { mu } => format!("tail_{mu}"),
            Observable::ZeroModeDeviation => "zero_mode_deviation".into(),
            Observable::DistanceFromOne => "distance_from_one".into(),
        }
    }
}

fn norm(c: &[C64]) -> f64 {
    c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub k: f64,
    pub t0: f64,
    pub t1: f64,
    pub dt_init: f64,
    pub tol: f64,
    #[serde(default)]
    pub picture: Picture,
    #[serde(default)]
    pub observer_times: Vec<f64>,
    #[serde(default)]
    pub observables: Vec<Observable>,
}

impl EvolveConfig {
    pub fn new(k: f64, t0: f64, t1: f64) -> Self {
        EvolveConfig {
            k,
            t0,
            t1,
            dt_init: 0.05,
            tol: DEFAULT_TOL,
            picture: Picture::Lab,
            observer_times: vec![t1],
            observables: Vec::new(),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_observers(mut self, times: Vec<f64>) -> Self {
        self.observer_times = times;
        self
    }

    pub fn with_observables(mut self, obs: Vec<Observable>) -> Self {
        self.observables = obs;
        self
    }

    pub fn with_picture(mut self, picture: Picture) -> Self {
        self.picture = picture;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 >= 0.0 && self.t1 > self.t0 && self.t1.is_finite()) {
            return Err(Error::domain(format!(
                "need 0 <= t0 < t1, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if !(self.tol > 0.0) || !(self.dt_init > 0.0) || !self.k.is_finite() {
            return Err(Error::domain("tol, dt_init must be positive and k finite"));
        }
        if self.observer_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("observer times must be sorted"));
        }
        if self
            .observer_times
            .iter()
            .any(|&t| t < self.t0 || t > self.t1)
        {
            return Err(Error::domain("observer time outside [t0, t1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub observer_times: Vec<f64>,
    /// States at the observer times, in the configured picture.
    pub states: Vec<FourierState>,
    pub observables: Vec<Observable>,
    /// `running_max[j][i]`: sup of observable `i` over accepted steps in `[t0, observer_times[j]]`.
    pub running_max: Vec<Vec<f64>>,
    /// Sup of each observable over the whole run.
    pub sup: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&FourierState> {
        self.states.last()
    }
}

/// Converts a state to the lab picture at its own time stamp.
pub fn to_lab(state: &FourierState, spec: &SymbolSpec, k: f64) -> FourierState {
    convert(state, spec, k, Picture::Lab)
}

/// Converts between pictures; the interaction picture is referenced to `t = 0`.
pub fn convert(state: &FourierState, spec: &SymbolSpec, k: f64, to: Picture) -> FourierState {
    if state.picture() == to {
        return state.clone();
    }
    let pot = PotentialModel::zero();
    let mut frame = Frame::new(spec, &pot, k, 0.0, state.n_max());
    let mut out = state.clone().with_picture(to);
    let sign = if to == Picture::Interaction { 1.0 } else { -1.0 };
    frame.rotate(out.coeffs_mut(), state.time(), sign);
    out
}

/// One exponential-midpoint step from `state.time()` to `state.time() + dt`,
/// carried out in the picture of the state.
pub fn step_midpoint(
    state: &FourierState,
    spec: &SymbolSpec,
    pot: &PotentialModel,
    k: f64,
    dt: f64,
) -> Result<FourierState> {
    if !(dt > 0.0) {
        return Err(Error::domain("step size must be positive"));
    }
    let t = state.time();
    let mut frame = Frame::new(spec, pot, k, 0.0, state.n_max());
    let mut out = state.clone();
    match state.picture() {
        Picture::Interaction => frame.step_interaction(out.coeffs_mut(), t, dt),
        Picture::Lab => frame.step_lab(out.coeffs_mut(), t, dt),
    }
    Ok(out.with_time(t + dt))
}

/// `n_steps` uniform midpoint steps from `t0` to `t1`, no error control.
pub fn evolve_fixed(
    initial: &FourierState,
    spec: &SymbolSpec,
    pot: &PotentialModel,
    k: f64,
    t1: f64,
    n_steps: usize,
) -> Result<FourierState> {
    if n_steps == 0 || !(t1 > initial.time()) {
        return Err(Error::domain("need n_steps >= 1 and t1 > t0"));
    }
    let t0 = initial.time();
    let dt = (t1 - t0) / n_steps as f64;
    let mut frame = Frame::new(spec, pot, k, 0.0, initial.n_max());
    let mut out = initial.clone();
    for i in 0..n_steps {
        let t = t0 + i as f64 * dt;
        match initial.picture() {
            Picture::Interaction => frame.step_interaction(out.coeffs_mut(), t, dt),
            Picture::Lab => frame.step_lab(out.coeffs_mut(), t, dt),
        }
    }
    Ok(out.with_time(t1))
}

/// Which generator the adaptive driver exponentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Midpoint on the interaction-frame generator (default).
    Interaction,
    /// Midpoint on the full lab generator; only sensible for small bands.
    Lab,
}

/// Adaptive evolution; see [`evolve_observed`].
pub fn evolve(
    initial: &FourierState,
    spec: &SymbolSpec,
    pot: &PotentialModel,
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    evolve_observed(initial, spec, pot, cfg, Scheme::Interaction, |_, _| {})
}

/// Adaptive step-doubling evolution from `cfg.t0` to `cfg.t1`.
///
/// The initial state is taken at `cfg.t0` in its own picture. Steps land exactly
/// on potential nodes, observer times and symbol crossings. `on_step(t, w)` sees
/// the integration-frame coefficients after every accepted step (and once at
/// `t0`); their moduli and zero mode coincide with the lab picture.
pub fn evolve_observed(
    initial: &FourierState,
    spec: &SymbolSpec,
    pot: &PotentialModel,
    cfg: &EvolveConfig,
    scheme: Scheme,
    mut on_step: impl FnMut(f64, &[C64]),
) -> Result<Trajectory> {
    cfg.validate()?;
    spec.validate()?;
    let n_max = initial.n_max();
    if !initial.is_finite() {
        return Err(Error::domain("initial state is not finite"));
    }
    let lab0 = convert(&initial.clone().with_time(cfg.t0), spec, cfg.k, Picture::Lab);
    let mut frame = Frame::new(spec, pot, cfg.k, cfg.t0, n_max);
    let mut w = lab0.into_coeffs();

    let mut stops: Vec<f64> = pot.breakpoints_in(cfg.t0, cfg.t1);
    stops.extend(spec.crossings(n_max, cfg.t0, cfg.t1));
    stops.extend(cfg.observer_times.iter().copied().filter(|&t| t > cfg.t0));
    stops.push(cfg.t1);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let n_obs = cfg.observables.len();
    let mut sup = vec![f64::NEG_INFINITY; n_obs];
    let record = |w: &[C64], sup: &mut Vec<f64>| {
        for (s, o) in sup.iter_mut().zip(&cfg.observables) {
            *s = s.max(o.eval(w, n_max));
        }
    };
    record(&w, &mut sup);
    on_step(cfg.t0, &w);

    let mut traj = Trajectory {
        observer_times: cfg.observer_times.clone(),
        states: Vec::with_capacity(cfg.observer_times.len()),
        observables: cfg.observables.clone(),
        running_max: Vec::with_capacity(cfg.observer_times.len()),
        sup: Vec::new(),
        accepted: 0,
        rejected: 0,
    };
    let mut next_obs = 0;
    let emit = |traj: &mut Trajectory,
                    next_obs: &mut usize,
                    t: f64,
                    w: &[C64],
                    sup: &[f64],
                    frame: &mut Frame|
     -> Result<()> {
        while *next_obs < cfg.observer_times.len() && cfg.observer_times[*next_obs] <= t {
            let mut c = w.to_vec();
            if scheme == Scheme::Interaction {
                frame.rotate(&mut c, t, -1.0);
            }
            let lab = FourierState::from_coeffs(n_max, c)?.with_time(t);
            traj.states.push(convert(&lab, spec, cfg.k, cfg.picture));
            traj.running_max.push(sup.to_vec());
            *next_obs += 1;
        }
        Ok(())
    };
    emit(&mut traj, &mut next_obs, cfg.t0, &w, &sup, &mut frame)?;

    let mut full = w.clone();
    let mut half = w.clone();
    let mut t = cfg.t0;
    let mut dt = cfg.dt_init.min(cfg.t1 - cfg.t0);
    let mut stop_idx = 0;
    while t < cfg.t1 {
        while stops[stop_idx] <= t {
            stop_idx += 1;
        }
        let target = stops[stop_idx];
        let clipped = target - t <= dt;
        let h = if clipped { target - t } else { dt };

        full.copy_from_slice(&w);
        half.copy_from_slice(&w);
        match scheme {
            Scheme::Interaction => {
                frame.step_interaction(&mut full, t, h);
                frame.step_interaction(&mut half, t, 0.5 * h);
                frame.step_interaction(&mut half, t + 0.5 * h, 0.5 * h);
            }
            Scheme::Lab => {
                frame.step_lab(&mut full, t, h);
                frame.step_lab(&mut half, t, 0.5 * h);
                frame.step_lab(&mut half, t + 0.5 * h, 0.5 * h);
            }
        }
        let diff = full
            .iter()
            .zip(&half)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = norm(&half).max(1.0);
        let err = diff / scale;
        if !err.is_finite() {
            return Err(Error::StepUnderflow {
                t,
                dt: h,
                err,
                tol: cfg.tol,
            });
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (cfg.tol / err).powf(1.0 / 3.0)).clamp(0.2, 5.0)
        };
        if err <= cfg.tol {
            std::mem::swap(&mut w, &mut half);
            t = if clipped { target } else { t + h };
            traj.accepted += 1;
            record(&w, &mut sup);
            on_step(t, &w);
            emit(&mut traj, &mut next_obs, t, &w, &sup, &mut frame)?;
            if !clipped || h * factor < dt {
                dt = h * factor;
            }
        } else {
            traj.rejected += 1;
            dt = h * factor.min(0.9);
            if dt < MIN_DT {
                return Err(Error::StepUnderflow {
                    t,
                    dt,
                    err,
                    tol: cfg.tol,
                });
            }
        }
    }
    traj.sup = sup;
    Ok(traj)
}

/// `⟨H x, y⟩` with the interaction generator at time `t`: the matrix entry
/// `e^{ik(Φ_m(t) - Φ_n(t))} V̂_{m-n}(t)`, phases referenced to `t = 0`.
pub fn interaction_entry(
    spec: &SymbolSpec,
    pot: &PotentialModel,
    k: f64,
    t: f64,
    m: i64,
    n: i64,
) -> C64 {
    let phase = k * (spec.phase_integral(m, 0.0, t) - spec.phase_integral(n, 0.0, t));
    C64::from_polar(1.0, phase) * pot.coeff(m - n, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_constant_imag, make_random_bounded, uniform_nodes};
    use crate::spectral::{sobolev_norm, ONE, ZERO};

    #[test]
    fn interaction_entry_examples() {
        let s = SymbolSpec::schrodinger();
        let zero = PotentialModel::zero();
        assert_eq!(interaction_entry(&s, &zero, 1.0, 0.7, 2, 1), ZERO);
        let pot = PotentialModel::stationary(1, &[(1, ONE), (-1, ONE), (0, ONE * 0.5)], true)
            .unwrap();
        assert_eq!(interaction_entry(&s, &pot, 3.0, 0.7, 2, 2), ONE * 0.5);
        let e = interaction_entry(&s, &pot, 1.0, 1.0, 1, 0);
        assert!((e - C64::from_polar(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn free_flow_keeps_constants() {
        let s = SymbolSpec::schrodinger();
        let cfg = EvolveConfig::new(1.7, 0.0, 3.0);
        let tr = evolve(&FourierState::one(8), &s, &PotentialModel::zero(), &cfg).unwrap();
        assert_eq!(tr.final_state().unwrap(), &FourierState::one(8).with_time(3.0));
    }

    #[test]
    fn imaginary_constant_potential_grows_exponentially() {
        let s = SymbolSpec::schrodinger();
        for (c, want) in [(1.0, 2f64.exp()), (-1.0, (-2f64).exp())] {
            let cfg = EvolveConfig::new(0.4, 0.0, 2.0);
            let tr = evolve(&FourierState::one(4), &s, &make_constant_imag(c), &cfg).unwrap();
            assert!((tr.final_state().unwrap().norm() - want).abs() < 1e-9);
        }
    }

    #[test]
    fn scalar_potential_gives_exact_phase() {
        let s = SymbolSpec::schrodinger();
        let pot = PotentialModel::scalar(vec![0.0, 1.0, 2.0], &[0.3, -0.5, 0.8]).unwrap();
        let cfg = EvolveConfig::new(2.0, 0.0, 2.0).with_observables(vec![Observable::Sobolev {
            alpha: 0.5,
            homogeneous: true,
        }]);
        let tr = evolve(&FourierState::one(6), &s, &pot, &cfg).unwrap();
        let integral = 0.5 * (0.3 - 0.5) + 0.5 * (-0.5 + 0.8);
        let u0 = tr.final_state().unwrap().get(0);
        assert!((u0 - C64::from_polar(1.0, -integral)).norm() < 1e-12);
        assert_eq!(tr.sup[0], 0.0);
    }

    #[test]
    fn real_potential_preserves_norm() {
        let s = SymbolSpec::schrodinger();
        let pot = make_random_bounded(3, 4, &uniform_nodes(0.0, 2.0, 8), 1.0).unwrap();
        let cfg = EvolveConfig::new(1.0, 0.0, 2.0)
            .with_observables(vec![Observable::NormDeviation]);
        let tr = evolve(&FourierState::one(16), &s, &pot, &cfg).unwrap();
        assert!(tr.sup[0] < 2e-8, "{}", tr.sup[0]);
    }

    #[test]
    fn pictures_round_trip() {
        let s = SymbolSpec::gaps();
        let st = FourierState::from_modes(5, &[(2, ONE), (-3, ONE * 0.5)])
            .unwrap()
            .with_time(9.0);
        let i = convert(&st, &s, 1.3, Picture::Interaction);
        let back = convert(&i, &s, 1.3, Picture::Lab);
        assert!(back.distance(&st) < 1e-14);
        assert!((sobolev_norm(&i, SobolevIndex::new(1.0)) - sobolev_norm(&st, SobolevIndex::new(1.0))).abs() < 1e-14);
    }

    #[test]
    fn step_on_zero_potential_is_identity_in_interaction_picture() {
        let s = SymbolSpec::schrodinger();
        let st = FourierState::from_modes(3, &[(1, ONE)])
            .unwrap()
            .with_picture(Picture::Interaction);
        let out = step_midpoint(&st, &s, &PotentialModel::zero(), 2.0, 0.1).unwrap();
        assert_eq!(out.coeffs(), st.coeffs());
    }
}
