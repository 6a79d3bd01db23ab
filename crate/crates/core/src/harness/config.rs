//! Run configuration, read from JSON.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "sweep": { "a": 2.0, "m": 64 },
//!   "experiment": { "name": "theorem11", "t_list": [1, 2, 4, 8] }
//! }
//! ```
//!
//! Every object rejects unknown keys. `sweep` may be omitted, in which case the
//! experiment's own k-grid default applies.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Weight;
use crate::potential::{
    make_constant_imag, make_decaying, make_oscillatory, make_random_bounded,
    make_random_complex, uniform_nodes, OscillatoryQSpec, PotentialModel,
};
use crate::propagator::Observable;
use crate::spectral::SymbolSpec;

pub const SCHEMA_VERSION: &str = "sobolev-lab/run@1";

/// `k ∈ [-a, a]` sampled at `m` midpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub a: f64,
    pub m: usize,
}

impl SweepConfig {
    pub fn new(a: f64, m: usize) -> Self {
        SweepConfig { a, m }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(config_err("sweep.a", format!("{} must be positive", self.a)));
        }
        if self.m < 8 {
            return Err(config_err("sweep.m", format!("{} is below the minimum 8", self.m)));
        }
        Ok(())
    }

    /// Midpoint nodes `k_i = -a + (i + 1/2)·2a/m`.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.m).map(|i| -self.a + (i as f64 + 0.5) * h).collect()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.a / self.m as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn new(experiment: ExperimentConfig) -> Self {
        RunConfig {
            seed: 0,
            sweep: None,
            experiment,
        }
    }

    /// Parses JSON; schema errors become [`Error::Config`] naming the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { "<root>".to_string() } else { path };
            config_err(&key, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The k-grid in effect: explicit `sweep`, else the experiment default.
    pub fn sweep(&self) -> SweepConfig {
        self.sweep.unwrap_or_else(|| self.experiment.default_sweep())
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep().validate()?;
        self.experiment.validate()
    }
}

pub(crate) fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// How to build the potential of a run. Seeds are derived from the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialRecipe {
    Zero,
    RandomBounded {
        l_max: usize,
        t_end: f64,
        cells: usize,
        bound: f64,
    },
    RandomComplex {
        l_max: usize,
        t_end: f64,
        cells: usize,
        bound: f64,
    },
    /// Envelope `c(t+1)^{-γ}` with nodes every `spacing` on `[t_start, t_end]`.
    Decaying {
        l_max: usize,
        gamma: f64,
        c: f64,
        t_start: f64,
        t_end: f64,
        spacing: f64,
    },
    ConstantImag {
        c: f64,
    },
    Scalar {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    /// `V = Q_x/(t+1)` with a random separable `Q`.
    Oscillatory {
        l_max: usize,
        gamma: f64,
        lambda: f64,
        start_t: f64,
        t_end: f64,
        cells: usize,
    },
    File {
        path: PathBuf,
    },
}

impl PotentialRecipe {
    pub fn build(&self, seed: u64) -> Result<PotentialModel> {
        match self {
            PotentialRecipe::Zero => Ok(PotentialModel::zero()),
            PotentialRecipe::RandomBounded {
                l_max,
                t_end,
                cells,
                bound,
            } => make_random_bounded(seed, *l_max, &uniform_nodes(0.0, *t_end, *cells), *bound),
            PotentialRecipe::RandomComplex {
                l_max,
                t_end,
                cells,
                bound,
            } => make_random_complex(seed, *l_max, &uniform_nodes(0.0, *t_end, *cells), *bound),
            PotentialRecipe::Decaying {
                l_max,
                gamma,
                c,
                t_start,
                t_end,
                spacing,
            } => {
                let cells = ((t_end - t_start) / spacing).round().max(1.0) as usize;
                make_decaying(seed, *l_max, *gamma, *c, &uniform_nodes(*t_start, *t_end, cells))
            }
            PotentialRecipe::ConstantImag { c } => Ok(make_constant_imag(*c)),
            PotentialRecipe::Scalar { times, values } => {
                PotentialModel::scalar(times.clone(), values)
            }
            PotentialRecipe::Oscillatory {
                l_max,
                gamma,
                lambda,
                start_t,
                t_end,
                cells,
            } => {
                let spec = OscillatoryQSpec::random(
                    seed,
                    *l_max,
                    *gamma,
                    *lambda,
                    *start_t,
                    uniform_nodes(*start_t, *t_end, *cells),
                )?;
                make_oscillatory(&spec)
            }
            PotentialRecipe::File { path } => PotentialModel::load(path),
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(&format!("{key}.{name}"), format!("{v} must be positive")))
            }
        };
        match self {
            PotentialRecipe::RandomBounded { t_end, cells, .. }
            | PotentialRecipe::RandomComplex { t_end, cells, .. } => {
                positive("t_end", *t_end)?;
                positive("cells", *cells as f64)
            }
            PotentialRecipe::Decaying {
                t_start,
                t_end,
                spacing,
                ..
            } => {
                positive("spacing", *spacing)?;
                if !(t_end > t_start) {
                    return Err(config_err(&format!("{key}.t_end"), "must exceed t_start"));
                }
                Ok(())
            }
            PotentialRecipe::Oscillatory { cells, .. } => positive("cells", *cells as f64),
            _ => Ok(()),
        }
    }

    /// Whether the recipe produces a real-valued potential.
    pub fn is_real(&self) -> Option<bool> {
        match self {
            PotentialRecipe::RandomComplex { .. } | PotentialRecipe::ConstantImag { .. } => {
                Some(false)
            }
            PotentialRecipe::File { .. } => None,
            _ => Some(true),
        }
    }
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveExperiment {
    pub potential: PotentialRecipe,
    #[serde(default)]
    pub symbol: SymbolSpec,
    pub n_max: usize,
    pub k: f64,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Equispaced output times in `(0, t_end]`.
    pub observers: usize,
    pub alpha: f64,
    pub mu1: usize,
    pub mu2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepExperiment {
    pub potential: PotentialRecipe,
    #[serde(default)]
    pub symbol: SymbolSpec,
    pub n_max: usize,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub observables: Vec<Observable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem11Experiment {
    pub potential: PotentialRecipe,
    pub ensemble: usize,
    pub alpha: f64,
    pub n_max: usize,
    pub t_list: Vec<f64>,
    pub weight: Weight,
    pub tol: f64,
    /// Criterion: `max R(T_last) ≤ growth_factor · max R(T_first)`.
    pub growth_factor: f64,
}

impl Default for Theorem11Experiment {
    fn default() -> Self {
        Theorem11Experiment {
            potential: PotentialRecipe::RandomBounded {
                l_max: 4,
                t_end: 8.0,
                cells: 32,
                bound: 1.0,
            },
            ensemble: 8,
            alpha: 0.4,
            n_max: 64,
            t_list: vec![1.0, 2.0, 4.0, 8.0],
            weight: Weight::SqrtOnePlusT,
            tol: 1e-7,
            growth_factor: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma22Experiment {
    pub potential: PotentialRecipe,
    pub n_list: Vec<usize>,
    pub t_end: f64,
    /// Time grid intervals for the prefix curves.
    pub grid: usize,
    /// Coarse sub-grid for the joint lower bound.
    pub coarse: usize,
    /// Band-factor criterion on `value·N/log N`.
    pub band_factor: f64,
    pub tail_row: bool,
}

impl Default for Lemma22Experiment {
    fn default() -> Self {
        Lemma22Experiment {
            potential: PotentialRecipe::RandomBounded {
                l_max: 4,
                t_end: 1.0,
                cells: 8,
                bound: 1.0,
            },
            n_list: vec![8, 16, 32, 64],
            t_end: 1.0,
            grid: 256,
            coarse: 32,
            band_factor: 3.0,
            tail_row: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthExperiment {
    pub potential: PotentialRecipe,
    pub p: f64,
    pub alpha: f64,
    pub n_max: usize,
    pub t_list: Vec<f64>,
    pub tol: f64,
    pub theta_max: f64,
    pub min_fraction: f64,
}

impl Default for GrowthExperiment {
    fn default() -> Self {
        GrowthExperiment {
            potential: PotentialRecipe::RandomComplex {
                l_max: 4,
                t_end: 8.0,
                cells: 32,
                bound: 1.0,
            },
            p: 1.5,
            alpha: 0.5,
            n_max: 32,
            t_list: vec![1.0, 2.0, 4.0, 8.0],
            tol: 1e-8,
            theta_max: 2.2,
            min_fraction: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatoryExperiment {
    pub l_max: usize,
    pub gamma: f64,
    pub lambda: f64,
    /// Start times of the potential; the second should be twice the first.
    pub t_starts: Vec<f64>,
    /// Each run covers `[T_start, horizon_factor·T_start]`.
    pub horizon_factor: f64,
    pub cells: usize,
    pub n_max: usize,
    pub tol: f64,
    pub ratio_band: [f64; 2],
}

impl Default for OscillatoryExperiment {
    fn default() -> Self {
        OscillatoryExperiment {
            l_max: 2,
            gamma: 0.9,
            lambda: 0.05,
            t_starts: vec![4.0, 8.0],
            horizon_factor: 8.0,
            cells: 64,
            n_max: 16,
            tol: 1e-10,
            ratio_band: [2.8, 5.7],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WkbExperiment {
    pub gamma: f64,
    pub t_list: Vec<f64>,
    pub n_max: usize,
    pub l_max: usize,
    pub c: f64,
    pub tol: f64,
    pub observers: usize,
    pub max_end_ratio: f64,
}

impl Default for WkbExperiment {
    fn default() -> Self {
        WkbExperiment {
            gamma: 0.96,
            t_list: vec![64.0, 256.0, 1024.0],
            n_max: 128,
            l_max: 8,
            c: 1.0,
            tol: 1e-9,
            observers: 16,
            max_end_ratio: 0.7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiadicExperiment {
    pub gamma: f64,
    pub lambda_list: Vec<f64>,
    pub j_max: u32,
    pub n_max: usize,
    pub l_max: usize,
    pub tol: f64,
    pub observers: usize,
}

impl Default for DiadicExperiment {
    fn default() -> Self {
        DiadicExperiment {
            gamma: 0.96,
            lambda_list: vec![0.4, 0.2, 0.1],
            j_max: 4,
            n_max: 32,
            l_max: 3,
            tol: 1e-8,
            observers: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationExperiment {
    pub trials: usize,
    pub g_max: usize,
    pub betas: Vec<f64>,
    /// Grid size of the random curves in the monotonicity check.
    pub curve_grid: usize,
    pub carleson_profiles: usize,
}

impl Default for VariationExperiment {
    fn default() -> Self {
        VariationExperiment {
            trials: 100,
            g_max: 12,
            betas: vec![1.0, 1.25, 1.5, 1.75, 2.0],
            curve_grid: 64,
            carleson_profiles: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuzzExperiment {
    pub otriv_trials: usize,
    pub dim_max: usize,
    pub krein_trials: usize,
    pub krein_degree: usize,
    /// Allowed relative change of the Krein constant when trials double.
    pub krein_stability: f64,
}

impl Default for FuzzExperiment {
    fn default() -> Self {
        FuzzExperiment {
            otriv_trials: 100_000,
            dim_max: 16,
            krein_trials: 10_000,
            krein_degree: 32,
            krein_stability: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Evolve(EvolveExperiment),
    Sweep(SweepExperiment),
    Theorem11(Theorem11Experiment),
    Lemma22(Lemma22Experiment),
    Growth(GrowthExperiment),
    Oscillatory(OscillatoryExperiment),
    Wkb(WkbExperiment),
    Diadic(DiadicExperiment),
    Variation(VariationExperiment),
    FuzzAppendix(FuzzExperiment),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Evolve(_) => "evolve",
            ExperimentConfig::Sweep(_) => "sweep",
            ExperimentConfig::Theorem11(_) => "theorem11",
            ExperimentConfig::Lemma22(_) => "lemma22",
            ExperimentConfig::Growth(_) => "growth",
            ExperimentConfig::Oscillatory(_) => "oscillatory",
            ExperimentConfig::Wkb(_) => "wkb",
            ExperimentConfig::Diadic(_) => "diadic",
            ExperimentConfig::Variation(_) => "variation",
            ExperimentConfig::FuzzAppendix(_) => "fuzz_appendix",
        }
    }

    /// Default configuration of an experiment by name (`fuzz-appendix` accepted).
    pub fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "theorem11" => ExperimentConfig::Theorem11(Default::default()),
            "lemma22" => ExperimentConfig::Lemma22(Default::default()),
            "growth" => ExperimentConfig::Growth(Default::default()),
            "oscillatory" => ExperimentConfig::Oscillatory(Default::default()),
            "wkb" => ExperimentConfig::Wkb(Default::default()),
            "diadic" => ExperimentConfig::Diadic(Default::default()),
            "variation" => ExperimentConfig::Variation(Default::default()),
            "fuzz_appendix" | "fuzz-appendix" => ExperimentConfig::FuzzAppendix(Default::default()),
            _ => return None,
        })
    }

    pub fn default_sweep(&self) -> SweepConfig {
        match self {
            ExperimentConfig::Lemma22(_) => SweepConfig::new(2.0, 4096),
            ExperimentConfig::Wkb(_) | ExperimentConfig::Growth(_) => SweepConfig::new(2.0, 32),
            ExperimentConfig::Oscillatory(_) => SweepConfig::new(2.0, 32),
            ExperimentConfig::Diadic(_) => SweepConfig::new(2.0, 8),
            _ => SweepConfig::new(2.0, 64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let key = |f: &str| format!("experiment.{f}");
        let check = |ok: bool, f: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(config_err(&key(f), msg))
            }
        };
        let ladder = |t: &[f64], f: &str| {
            check(!t.is_empty(), f, "must not be empty")?;
            check(
                t.iter().all(|x| *x > 0.0 && x.log2().fract() == 0.0),
                f,
                "entries must be powers of two",
            )?;
            check(t.windows(2).all(|w| w[1] > w[0]), f, "must be increasing")
        };
        match self {
            ExperimentConfig::Evolve(e) => {
                e.potential.validate(&key("potential"))?;
                e.symbol
                    .validate()
                    .map_err(|err| config_err(&key("symbol"), err.to_string()))?;
                check(e.t_end > 0.0, "t_end", "must be positive")?;
                check(e.observers >= 1, "observers", "need at least one")?;
                check(e.tol > 0.0, "tol", "must be positive")
            }
            ExperimentConfig::Sweep(e) => {
                e.potential.validate(&key("potential"))?;
                e.symbol
                    .validate()
                    .map_err(|err| config_err(&key("symbol"), err.to_string()))?;
                check(e.t_end > 0.0, "t_end", "must be positive")?;
                check(!e.observables.is_empty(), "observables", "must not be empty")
            }
            ExperimentConfig::Theorem11(e) => {
                e.potential.validate(&key("potential"))?;
                check(e.potential.is_real() != Some(false), "potential", "must be real")?;
                check(e.alpha > 0.0 && e.alpha < 0.5, "alpha", "must lie in (0, 1/2)")?;
                check(e.ensemble >= 1, "ensemble", "need at least one member")?;
                ladder(&e.t_list, "t_list")
            }
            ExperimentConfig::Lemma22(e) => {
                e.potential.validate(&key("potential"))?;
                check(
                    e.n_list.len() >= 2
                        && e.n_list.iter().all(|n| n.is_power_of_two())
                        && e.n_list.windows(2).all(|w| w[1] == 2 * w[0]),
                    "n_list",
                    "must be a doubling ladder of powers of two",
                )?;
                check(e.t_end > 0.0, "t_end", "must be positive")?;
                check(e.coarse >= 1 && e.grid >= e.coarse, "coarse", "must be in [1, grid]")
            }
            ExperimentConfig::Growth(e) => {
                e.potential.validate(&key("potential"))?;
                crate::estimators::ComplexVParams::new(e.p, e.alpha)
                    .map_err(|err| config_err(&key("p"), err.to_string()))?;
                check(e.t_list.len() >= 2, "t_list", "need at least two horizons")?;
                ladder(&e.t_list, "t_list")
            }
            ExperimentConfig::Oscillatory(e) => {
                check(e.gamma > 0.75 && e.gamma <= 1.0, "gamma", "must lie in (3/4, 1]")?;
                check(e.lambda > 0.0, "lambda", "must be positive")?;
                check(e.t_starts.len() >= 2, "t_starts", "need at least two start times")?;
                check(e.horizon_factor > 1.0, "horizon_factor", "must exceed 1")
            }
            ExperimentConfig::Wkb(e) => {
                crate::transport::DiadicParams::new(e.gamma, e.t_list.clone())
                    .map_err(|err| config_err(&key("gamma"), err.to_string()))?;
                ladder(&e.t_list, "t_list")?;
                check(e.observers >= 1, "observers", "need at least one")
            }
            ExperimentConfig::Diadic(e) => {
                crate::transport::DiadicParams::new(e.gamma, vec![])
                    .map_err(|err| config_err(&key("gamma"), err.to_string()))?;
                check(
                    e.j_max <= crate::transport::MAX_J,
                    "j_max",
                    "exceeds the supported block count",
                )?;
                check(e.lambda_list.len() >= 2, "lambda_list", "need at least two amplitudes")
            }
            ExperimentConfig::Variation(e) => {
                check(e.g_max >= 2 && e.g_max <= 20, "g_max", "must lie in [2, 20]")?;
                check(
                    e.betas.iter().all(|b| (1.0..=2.0).contains(b)),
                    "betas",
                    "must lie in [1, 2]",
                )
            }
            ExperimentConfig::FuzzAppendix(e) => {
                check(e.otriv_trials >= 1, "otriv_trials", "need at least one trial")?;
                check(e.dim_max >= 2, "dim_max", "must be at least 2")?;
                check(e.krein_trials >= 1, "krein_trials", "need at least one trial")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_nodes() {
        let s = SweepConfig::new(2.0, 8);
        let k = s.nodes();
        assert_eq!(k.len(), 8);
        assert!((k[0] + 1.75).abs() < 1e-15 && (k[7] - 1.75).abs() < 1e-15);
    }

    #[test]
    fn parses_defaults_and_names_bad_keys() {
        let cfg = RunConfig::from_json(r#"{"seed": 3, "experiment": {"name": "lemma22"}}"#).unwrap();
        assert_eq!(cfg.sweep().m, 4096);
        let err = RunConfig::from_json(r#"{"experiment": {"name": "lemma22", "bogus": 1}}"#)
            .unwrap_err();
        match err {
            Error::Config { key, .. } => assert!(key.contains("experiment"), "{key}"),
            e => panic!("{e}"),
        }
        let err =
            RunConfig::from_json(r#"{"sweep": {"a": 2, "m": 4}, "experiment": {"name": "wkb"}}"#)
                .unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "sweep.m"));
        let err = RunConfig::from_json(
            r#"{"experiment": {"name": "theorem11", "alpha": 0.7}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "experiment.alpha"));
    }

    #[test]
    fn recipes_build() {
        let r = PotentialRecipe::Decaying {
            l_max: 2,
            gamma: 0.9,
            c: 1.0,
            t_start: 0.0,
            t_end: 4.0,
            spacing: 0.5,
        };
        let p = r.build(1).unwrap();
        assert_eq!(p.times.len(), 9);
        let z: PotentialRecipe = serde_json::from_str(r#"{"kind": "zero"}"#).unwrap();
        assert!(z.build(0).unwrap().is_zero());
    }
}
