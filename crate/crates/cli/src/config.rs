//! Experiment configuration, read from TOML.
//!
//! Frequencies are given in units of the branch cycle frequency `Omega` and
//! times in units of `1/Omega`. Unknown keys are rejected.

use serde::Deserialize;

use bipartite_gp::boson::{BosonBathSpec, PrefactorConvention, Spectral};
use bipartite_gp::evolution::{EnvironmentSpec, InitialState};
use bipartite_gp::spin::{BathSpin, SpinBathSpec};
use bipartite_gp::state::{Branch, GeneralInitialState, SystemParams, WernerSpec};
use bipartite_gp::C64;

use crate::ConfigError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Winding number `n`.
    #[serde(default = "one")]
    pub cycles: u32,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    /// Seed for random spin baths.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodChoice,
    /// Sampling intervals per cycle for the kinematic method.
    #[serde(default = "default_steps")]
    pub steps_per_cycle: usize,
    /// Evaluation time for concurrence, entropy and factors when there is no
    /// `t` axis; defaults to the end of the last cycle.
    #[serde(default)]
    pub time: Option<f64>,
    #[serde(default)]
    pub system: SystemSection,
    pub state: StateSection,
    pub env: EnvSection,
    #[serde(default)]
    pub sweep: Vec<Axis>,
}

fn one() -> u32 {
    1
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Geophase, OutputKind::DeltaPhi]
}

fn default_steps() -> usize {
    2000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Geophase,
    DeltaPhi,
    Series,
    Concurrence,
    Entropy,
    Factors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Reduced integrand for `r = 1` Werner states, kinematic otherwise.
    #[default]
    Auto,
    Reduced,
    Kinematic,
    Perturbative,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "unit")]
    pub omega1: f64,
    #[serde(default)]
    pub omega2: f64,
    #[serde(default)]
    pub gamma_qq: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { omega1: 1.0, omega2: 0.0, gamma_qq: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchName {
    Theta,
    Mu,
}

impl From<BranchName> for Branch {
    fn from(b: BranchName) -> Self {
        match b {
            BranchName::Theta => Branch::Theta,
            BranchName::Mu => Branch::Mu,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSection {
    Werner {
        #[serde(default = "unit")]
        r: f64,
        #[serde(default)]
        p: f64,
        #[serde(default = "theta")]
        branch: BranchName,
    },
    /// Amplitudes of `|00>, |01>, |10>, |11>` as `[re, im]` pairs; `cycle`
    /// selects which coherence defines the period.
    Pure {
        amplitudes: [[f64; 2]; 4],
        #[serde(default = "theta")]
        cycle: BranchName,
    },
}

fn theta() -> BranchName {
    BranchName::Theta
}

impl StateSection {
    pub fn branch(&self) -> Branch {
        match self {
            StateSection::Werner { branch, .. } => (*branch).into(),
            StateSection::Pure { cycle, .. } => (*cycle).into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralName {
    Ohmic,
    Supraohmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionName {
    #[default]
    MainText,
    Appendix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSection {
    Boson {
        spectral: SpectralName,
        #[serde(default)]
        gamma0: f64,
        /// Multipliers of `gamma0` for `gamma01, gamma02, gamma012`.
        #[serde(default = "equal_ratios")]
        coupling_ratios: [f64; 3],
        #[serde(default = "hundred")]
        lambda_over_omega: f64,
        #[serde(default)]
        convention: ConventionName,
    },
    Spin {
        bath: SpinBathSection,
    },
    Closed,
}

fn equal_ratios() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

fn hundred() -> f64 {
    100.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpinBathSection {
    /// `n_spins` identical spins with `h = h_over_omega * Omega`,
    /// `lam = lambda_over_h * h` and `eps = eps_over_lambda * lam`.
    Homogeneous {
        n_spins: usize,
        #[serde(default = "unit")]
        h_over_omega: f64,
        #[serde(default)]
        lambda_over_h: f64,
        #[serde(default = "unit")]
        eps_over_lambda: f64,
    },
    /// Parameters drawn uniformly from the ranges (units of `Omega`).
    Random {
        n_spins: usize,
        h_range: [f64; 2],
        eps_range: [f64; 2],
        lam_range: [f64; 2],
    },
    Explicit {
        spins: Vec<SpinEntry>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinEntry {
    pub h: f64,
    pub eps: f64,
    pub lam: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    P,
    Gamma0,
    LambdaOverH,
    NSpins,
    R,
    T,
}

impl AxisName {
    pub fn column(self) -> &'static str {
        match self {
            AxisName::P => "p",
            AxisName::Gamma0 => "gamma0",
            AxisName::LambdaOverH => "lambda_over_h",
            AxisName::NSpins => "n_spins",
            AxisName::R => "r",
            AxisName::T => "t",
        }
    }
}

/// One sweep axis: either `start`/`stop`/`steps` (inclusive linear grid) or
/// an explicit `values` list.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub axis: AxisName,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    pub values: Option<Vec<f64>>,
}

impl Axis {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    Err("values must not be empty".into())
                } else {
                    Ok(v.clone())
                }
            }
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return Err("steps must be >= 1".into());
                }
                if n == 1 {
                    return Ok(vec![a]);
                }
                Ok((0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect())
            }
            _ => Err("give either `values` or all of `start`, `stop`, `steps`".into()),
        }
    }
}

/// Parses and validates a TOML configuration.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = toml::de::Deserializer::parse(text)
        .map_err(|e| ConfigError::Parse { path: String::new(), message: e.to_string() })?;
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| ConfigError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    /// Checks everything that can be checked without running the sweep.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cycles == 0 {
            return Err(invalid("cycles", "must be >= 1"));
        }
        if self.steps_per_cycle < 2 {
            return Err(invalid("steps_per_cycle", "must be >= 2"));
        }
        if self.outputs.is_empty() {
            return Err(invalid("outputs", "must not be empty"));
        }
        if let Some(t) = self.time {
            if !(t >= 0.0) {
                return Err(invalid("time", "must be >= 0"));
            }
        }
        let params = self.system_params().map_err(|e| invalid("system", e.to_string()))?;
        params.checked_cycle_frequency(self.state.branch()).map_err(|e| invalid("system", e.to_string()))?;

        let mut seen = Vec::new();
        for (i, axis) in self.sweep.iter().enumerate() {
            let path = format!("sweep[{i}]");
            if seen.contains(&axis.axis) {
                return Err(invalid(&path, format!("axis `{}` given twice", axis.axis.column())));
            }
            seen.push(axis.axis);
            let points = axis.points().map_err(|m| invalid(&path, m))?;
            self.check_axis(axis.axis, &points).map_err(|m| invalid(&path, m))?;
        }
        // the unswept configuration must itself be buildable
        let point = self.base_point();
        self.initial_state(&point).map_err(|e| invalid("state", e.to_string()))?;
        self.environment(&point).map_err(|e| invalid("env", e.to_string()))?;
        Ok(())
    }

    fn check_axis(&self, axis: AxisName, points: &[f64]) -> Result<(), String> {
        let werner = matches!(self.state, StateSection::Werner { .. });
        match axis {
            AxisName::P | AxisName::R if !werner => Err("only Werner states have `p` and `r`".into()),
            AxisName::Gamma0 if !matches!(self.env, EnvSection::Boson { .. }) => {
                Err("`gamma0` needs a bosonic environment".into())
            }
            AxisName::LambdaOverH
                if !matches!(self.env, EnvSection::Spin { bath: SpinBathSection::Homogeneous { .. } }) =>
            {
                Err("`lambda_over_h` needs a homogeneous spin bath".into())
            }
            AxisName::NSpins
                if !matches!(
                    self.env,
                    EnvSection::Spin { bath: SpinBathSection::Homogeneous { .. } | SpinBathSection::Random { .. } }
                ) =>
            {
                Err("`n_spins` needs a homogeneous or random spin bath".into())
            }
            AxisName::NSpins if points.iter().any(|&n| n < 1.0 || n.fract() != 0.0) => {
                Err("`n_spins` values must be positive integers".into())
            }
            AxisName::P if points.iter().any(|p| !(0.0..=1.0).contains(p)) => Err("`p` must lie in [0, 1]".into()),
            AxisName::R if points.iter().any(|&r| !(r > 0.0 && r <= 1.0)) => Err("`r` must lie in (0, 1]".into()),
            AxisName::Gamma0 if points.iter().any(|&g| !(g >= 0.0)) => Err("`gamma0` must be >= 0".into()),
            AxisName::T if points.iter().any(|&t| !(t >= 0.0)) => Err("`t` must be >= 0".into()),
            _ => Ok(()),
        }
    }

    pub fn system_params(&self) -> bipartite_gp::Result<SystemParams> {
        SystemParams::new(self.system.omega1, self.system.omega2, self.system.gamma_qq)
    }

    /// |Omega| of the configured branch.
    pub fn omega(&self) -> f64 {
        self.system_params().map(|p| p.cycle_frequency(self.state.branch()).abs()).unwrap_or(f64::NAN)
    }

    /// Values of every axis quantity before any sweep override.
    pub fn base_point(&self) -> Point {
        let (r, p) = match self.state {
            StateSection::Werner { r, p, .. } => (r, p),
            StateSection::Pure { .. } => (1.0, 0.0),
        };
        let gamma0 = match self.env {
            EnvSection::Boson { gamma0, .. } => gamma0,
            _ => 0.0,
        };
        let (lambda_over_h, n_spins) = match &self.env {
            EnvSection::Spin { bath: SpinBathSection::Homogeneous { lambda_over_h, n_spins, .. } } => {
                (*lambda_over_h, *n_spins)
            }
            EnvSection::Spin { bath: SpinBathSection::Random { n_spins, .. } } => (0.0, *n_spins),
            EnvSection::Spin { bath: SpinBathSection::Explicit { spins } } => (0.0, spins.len()),
            _ => (0.0, 0),
        };
        let t = self.time.unwrap_or(self.cycles as f64 * std::f64::consts::TAU);
        Point { p, r, gamma0, lambda_over_h, n_spins, t }
    }

    pub fn initial_state(&self, point: &Point) -> bipartite_gp::Result<InitialState> {
        match &self.state {
            StateSection::Werner { branch, .. } => {
                Ok(InitialState::Werner(WernerSpec::new(point.r, point.p, (*branch).into())?))
            }
            StateSection::Pure { amplitudes, .. } => {
                let a = amplitudes.map(|[re, im]| C64::new(re, im));
                Ok(InitialState::Pure(GeneralInitialState::new(a[0], a[1], a[2], a[3])?))
            }
        }
    }

    pub fn environment(&self, point: &Point) -> bipartite_gp::Result<EnvironmentSpec> {
        let omega = self.omega();
        match &self.env {
            EnvSection::Closed => Ok(EnvironmentSpec::Closed),
            EnvSection::Boson { spectral, coupling_ratios: [a, b, c], lambda_over_omega, convention, .. } => {
                let spectral = match spectral {
                    SpectralName::Ohmic => Spectral::Ohmic,
                    SpectralName::Supraohmic => Spectral::Supraohmic,
                };
                let convention = match convention {
                    ConventionName::MainText => PrefactorConvention::MainText,
                    ConventionName::Appendix => PrefactorConvention::Appendix,
                };
                let g = point.gamma0;
                let spec = BosonBathSpec::new(spectral, a * g, b * g, c * g, lambda_over_omega * omega)?
                    .with_convention(convention);
                Ok(EnvironmentSpec::Boson(spec))
            }
            EnvSection::Spin { bath } => {
                let spec = match bath {
                    SpinBathSection::Homogeneous { h_over_omega, eps_over_lambda, .. } => {
                        let h = h_over_omega * omega;
                        let lam = point.lambda_over_h * h;
                        SpinBathSpec::homogeneous(point.n_spins, h, eps_over_lambda * lam, lam)?
                    }
                    SpinBathSection::Random { h_range, eps_range, lam_range, .. } => {
                        let scale = |[lo, hi]: [f64; 2]| (lo * omega, hi * omega);
                        SpinBathSpec::random(
                            point.n_spins,
                            scale(*h_range),
                            scale(*eps_range),
                            scale(*lam_range),
                            self.seed,
                        )?
                    }
                    SpinBathSection::Explicit { spins } => SpinBathSpec::new(
                        spins
                            .iter()
                            .map(|s| BathSpin { h: s.h * omega, eps: s.eps * omega, lam: s.lam * omega })
                            .collect(),
                    )?,
                };
                Ok(EnvironmentSpec::Spin(spec))
            }
        }
    }
}

/// Values of the sweepable quantities at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub p: f64,
    pub r: f64,
    pub gamma0: f64,
    pub lambda_over_h: f64,
    pub n_spins: usize,
    /// Time in units of `1/Omega`.
    pub t: f64,
}

impl Point {
    pub fn set(&mut self, axis: AxisName, value: f64) {
        match axis {
            AxisName::P => self.p = value,
            AxisName::R => self.r = value,
            AxisName::Gamma0 => self.gamma0 = value,
            AxisName::LambdaOverH => self.lambda_over_h = value,
            AxisName::NSpins => self.n_spins = value as usize,
            AxisName::T => self.t = value,
        }
    }
}
