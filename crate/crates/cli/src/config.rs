//! JSON run configuration. Every field has a default, so `{"experiment":
//! "coherent_to_fock"}` is the reference case study.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use eigenforge_core::kernel::{lambda_param, MAX_INDEX_QUBITS};
use eigenforge_core::{Complex, IndexSize};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MIN_TRUNC: usize = 8;
pub const MAX_TRUNC: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    KernelPlot(KernelPlotConfig),
    BoundPlot(BoundPlotConfig),
    NumopFock(NumopFockConfig),
    CoherentToFock(CoherentToFockConfig),
    DisplacementSqueezed(DisplacementSqueezedConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelPlotConfig {
    pub m: u32,
    pub j: usize,
}

impl Default for KernelPlotConfig {
    fn default() -> Self {
        Self { m: 4, j: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundPlotConfig {
    pub m: u32,
    pub fqq2: f64,
    pub p_list: Vec<f64>,
}

impl Default for BoundPlotConfig {
    fn default() -> Self {
        Self {
            m: 4,
            fqq2: 0.6,
            p_list: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        }
    }
}

/// How the index register is read out. Without `forced_j` or `seed` the
/// readout closest to `ω_q` is forced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeConfig {
    pub forced_j: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumopFockConfig {
    pub n: usize,
    /// Defaults to `2π(1 − 1/M)`, which puts `|n⟩` exactly on outcome `n mod M`.
    pub omega_t: Option<f64>,
    pub m: u32,
    pub trunc: usize,
    pub forced_j: Option<usize>,
    pub seed: Option<u64>,
}

impl Default for NumopFockConfig {
    fn default() -> Self {
        Self {
            n: 5,
            omega_t: None,
            m: 3,
            trunc: 32,
            forced_j: None,
            seed: None,
        }
    }
}

impl NumopFockConfig {
    pub fn omega_t(&self) -> f64 {
        self.omega_t
            .unwrap_or_else(|| TAU * (1.0 - 1.0 / (1u64 << self.m) as f64))
    }
}

/// A complex parameter written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexParam {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexParam {
    pub fn value(self) -> Complex {
        match self {
            Self::Real(re) => Complex::new(re, 0.0),
            Self::Pair([re, im]) => Complex::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherentToFockConfig {
    pub alpha: ComplexParam,
    pub m: u32,
    pub omega_t: f64,
    pub n_target: usize,
    pub trunc: usize,
    pub forced_j: Option<usize>,
    pub seed: Option<u64>,
}

impl Default for CoherentToFockConfig {
    fn default() -> Self {
        Self {
            alpha: ComplexParam::Real(3.0),
            m: 4,
            omega_t: 1.0,
            n_target: 9,
            trunc: 64,
            forced_j: Some(9),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisplacementSqueezedConfig {
    pub alpha_state: f64,
    pub r: f64,
    pub d: f64,
    pub m: u32,
    pub trunc: usize,
    pub tail_ceiling: f64,
    pub forced_j: Option<usize>,
    pub seed: Option<u64>,
}

impl Default for DisplacementSqueezedConfig {
    fn default() -> Self {
        Self {
            alpha_state: 1.0,
            r: 1.0,
            d: 0.1,
            m: 4,
            trunc: 128,
            tail_ceiling: eigenforge_core::fock::DEFAULT_TAIL_CEILING,
            forced_j: None,
            seed: None,
        }
    }
}

/// Subcommand names, matching the `experiment` tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    KernelPlot,
    BoundPlot,
    NumopFock,
    CoherentToFock,
    DisplacementSqueezed,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::KernelPlot => "kernel_plot",
            Self::BoundPlot => "bound_plot",
            Self::NumopFock => "numop_fock",
            Self::CoherentToFock => "coherent_to_fock",
            Self::DisplacementSqueezed => "displacement_squeezed",
        }
    }
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Experiment {
        match self {
            Self::KernelPlot(_) => Experiment::KernelPlot,
            Self::BoundPlot(_) => Experiment::BoundPlot,
            Self::NumopFock(_) => Experiment::NumopFock,
            Self::CoherentToFock(_) => Experiment::CoherentToFock,
            Self::DisplacementSqueezed(_) => Experiment::DisplacementSqueezed,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Applies `--forced-j` and `--seed`. A forced outcome wins over a seed
    /// from either source.
    pub fn with_overrides(mut self, forced_j: Option<usize>, seed: Option<u64>) -> Result<Self, CliError> {
        if forced_j.is_none() && seed.is_none() {
            return Ok(self);
        }
        let (slot_j, slot_seed) = match &mut self {
            Self::NumopFock(c) => (&mut c.forced_j, &mut c.seed),
            Self::CoherentToFock(c) => (&mut c.forced_j, &mut c.seed),
            Self::DisplacementSqueezed(c) => (&mut c.forced_j, &mut c.seed),
            Self::KernelPlot(_) | Self::BoundPlot(_) => {
                return Err(CliError::Config(format!(
                    "{} does not measure; --forced-j and --seed do not apply",
                    self.experiment().name()
                )))
            }
        };
        if let Some(seed) = seed {
            *slot_seed = Some(seed);
            *slot_j = None;
        }
        if forced_j.is_some() {
            *slot_j = forced_j;
        }
        self.validate()?;
        Ok(self)
    }

    /// Readout settings of the measuring experiments.
    pub fn outcome(&self) -> Option<OutcomeConfig> {
        let (forced_j, seed) = match self {
            Self::NumopFock(c) => (c.forced_j, c.seed),
            Self::CoherentToFock(c) => (c.forced_j, c.seed),
            Self::DisplacementSqueezed(c) => (c.forced_j, c.seed),
            Self::KernelPlot(_) | Self::BoundPlot(_) => return None,
        };
        Some(OutcomeConfig { forced_j, seed })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Self::KernelPlot(c) => {
                let size = index_size(c.m)?;
                below("j", c.j, size.dim())
            }
            Self::BoundPlot(c) => {
                let size = index_size(c.m)?;
                finite("fqq2", c.fqq2)?;
                if !(c.fqq2 > 0.4 && c.fqq2 <= 1.0) {
                    return Err(invalid("fqq2 must lie in (0.4, 1]"));
                }
                if c.fqq2 <= lambda_param(size) {
                    return Err(invalid("fqq2 must exceed λ for the chosen m"));
                }
                if c.p_list.is_empty() {
                    return Err(invalid("p_list is empty"));
                }
                for &p in &c.p_list {
                    finite("p", p)?;
                    if !(p > 0.0 && p < 1.0) {
                        return Err(invalid(&format!("p = {p} outside (0, 1)")));
                    }
                }
                Ok(())
            }
            Self::NumopFock(c) => {
                let size = index_size(c.m)?;
                trunc(c.trunc)?;
                below("n", c.n, c.trunc)?;
                finite("omega_t", c.omega_t())?;
                below_opt(c.forced_j, size)
            }
            Self::CoherentToFock(c) => {
                let size = index_size(c.m)?;
                trunc(c.trunc)?;
                below("n_target", c.n_target, c.trunc)?;
                let alpha = c.alpha.value();
                finite("alpha", alpha.re)?;
                finite("alpha", alpha.im)?;
                finite("omega_t", c.omega_t)?;
                below_opt(c.forced_j, size)
            }
            Self::DisplacementSqueezed(c) => {
                let size = index_size(c.m)?;
                trunc(c.trunc)?;
                for (name, v) in [("alpha_state", c.alpha_state), ("r", c.r), ("d", c.d)] {
                    finite(name, v)?;
                }
                if c.alpha_state < 0.0 || c.r < 0.0 {
                    return Err(invalid("alpha_state and r must be non-negative"));
                }
                if !(c.tail_ceiling > 0.0 && c.tail_ceiling < 1.0) {
                    return Err(invalid("tail_ceiling must lie in (0, 1)"));
                }
                below_opt(c.forced_j, size)
            }
        }
    }
}

fn invalid(msg: &str) -> CliError {
    CliError::Config(msg.to_string())
}

fn index_size(m: u32) -> Result<IndexSize, CliError> {
    if m > MAX_INDEX_QUBITS {
        return Err(invalid(&format!("m = {m} exceeds {MAX_INDEX_QUBITS}")));
    }
    IndexSize::new(m).map_err(|e| CliError::Config(e.to_string()))
}

fn trunc(t: usize) -> Result<(), CliError> {
    if (MIN_TRUNC..=MAX_TRUNC).contains(&t) {
        Ok(())
    } else {
        Err(invalid(&format!("trunc = {t} outside [{MIN_TRUNC}, {MAX_TRUNC}]")))
    }
}

fn below(name: &str, v: usize, bound: usize) -> Result<(), CliError> {
    if v < bound {
        Ok(())
    } else {
        Err(invalid(&format!("{name} = {v} must be below {bound}")))
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(&format!("{name} is not finite")))
    }
}

fn below_opt(forced_j: Option<usize>, size: IndexSize) -> Result<(), CliError> {
    match forced_j {
        Some(j) => below("forced_j", j, size.dim()),
        None => Ok(()),
    }
}
