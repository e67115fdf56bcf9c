//! Run configuration: a JSON file whose fields are overridden by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use smashline::diffusion::{DiffusionParams, ResidualGrid};
use smashline::matrix_realization::{DualVariant, GaussianMixture, GridSpec, Regime};
use smashline::random_walk::StepDensity;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Heat-kernel prefactor exponent used by `diffusion residual`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Prefactor {
    /// `(4πα1 t)^{-1/2}`.
    #[default]
    Half,
    /// `(4πα1 t)^{-1}`.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoproductConfig {
    pub k: usize,
    pub l: usize,
    pub parts: usize,
}

impl Default for CoproductConfig {
    fn default() -> Self {
        Self { k: 2, l: 1, parts: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "Q")]
    pub big_q: f64,
    pub step: StepDensity,
    /// Step counts of the moment table.
    pub n: Vec<usize>,
    pub k_max: usize,
    pub l_max: usize,
    pub oracle: bool,
    pub coproduct: CoproductConfig,
    pub diffusion: DiffusionParams,
    pub grid: GridSpec,
    pub residual: ResidualGrid,
    pub variant: DualVariant,
    pub regime: Regime,
    /// Width of the Gaussian standing in for point-mass initial data.
    pub sigma0: f64,
    /// Initial mixtures, one per component; defaults to `N(0, sigma0²)` each.
    pub initial: Option<Vec<GaussianMixture>>,
    /// Times sampled by `diffusion closed-form`.
    pub times: Vec<f64>,
    pub prefactor: Prefactor,
    /// Orders checked by `verify`.
    pub orders: Vec<usize>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            order: 2,
            big_q: 1.0,
            step: StepDensity { a: 1.0, p1: 0.3, theta: 0.7, p2: 0.6 },
            n: vec![3],
            k_max: 2,
            l_max: 1,
            oracle: false,
            coproduct: CoproductConfig::default(),
            diffusion: DiffusionParams { c1: 0.5, alpha1: 0.5, c2: 1.0, ..DiffusionParams::default() },
            grid: GridSpec::default(),
            residual: ResidualGrid::default(),
            variant: DualVariant::default(),
            regime: Regime::default(),
            sigma0: 0.05,
            initial: None,
            times: vec![0.5, 1.0, 2.0],
            prefactor: Prefactor::default(),
            orders: vec![2, 3, 4],
            format: Format::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))
            }
        }
    }

    /// Initial mixtures for the coupled solver.
    pub fn initial_mixtures(&self) -> CliResult<Vec<GaussianMixture>> {
        match &self.initial {
            Some(m) if m.len() != self.order => {
                Err(CliError::Validation(format!("{} initial mixtures given for N = {}", m.len(), self.order)))
            }
            Some(m) => Ok(m.clone()),
            None => {
                if !(self.sigma0 > 0.0) {
                    return Err(CliError::Validation(format!("sigma0 = {} must be positive", self.sigma0)));
                }
                let g = GaussianMixture::single(num_complex::Complex64::new(1.0, 0.0), 0.0, self.sigma0 * self.sigma0);
                Ok(vec![g; self.order])
            }
        }
    }
}

/// Overwrite `target` when a flag was given.
pub fn set<T>(target: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *target = v;
    }
}
