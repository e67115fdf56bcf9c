use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmashError};

/// Time stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    #[serde(alias = "crank-nicolson")]
    Cn,
    Rk4,
}

impl std::str::FromStr for Scheme {
    type Err = SmashError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cn" | "crank-nicolson" => Ok(Self::Cn),
            "rk4" => Ok(Self::Rk4),
            other => Err(SmashError::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Uniform space-time grid for the coupled solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Keep a snapshot every `stride` steps (the final state is always kept).
    pub stride: usize,
    /// First-order upwinding of the drift when the cell Péclet number
    /// `|v| dx / α1` exceeds 2.
    pub upwind: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, dx: 0.01, dt: 1e-3, t_end: 1.0, scheme: Scheme::Cn, stride: 0, upwind: false }
    }
}

impl GridSpec {
    /// Default explicit-scheme grid (smaller time step).
    pub fn explicit() -> Self {
        Self { dt: 2.5e-4, scheme: Scheme::Rk4, ..Self::default() }
    }

    pub fn points(&self) -> usize {
        ((self.x_max - self.x_min) / self.dx).round() as usize + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self, alpha1: f64) -> Result<()> {
        let bad = |msg: String| Err(SmashError::DegenerateGrid(msg));
        if !(self.x_max > self.x_min) {
            return bad(format!("x_max = {} must exceed x_min = {}", self.x_max, self.x_min));
        }
        if !(self.dx > 0.0) || !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return bad("dx, dt and t_end must be positive".into());
        }
        let cells = (self.x_max - self.x_min) / self.dx;
        if (cells - cells.round()).abs() > 1e-6 || cells.round() < 4.0 {
            return bad(format!(
                "dx = {} does not split [{}, {}] into at least 4 whole cells",
                self.dx, self.x_min, self.x_max
            ));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 {
            return bad(format!("dt = {} does not divide t_end = {}", self.dt, self.t_end));
        }
        if self.scheme == Scheme::Rk4 {
            let ratio = alpha1 * self.dt / (self.dx * self.dx);
            if ratio > 0.25 {
                return Err(SmashError::StabilityBound { ratio });
            }
        }
        Ok(())
    }
}

/// `weight · N(mean, var)` as a density in x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub weight: Complex64,
    pub mean: f64,
    pub var: f64,
}

impl Gaussian {
    pub fn new(weight: Complex64, mean: f64, var: f64) -> Self {
        Self { weight, mean, var }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let z = x - self.mean;
        self.weight * ((-z * z / (2.0 * self.var)).exp() / (2.0 * PI * self.var).sqrt())
    }
}

/// Finite sum of Gaussians; closed under the drifted heat flow.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub terms: Vec<Gaussian>,
}

impl GaussianMixture {
    pub fn single(weight: Complex64, mean: f64, var: f64) -> Self {
        Self { terms: vec![Gaussian::new(weight, mean, var)] }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|g| g.eval(x)).sum()
    }

    /// Evolve under `∂_t ρ = -v ∂_x ρ + α ∂_x² ρ` for time `tau`.
    pub fn evolve(&self, tau: f64, velocity: f64, diffusivity: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|g| Gaussian::new(g.weight, g.mean + velocity * tau, g.var + 2.0 * diffusivity * tau))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.iter().all(|g| g.var > 0.0 && g.var.is_finite() && g.mean.is_finite()) {
            Ok(())
        } else {
            Err(SmashError::NotGaussianMixture)
        }
    }
}

/// The N component functions `ρ_0 … ρ_{N-1}` on a shared uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub x_min: f64,
    pub dx: f64,
    pub time: f64,
    pub components: Vec<Vec<Complex64>>,
}

impl SystemState {
    /// Sample mixtures onto the grid of `g`.
    pub fn from_mixtures(g: &GridSpec, mixtures: &[GaussianMixture]) -> Result<Self> {
        for m in mixtures {
            m.validate()?;
        }
        let n = g.points();
        let components = mixtures.iter().map(|m| (0..n).map(|i| m.eval(g.x(i))).collect()).collect();
        Ok(Self { x_min: g.x_min, dx: g.dx, time: 0.0, components })
    }

    pub fn order(&self) -> usize {
        self.components.len()
    }

    pub fn points(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn l2_norm(&self, k: usize) -> f64 {
        (self.components[k].iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx).sqrt()
    }

    /// `∫ ρ_k dx` by the trapezoid rule (endpoints vanish under Dirichlet data).
    pub fn mass(&self, k: usize) -> Complex64 {
        self.components[k].iter().sum::<Complex64>() * self.dx
    }

    /// `‖self_k - other_k‖₂ / ‖other_k‖₂`.
    pub fn relative_l2(&self, other: &Self, k: usize) -> f64 {
        assert_eq!(self.points(), other.points(), "grid mismatch");
        let diff: f64 = self.components[k].iter().zip(&other.components[k]).map(|(a, b)| (a - b).norm_sqr()).sum();
        let base: f64 = other.components[k].iter().map(|b| b.norm_sqr()).sum();
        if base == 0.0 {
            diff.sqrt()
        } else {
            (diff / base).sqrt()
        }
    }

    /// Largest relative L2 error over all components.
    pub fn max_relative_l2(&self, other: &Self) -> f64 {
        (0..self.order()).map(|k| self.relative_l2(other, k)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Mass in the `cells` outermost grid cells at each end, relative to the
    /// total absolute mass of the component (absolute if that is zero).
    pub fn boundary_mass(&self, k: usize, cells: usize) -> f64 {
        let c = &self.components[k];
        let n = c.len();
        let cells = cells.min(n / 2);
        let edge: f64 = c[..cells].iter().chain(&c[n - cells..]).map(|v| v.norm()).sum::<f64>() * self.dx;
        let total: f64 = c.iter().map(|v| v.norm()).sum::<f64>() * self.dx;
        if total == 0.0 {
            edge
        } else {
            edge / total
        }
    }
}
