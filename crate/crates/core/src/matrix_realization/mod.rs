//! N-dimensional matrix realizations of ξ, `D_ξ` and `D_ξ*`, the
//! triangular operator `H` acting on the component functions `ρ_k(x)`, and a
//! finite-difference solver for the resulting coupled diffusion system.
//!
//! Index convention: matrices are 0-based. The paper-style superdiagonal
//! entry `(i, i+1)` for `i = 1..N-1` is stored at `[i-1][i]`. Acting on a
//! column vector of ξ-coefficients, a superdiagonal matrix lowers the ξ
//! degree, which is how `D_ξ`, `D_ξ*` and the operator `H` act.

mod duhamel;
mod grid;
mod solver;

pub use duhamel::{adaptive_simpson, duhamel_mixtures, duhamel_oracle, duhamel_weights};
pub use grid::{Gaussian, GaussianMixture, GridSpec, Scheme, SystemState};
pub use solver::{solve_system, SolveOutput};

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffusion::DiffusionParams;
use crate::error::{Result, SmashError};
use crate::qcalculus::{dual_derivative_weight, q_number, Deformation, XiPolynomial};

/// Dense N×N complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl RepMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::default(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Matrix with `values[i]` at `(i, i + offset)`.
    pub fn with_superdiagonal(dim: usize, offset: usize, values: &[Complex64]) -> Self {
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate().take(dim.saturating_sub(offset)) {
            m.set(i, i + offset, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.entries[row * self.dim + col] = v;
    }

    /// Entries `(i, i + offset)` for `i = 0..dim-offset`.
    pub fn superdiagonal(&self, offset: usize) -> Vec<Complex64> {
        (0..self.dim.saturating_sub(offset)).map(|i| self.get(i, i + offset)).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&v| v * s).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::identity(self.dim), |acc, _| &acc * self)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    /// Action on a column vector of ξ-coefficients.
    pub fn apply_poly(&self, f: &XiPolynomial) -> XiPolynomial {
        XiPolynomial::from_coeffs(self.dim, &self.apply(f.coeffs())).expect("same dimension")
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == Complex64::default())
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.dim).all(|i| (0..=i).all(|j| self.get(i, j) == Complex64::default()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `exp(M)` for strictly upper-triangular `M`: the series stops after
    /// `dim` terms because `M^dim = 0`.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if !self.is_strictly_upper() {
            return Err(SmashError::InvalidParameter("exp_nilpotent needs a strictly upper-triangular matrix".into()));
        }
        let mut total = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..self.dim {
            term = (&term * self).scale(Complex64::new(1.0 / k as f64, 0.0));
            total = &total + &term;
        }
        Ok(total)
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect()).collect()
    }
}

impl Mul for &RepMatrix {
    type Output = RepMatrix;
    fn mul(self, rhs: &RepMatrix) -> RepMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = RepMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::default() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

impl Add for &RepMatrix {
    type Output = RepMatrix;
    fn add(self, rhs: &RepMatrix) -> RepMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        RepMatrix { dim: self.dim, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect() }
    }
}

impl Serialize for RepMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Dump {
            #[serde(rename = "N")]
            dim: usize,
            entries: Vec<Vec<[f64; 2]>>,
        }
        Dump { dim: self.dim, entries: self.to_rows() }.serialize(s)
    }
}

/// Which superdiagonal to use for `D_ξ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualVariant {
    /// `{i} exp(ω^{-1} {i})`, the entries used in the printed operator `H`.
    #[default]
    Printed,
    /// `-q^{-i} [i]_q`, the matrix of `-D_ξ L_{q^{-1}}` on monomials.
    Algebraic,
}

impl std::str::FromStr for DualVariant {
    type Err = SmashError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Self::Printed),
            "algebraic" => Ok(Self::Algebraic),
            other => Err(SmashError::InvalidParameter(format!("unknown D* variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for DualVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Printed => "printed",
            Self::Algebraic => "algebraic",
        })
    }
}

fn deformation(order: usize) -> Result<Deformation> {
    Deformation::new(order)
}

/// Ones on the superdiagonal. As a right action on row coefficient vectors
/// (equivalently, its transpose on columns) this is multiplication by ξ.
pub fn xi_matrix(order: usize) -> Result<RepMatrix> {
    deformation(order)?;
    Ok(RepMatrix::with_superdiagonal(order, 1, &vec![Complex64::new(1.0, 0.0); order - 1]))
}

/// Superdiagonal `{1}, …, {N-1}` with `{i} = (1 - ω^i)/(1 - ω)`.
pub fn d_xi_matrix(order: usize) -> Result<RepMatrix> {
    let d = deformation(order)?;
    let diag: Vec<_> = (1..order).map(|i| q_number(i, &d)).collect();
    Ok(RepMatrix::with_superdiagonal(order, 1, &diag))
}

/// The coefficients `λ_1 … λ_{N-1}` of the chosen `D_ξ*` realization.
pub fn dual_lambdas(order: usize, variant: DualVariant) -> Result<Vec<Complex64>> {
    let d = deformation(order)?;
    let omega_inv = d.q_pow(-1);
    Ok((1..order)
        .map(|i| match variant {
            DualVariant::Printed => {
                let bracket = q_number(i, &d);
                bracket * (omega_inv * bracket).exp()
            }
            DualVariant::Algebraic => dual_derivative_weight(i, &d),
        })
        .collect())
}

pub fn d_xi_star_matrix(order: usize, variant: DualVariant) -> Result<RepMatrix> {
    Ok(RepMatrix::with_superdiagonal(order, 1, &dual_lambdas(order, variant)?))
}

/// Regular representation of `f = Σ f_i ξ^i`: the lower-triangular Toeplitz
/// matrix `Σ f_i (ξ-matrixᵀ)^i`, acting on columns as multiplication by `f`.
pub fn regular_representation(f: &XiPolynomial) -> Result<RepMatrix> {
    let n = f.order();
    let shift = xi_matrix(n)?.transpose();
    let mut acc = RepMatrix::zeros(n);
    let mut power = RepMatrix::identity(n);
    for &c in f.coeffs() {
        acc = &acc + &power.scale(c);
        power = &power * &shift;
    }
    Ok(acc)
}

/// Stationary or Hamiltonian-drifted generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    #[default]
    Stationary,
    Nonstationary,
}

/// The block operator `H`: a scalar advection–diffusion operator
/// `H_x = drift·D_x + diffusivity·D_x²` on every component, plus a strictly
/// upper-triangular coupling between components.
///
/// Component equation `k` reads `∂_t ρ_k = H_x ρ_k + Σ_{j>k} coupling[k][j] ρ_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledOperator {
    /// Coefficient of `D_x` (so `-c1` in the stationary case).
    pub drift: f64,
    /// Coefficient of `D_x²`.
    pub diffusivity: f64,
    pub coupling: RepMatrix,
}

impl CoupledOperator {
    pub fn order(&self) -> usize {
        self.coupling.dim()
    }

    /// `c2 λ_{k+1}` in the stationary case; zero for `k >= N-1`.
    pub fn first_coupling(&self, k: usize) -> Complex64 {
        if k + 1 < self.order() {
            self.coupling.get(k, k + 1)
        } else {
            Complex64::default()
        }
    }

    /// `α2 λ_{k+1} λ_{k+2}` in the stationary case; zero for `k >= N-2`.
    pub fn second_coupling(&self, k: usize) -> Complex64 {
        if k + 2 < self.order() {
            self.coupling.get(k, k + 2)
        } else {
            Complex64::default()
        }
    }

    /// Advection velocity of the scalar part (`∂_t ρ = -v ∂_x ρ + …`).
    pub fn velocity(&self) -> f64 {
        -self.drift
    }
}

/// Assemble `H` for `N` components.
///
/// Stationary: `H_x = -c1 D_x + α1 D_x²`, coupling `c2 D* + α2 D*²`.
/// Nonstationary adds `+λ d1 D_x - λ̃ d2 D*`.
pub fn assemble_h(order: usize, p: &DiffusionParams, variant: DualVariant, regime: Regime) -> Result<CoupledOperator> {
    let dstar = d_xi_star_matrix(order, variant)?;
    let dstar2 = &dstar * &dstar;
    let (drift, first) = match regime {
        Regime::Stationary => (-p.c1, Complex64::new(p.c2, 0.0)),
        Regime::Nonstationary => (-p.c1 + p.lambda * p.d1, Complex64::new(p.c2 - p.lambda_tilde * p.d2, 0.0)),
    };
    let coupling = &dstar.scale(first) + &dstar2.scale(p.alpha2);
    Ok(CoupledOperator { drift, diffusivity: p.alpha1, coupling })
}
