//! Continuum limit of the walk: parameter substitutions, the drifted heat
//! kernel, the ξ-sector evolution, PDE residuals and the limiting functional.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Result, SmashError};
use crate::matrix_realization::{assemble_h, d_xi_star_matrix, CoupledOperator, DualVariant, Regime};
use crate::par;
use crate::qcalculus::{jackson_exponential, q_factorial, q_number, Deformation, XiPolynomial};
use crate::random_walk::StepDensity;
use crate::smash_algebra::SmashElement;

/// Drift and diffusivity constants of the limit, plus the Hamiltonian drifts
/// `λ`, `λ̃` of the nonstationary regime.
///
/// `alpha2` is complex because the substitution divides by `[2]_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionParams {
    pub c1: f64,
    pub alpha1: f64,
    pub c2: f64,
    #[serde(deserialize_with = "complex_or_real")]
    pub alpha2: Complex64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub d1: f64,
    pub d2: f64,
    pub t: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            c1: 0.0,
            alpha1: 1.0,
            c2: 0.0,
            alpha2: Complex64::default(),
            lambda: 0.0,
            lambda_tilde: 0.0,
            d1: 1.0,
            d2: 1.0,
            t: 1.0,
        }
    }
}

fn complex_or_real<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Complex64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }
    Ok(match Repr::deserialize(de)? {
        Repr::Real(re) => Complex64::new(re, 0.0),
        Repr::Pair([re, im]) => Complex64::new(re, im),
    })
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.c1,
            self.alpha1,
            self.c2,
            self.alpha2.re,
            self.alpha2.im,
            self.lambda,
            self.lambda_tilde,
            self.d1,
            self.d2,
            self.t,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(SmashError::InvalidParameter("diffusion parameters must be finite".into()));
        }
        if !(self.alpha1 > 0.0) {
            return Err(SmashError::InvalidParameter(format!("alpha1 = {} must be positive", self.alpha1)));
        }
        if self.t < 0.0 {
            return Err(SmashError::NonPositiveTime(self.t));
        }
        Ok(())
    }
}

/// Invert the continuum substitutions for an `n`-step walk run to time `t`.
pub fn continuum_params(s: &StepDensity, n: usize, t: f64, d: &Deformation) -> Result<DiffusionParams> {
    s.validate()?;
    if n == 0 {
        return Err(SmashError::InvalidParameter("continuum limit needs n >= 1".into()));
    }
    if !(t > 0.0) {
        return Err(SmashError::NonPositiveTime(t));
    }
    let two = q_number(2, d);
    if two.norm() < 1e-12 {
        return Err(SmashError::UndefinedXiDiffusivity);
    }
    let nt = n as f64 / t;
    Ok(DiffusionParams {
        c1: 2.0 * s.a * (s.p1 - 0.5) * nt,
        alpha1: s.a * s.a * nt / 2.0,
        c2: 2.0 * s.theta * (s.p2 - 0.5) * nt,
        alpha2: Complex64::new(s.theta * s.theta * nt, 0.0) / two,
        t,
        ..DiffusionParams::default()
    })
}

/// Step size and bias `(a, p1)` of an `n`-step x-walk with the given limit.
pub fn x_walk_from_continuum(c1: f64, alpha1: f64, t: f64, n: usize) -> Result<(f64, f64)> {
    if !(alpha1 > 0.0) || n == 0 {
        return Err(SmashError::InvalidParameter("need alpha1 > 0 and n >= 1".into()));
    }
    if !(t > 0.0) {
        return Err(SmashError::NonPositiveTime(t));
    }
    let a = (2.0 * alpha1 * t / n as f64).sqrt();
    let p1 = 0.5 + c1 * t / (2.0 * n as f64 * a);
    if !(0.0..=1.0).contains(&p1) {
        return Err(SmashError::InvalidParameter(format!("n = {n} steps too few: p1 = {p1}")));
    }
    Ok((a, p1))
}

fn heat_kernel(x: f64, t: f64, p: &DiffusionParams, exponent: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(SmashError::NonPositiveTime(t));
    }
    let z = x - p.c1 * t;
    let s = 4.0 * p.alpha1 * t;
    Ok((PI * s).powf(exponent) * (-z * z / s).exp())
}

/// Drifted heat kernel `(4πα1 t)^{-1/2} exp(-(x - c1 t)² / 4α1 t)`.
pub fn gaussian_solution(x: f64, t: f64, p: &DiffusionParams) -> Result<f64> {
    heat_kernel(x, t, p, -0.5)
}

/// The same kernel with prefactor `(4πα1 t)^{-1}`; kept to show it fails
/// the PDE.
pub fn gaussian_solution_printed(x: f64, t: f64, p: &DiffusionParams) -> Result<f64> {
    heat_kernel(x, t, p, -1.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Coefficients `S_k` of `θ^{N-1-k}` in the ξ-sector closed form, taken as
/// written: the inner sum runs over `0 <= l < k/2`, so `S_0 = 0`.
pub fn xi_closed_form_coefficients(t: f64, p: &DiffusionParams, d: &Deformation) -> Result<Vec<Complex64>> {
    if p.c2 == 0.0 {
        return Err(SmashError::ZeroXiDrift);
    }
    let ct = Complex64::new(p.c2 * t, 0.0);
    let ratio = p.alpha2 / p.c2;
    Ok((0..d.order())
        .map(|k| {
            let inner: Complex64 = (0..k)
                .take_while(|&l| 2 * l < k)
                .map(|l| ct.powu((k - l) as u32) * ratio.powu(l as u32) / (factorial(l) * factorial(k - 2 * l)))
                .sum();
            inner * q_factorial(k, d)
        })
        .collect())
}

/// `Σ_k θ^{N-1-k} S_k`.
pub fn xi_closed_form(theta: f64, t: f64, p: &DiffusionParams, d: &Deformation) -> Result<Complex64> {
    let n = d.order();
    Ok(xi_closed_form_coefficients(t, p, d)?
        .into_iter()
        .enumerate()
        .map(|(k, s)| s * theta.powi((n - 1 - k) as i32))
        .sum())
}

/// `exp(t (c2 D* + α2 D*²))` applied to `initial`, exact since `D*` is
/// nilpotent.
pub fn xi_sector_oracle(
    t: f64,
    p: &DiffusionParams,
    d: &Deformation,
    variant: DualVariant,
    initial: &XiPolynomial,
) -> Result<XiPolynomial> {
    if initial.order() != d.order() {
        return Err(SmashError::DeformationMismatch);
    }
    let dstar = d_xi_star_matrix(d.order(), variant)?;
    let g = &dstar.scale(Complex64::new(p.c2, 0.0)) + &(&dstar * &dstar).scale(p.alpha2);
    let e = g.scale(Complex64::new(t, 0.0)).exp_nilpotent()?;
    Ok(e.apply_poly(initial))
}

/// Sampling of `(x, t)` for a residual check: interior nodes `x_min + i dx`
/// and `nt` equally spaced times in `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResidualGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    /// Step of the central time difference.
    pub dt_fd: f64,
}

impl Default for ResidualGrid {
    fn default() -> Self {
        Self { x_min: -5.0, x_max: 5.0, dx: 1e-3, t_min: 0.5, t_max: 2.0, nt: 16, dt_fd: 1e-4 }
    }
}

impl ResidualGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0)
            || !(self.dt_fd > 0.0)
            || !(self.x_max > self.x_min)
            || self.t_max < self.t_min
            || self.nt == 0
        {
            return Err(SmashError::DegenerateGrid(format!("{self:?}")));
        }
        if self.points() < 3 {
            return Err(SmashError::DegenerateGrid("fewer than three x nodes".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        ((self.x_max - self.x_min) / self.dx).round() as usize + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn time(&self, j: usize) -> f64 {
        if self.nt == 1 {
            self.t_min
        } else {
            self.t_min + (self.t_max - self.t_min) * j as f64 / (self.nt - 1) as f64
        }
    }
}

/// One sampled residual: component 0 of `ρ` and the largest component
/// residual at `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub x: f64,
    pub t: f64,
    pub value: Complex64,
    pub residual: f64,
}

fn residual_at<F>(rho: &F, op: &CoupledOperator, x: f64, t: f64, g: &ResidualGrid) -> Result<(Complex64, f64)>
where
    F: Fn(f64, f64) -> Vec<Complex64>,
{
    let n = op.order();
    let centre = rho(x, t);
    let (left, right) = (rho(x - g.dx, t), rho(x + g.dx, t));
    let (later, earlier) = (rho(x, t + g.dt_fd), rho(x, t - g.dt_fd));
    if [&centre, &left, &right, &later, &earlier].iter().any(|v| v.len() != n) {
        return Err(SmashError::InvalidParameter(format!("density must have {n} components")));
    }
    let mut worst = 0.0f64;
    for k in 0..n {
        let dt = (later[k] - earlier[k]) / (2.0 * g.dt_fd);
        let dx1 = (right[k] - left[k]) / (2.0 * g.dx);
        let dx2 = (right[k] - centre[k] * 2.0 + left[k]) / (g.dx * g.dx);
        let mut rhs = dx1 * op.drift + dx2 * op.diffusivity;
        for (j, &cj) in centre.iter().enumerate().skip(k + 1) {
            rhs += op.coupling.get(k, j) * cj;
        }
        let r = (dt - rhs).norm();
        worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
    }
    Ok((centre[0], worst))
}

/// Max-norm residual of `∂_t ρ = H ρ` for a density `ρ(x, t)` given as its
/// ξ-coefficient vector `[ρ_0, …, ρ_{N-1}]`.
pub fn operator_residual<F>(rho: &F, g: &ResidualGrid, op: &CoupledOperator) -> Result<f64>
where
    F: Fn(f64, f64) -> Vec<Complex64> + Sync,
{
    g.validate()?;
    let nx = g.points() - 2;
    let errors = std::sync::Mutex::new(None);
    let worst = par::max_over(nx * g.nt, |idx| {
        let (i, j) = (idx % nx + 1, idx / nx);
        match residual_at(rho, op, g.x(i), g.time(j), g) {
            Ok((_, r)) => r,
            Err(e) => {
                errors.lock().expect("residual error slot").get_or_insert(e);
                0.0
            }
        }
    });
    match errors.into_inner().expect("residual error slot") {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

/// [`operator_residual`] with the generator assembled from `p`.
pub fn diffusion_residual<F>(
    rho: &F,
    g: &ResidualGrid,
    p: &DiffusionParams,
    d: &Deformation,
    variant: DualVariant,
    regime: Regime,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Vec<Complex64> + Sync,
{
    let op = assemble_h(d.order(), p, variant, regime)?;
    operator_residual(rho, g, &op)
}

/// Every sampled residual, ordered by time then x.
pub fn residual_rows<F>(rho: &F, g: &ResidualGrid, op: &CoupledOperator) -> Result<Vec<ResidualRow>>
where
    F: Fn(f64, f64) -> Vec<Complex64> + Sync,
{
    g.validate()?;
    let nx = g.points() - 2;
    par::map_range(nx * g.nt, |idx| {
        let (x, t) = (g.x(idx % nx + 1), g.time(idx / nx));
        residual_at(rho, op, x, t, g).map(|(value, residual)| ResidualRow { x, t, value, residual })
    })
    .into_iter()
    .collect()
}

/// The three evaluation terms of the limiting functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiInfinity {
    /// `(e^{c1 t D_x + α1 t D_x²} f)` at `x = ξ = 0`.
    pub x_term: Complex64,
    /// `(e^{c2 t D_ξ + α2 t D_ξ²} f)` at `x = ξ = 0`.
    pub xi_term: Complex64,
    /// The joint exponential at `x = ξ = 0`.
    pub joint: Complex64,
}

impl PhiInfinity {
    pub fn total(&self) -> Complex64 {
        self.x_term + self.xi_term + self.joint
    }
}

/// `(e^{c1 t D_x + α1 t D_x²} x^k)|_{x=0}`.
fn x_exponential_at_zero(k: usize, p: &DiffusionParams) -> f64 {
    let (ct, at) = (p.c1 * p.t, p.alpha1 * p.t);
    (0..=k / 2)
        .map(|j| factorial(k) / (factorial(k - 2 * j) * factorial(j)) * ct.powi((k - 2 * j) as i32) * at.powi(j as i32))
        .sum()
}

/// `(e^{c2 t D_ξ + α2 t D_ξ²} ξ^l)|_{ξ=0}`.
fn xi_exponential_at_zero(l: usize, p: &DiffusionParams, d: &Deformation) -> Complex64 {
    let e = jackson_exponential(
        &XiPolynomial::monomial(d.order(), l, Complex64::new(1.0, 0.0)),
        &[Complex64::new(p.c2 * p.t, 0.0), p.alpha2 * p.t],
        d,
    );
    e.coeff(0)
}

/// Evaluate the limiting functional on `f` at time `p.t`.
pub fn phi_infinity(f: &SmashElement, p: &DiffusionParams) -> PhiInfinity {
    let d = f.deformation();
    let mut out =
        PhiInfinity { x_term: Complex64::default(), xi_term: Complex64::default(), joint: Complex64::default() };
    for ((k, l), c) in f.terms() {
        let ex = x_exponential_at_zero(k, p);
        let exi = xi_exponential_at_zero(l, p, d);
        if l == 0 {
            out.x_term += c * ex;
        }
        if k == 0 {
            out.xi_term += c * exi;
        }
        out.joint += c * ex * exi;
    }
    out
}

/// Image of `f` under `c1 D_x + α1 D_x²`.
pub fn x_generator_image(f: &SmashElement, p: &DiffusionParams) -> Result<SmashElement> {
    let mut out = SmashElement::zero(*f.deformation(), f.x_cap());
    for ((k, l), c) in f.terms() {
        if k >= 1 {
            out.add_term(k - 1, l, c * (p.c1 * k as f64))?;
        }
        if k >= 2 {
            out.add_term(k - 2, l, c * (p.alpha1 * (k * (k - 1)) as f64))?;
        }
    }
    Ok(out)
}

/// Image of `f` under `c2 D_ξ + α2 D_ξ²`.
pub fn xi_generator_image(f: &SmashElement, p: &DiffusionParams) -> Result<SmashElement> {
    let d = f.deformation();
    let mut out = SmashElement::zero(*d, f.x_cap());
    for ((k, l), c) in f.terms() {
        if l >= 1 {
            out.add_term(k, l - 1, c * q_number(l, d) * p.c2)?;
        }
        if l >= 2 {
            out.add_term(k, l - 2, c * q_number(l, d) * q_number(l - 1, d) * p.alpha2)?;
        }
    }
    Ok(out)
}

/// Image of `f` under the full generator `c1 D_x + α1 D_x² + c2 D_ξ + α2 D_ξ²`.
pub fn generator_image(f: &SmashElement, p: &DiffusionParams) -> Result<SmashElement> {
    x_generator_image(f, p)?.add(&xi_generator_image(f, p)?)
}
