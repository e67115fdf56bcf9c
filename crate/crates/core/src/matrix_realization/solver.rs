use num_complex::Complex64;

use super::grid::{GridSpec, Scheme, SystemState};
use super::CoupledOperator;
use crate::error::{Result, SmashError};
use crate::par;

const GROWTH_LIMIT: f64 = 1e6;
const BOUNDARY_CELLS: usize = 5;
const BOUNDARY_TOL: f64 = 1e-10;

/// Snapshots of a solve, oldest first; the last entry is the state at `t_end`.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub snapshots: Vec<SystemState>,
}

impl SolveOutput {
    pub fn final_state(&self) -> &SystemState {
        self.snapshots.last().expect("at least the initial snapshot")
    }
}

/// Three-point stencil of `drift·D_x + diffusivity·D_x²` on interior nodes.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    lower: f64,
    diag: f64,
    upper: f64,
}

impl Stencil {
    fn new(op: &CoupledOperator, dx: f64, upwind: bool) -> Self {
        let diff = op.diffusivity / (dx * dx);
        let drift = op.drift;
        let peclet_high = op.diffusivity <= 0.0 || drift.abs() * dx / op.diffusivity > 2.0;
        if upwind && peclet_high && drift != 0.0 {
            if drift < 0.0 {
                // positive velocity: backward difference
                Self { lower: diff - drift / dx, diag: -2.0 * diff + drift / dx, upper: diff }
            } else {
                Self { lower: diff, diag: -2.0 * diff - drift / dx, upper: diff + drift / dx }
            }
        } else {
            let half = drift / (2.0 * dx);
            Self { lower: diff - half, diag: -2.0 * diff, upper: diff + half }
        }
    }

    /// `L u` with zero Dirichlet values at both ends.
    fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        let n = u.len();
        out[0] = Complex64::default();
        out[n - 1] = Complex64::default();
        for i in 1..n - 1 {
            out[i] = u[i - 1] * self.lower + u[i] * self.diag + u[i + 1] * self.upper;
        }
    }
}

/// Factorized real tridiagonal system `(I - h/2 L)` on the interior nodes.
struct Tridiagonal {
    lower: f64,
    upper: f64,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Tridiagonal {
    fn crank_nicolson(s: &Stencil, h: f64, interior: usize) -> Self {
        let a = -0.5 * h * s.lower;
        let b = 1.0 - 0.5 * h * s.diag;
        let c = -0.5 * h * s.upper;
        let mut c_prime = vec![0.0; interior];
        let mut inv_denom = vec![0.0; interior];
        for i in 0..interior {
            let denom = if i == 0 { b } else { b - a * c_prime[i - 1] };
            inv_denom[i] = 1.0 / denom;
            c_prime[i] = c * inv_denom[i];
        }
        Self { lower: a, upper: c, c_prime, inv_denom }
    }

    /// Solve in place on `rhs[1..n-1]`, leaving the Dirichlet ends at zero.
    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        let m = n - 2;
        let x = &mut rhs[1..n - 1];
        x[0] *= self.inv_denom[0];
        for i in 1..m {
            x[i] = (x[i] - x[i - 1] * self.lower) * self.inv_denom[i];
        }
        for i in (0..m - 1).rev() {
            let next = x[i + 1];
            x[i] -= next * self.c_prime[i];
        }
        debug_assert!(self.upper.is_finite());
        rhs[0] = Complex64::default();
        rhs[n - 1] = Complex64::default();
    }
}

fn check_initial(g: &GridSpec, op: &CoupledOperator, initial: &SystemState) -> Result<()> {
    g.validate(op.diffusivity)?;
    if initial.order() != op.order() {
        return Err(SmashError::InvalidParameter(format!(
            "initial state has {} components, operator expects {}",
            initial.order(),
            op.order()
        )));
    }
    if initial.points() != g.points() || (initial.dx - g.dx).abs() > 1e-12 || (initial.x_min - g.x_min).abs() > 1e-12 {
        return Err(SmashError::DegenerateGrid("initial state does not live on the solver grid".into()));
    }
    Ok(())
}

/// Advance the coupled system `∂_t ρ_k = H_x ρ_k + Σ_{j>k} C_kj ρ_j` to
/// `g.t_end` with zero Dirichlet boundaries.
///
/// Crank–Nicolson treats the coupling with the trapezoid rule too; since the
/// coupling is strictly upper triangular the components are solved from
/// `k = N-1` down to `0`, so every step only needs scalar tridiagonal solves.
pub fn solve_system(g: &GridSpec, op: &CoupledOperator, initial: &SystemState) -> Result<SolveOutput> {
    check_initial(g, op, initial)?;
    let stencil = Stencil::new(op, g.dx, g.upwind);
    let steps = g.steps();
    let h = g.dt;
    let order = op.order();
    let points = g.points();
    let reference = initial.max_abs().max(f64::MIN_POSITIVE);

    let mut state = initial.clone();
    for c in &mut state.components {
        c[0] = Complex64::default();
        c[points - 1] = Complex64::default();
    }
    let mut snapshots = vec![state.clone()];
    let tri = Tridiagonal::crank_nicolson(&stencil, h, points - 2);

    for step in 1..=steps {
        let next = match g.scheme {
            Scheme::Cn => cn_step(&stencil, &tri, op, &state.components, h),
            Scheme::Rk4 => rk4_step(&stencil, op, &state.components, h),
        };
        state.components = next;
        state.time = step as f64 * h;

        let peak = state.max_abs();
        if !peak.is_finite() || peak > GROWTH_LIMIT * reference {
            return Err(SmashError::Instability { growth: peak / reference, time: state.time });
        }
        if (g.stride > 0 && step % g.stride == 0) || step == steps {
            snapshots.push(state.clone());
        }
    }

    for k in 0..order {
        let mass = state.boundary_mass(k, BOUNDARY_CELLS);
        if mass > BOUNDARY_TOL {
            return Err(SmashError::BoundaryMass { component: k, mass });
        }
    }
    Ok(SolveOutput { snapshots })
}

fn cn_step(
    stencil: &Stencil,
    tri: &Tridiagonal,
    op: &CoupledOperator,
    old: &[Vec<Complex64>],
    h: f64,
) -> Vec<Vec<Complex64>> {
    let order = old.len();
    let n = old[0].len();
    // explicit half of every component, independent across components
    let mut rhs: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; order];
    par::for_each_mut(&mut rhs, |k, r| {
        stencil.apply(&old[k], r);
        for (ri, &ui) in r.iter_mut().zip(&old[k]) {
            *ri = ui + *ri * (0.5 * h);
        }
    });
    let mut new: Vec<Vec<Complex64>> = vec![Vec::new(); order];
    for k in (0..order).rev() {
        let mut r = std::mem::take(&mut rhs[k]);
        for j in k + 1..order {
            let c = op.coupling.get(k, j) * (0.5 * h);
            if c == Complex64::default() {
                continue;
            }
            for i in 1..n - 1 {
                r[i] += c * (old[j][i] + new[j][i]);
            }
        }
        tri.solve(&mut r);
        new[k] = r;
    }
    new
}

fn rhs_eval(stencil: &Stencil, op: &CoupledOperator, u: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let order = u.len();
    let n = u[0].len();
    par::map_range(order, |k| {
        let mut out = vec![Complex64::default(); n];
        stencil.apply(&u[k], &mut out);
        for (j, uj) in u.iter().enumerate().skip(k + 1) {
            let c = op.coupling.get(k, j);
            if c == Complex64::default() {
                continue;
            }
            for i in 1..n - 1 {
                out[i] += c * uj[i];
            }
        }
        out
    })
}

fn axpy(u: &[Vec<Complex64>], k: &[Vec<Complex64>], s: f64) -> Vec<Vec<Complex64>> {
    u.iter().zip(k).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * s).collect()).collect()
}

fn rk4_step(stencil: &Stencil, op: &CoupledOperator, u: &[Vec<Complex64>], h: f64) -> Vec<Vec<Complex64>> {
    let k1 = rhs_eval(stencil, op, u);
    let k2 = rhs_eval(stencil, op, &axpy(u, &k1, 0.5 * h));
    let k3 = rhs_eval(stencil, op, &axpy(u, &k2, 0.5 * h));
    let k4 = rhs_eval(stencil, op, &axpy(u, &k3, h));
    u.iter()
        .enumerate()
        .map(|(c, uc)| {
            uc.iter()
                .enumerate()
                .map(|(i, &v)| v + (k1[c][i] + (k2[c][i] + k3[c][i]) * 2.0 + k4[c][i]) * (h / 6.0))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::DiffusionParams;
    use crate::matrix_realization::{assemble_h, DualVariant, GaussianMixture, Regime};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn thomas_solves_small_system() {
        let s = Stencil { lower: 1.0, diag: -2.0, upper: 1.0 };
        let h = 0.5;
        let tri = Tridiagonal::crank_nicolson(&s, h, 3);
        let x = [one(), Complex64::new(2.0, 1.0), Complex64::new(-1.0, 0.5)];
        // build rhs = (I - h/2 L) x on the interior with zero ends
        let padded = [Complex64::default(), x[0], x[1], x[2], Complex64::default()];
        let mut lx = [Complex64::default(); 5];
        s.apply(&padded, &mut lx);
        let mut rhs: Vec<Complex64> = padded.iter().zip(&lx).map(|(u, l)| u - l * (0.5 * h)).collect();
        rhs[0] = Complex64::default();
        rhs[4] = Complex64::default();
        tri.solve(&mut rhs);
        for i in 0..3 {
            assert!((rhs[i + 1] - x[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn decoupled_identical_components_stay_identical() {
        let p = DiffusionParams { c1: 0.3, alpha1: 0.5, ..Default::default() };
        let op = assemble_h(3, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let g = GridSpec { t_end: 0.2, ..GridSpec::default() };
        let m = GaussianMixture::single(one(), 0.0, 0.25);
        let init = SystemState::from_mixtures(&g, &[m.clone(), m.clone(), m]).unwrap();
        let out = solve_system(&g, &op, &init).unwrap();
        let fin = out.final_state();
        assert_eq!(fin.components[0], fin.components[1]);
        assert_eq!(fin.components[1], fin.components[2]);
        assert_eq!(out.snapshots.len(), 2);
    }

    #[test]
    fn rk4_and_cn_agree() {
        let p = DiffusionParams { c1: 0.4, alpha1: 0.1, c2: 1.0, ..Default::default() };
        let op = assemble_h(2, &p, DualVariant::Algebraic, Regime::Stationary).unwrap();
        let cn = GridSpec { t_end: 0.5, dt: 1e-3, ..GridSpec::default() };
        let rk = GridSpec { t_end: 0.5, ..GridSpec::explicit() };
        let mixtures = [GaussianMixture::single(one(), -0.5, 0.2), GaussianMixture::single(one(), 0.5, 0.3)];
        let a = solve_system(&cn, &op, &SystemState::from_mixtures(&cn, &mixtures).unwrap()).unwrap();
        let b = solve_system(&rk, &op, &SystemState::from_mixtures(&rk, &mixtures).unwrap()).unwrap();
        assert!(a.final_state().max_relative_l2(b.final_state()) < 1e-5);
    }

    #[test]
    fn stride_controls_snapshots() {
        let p = DiffusionParams { alpha1: 0.5, ..Default::default() };
        let op = assemble_h(2, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let g = GridSpec { t_end: 0.1, stride: 25, ..GridSpec::default() };
        let m = GaussianMixture::single(one(), 0.0, 0.25);
        let out = solve_system(&g, &op, &SystemState::from_mixtures(&g, &[m.clone(), m]).unwrap()).unwrap();
        let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times.len(), 5);
        assert!((times[4] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn boundary_mass_is_reported() {
        let p = DiffusionParams { alpha1: 0.5, ..Default::default() };
        let op = assemble_h(2, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let g = GridSpec { x_min: -2.0, x_max: 2.0, t_end: 0.5, ..GridSpec::default() };
        let m = GaussianMixture::single(one(), 0.0, 0.5);
        let err = solve_system(&g, &op, &SystemState::from_mixtures(&g, &[m.clone(), m]).unwrap());
        assert!(matches!(err, Err(SmashError::BoundaryMass { .. })));
    }

    #[test]
    fn instability_is_detected() {
        // a negative diffusivity is anti-diffusive and blows up
        let p = DiffusionParams { alpha1: -0.5, ..Default::default() };
        let op = assemble_h(2, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let g = GridSpec { t_end: 1.0, dt: 1e-2, ..GridSpec::default() };
        let m = GaussianMixture::single(one(), 0.0, 0.25);
        let err = solve_system(&g, &op, &SystemState::from_mixtures(&g, &[m.clone(), m]).unwrap());
        assert!(matches!(err, Err(SmashError::Instability { .. })), "{err:?}");
    }

    #[test]
    fn rejects_mismatched_initial_state() {
        let p = DiffusionParams { alpha1: 0.5, ..Default::default() };
        let op = assemble_h(3, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let g = GridSpec::default();
        let m = GaussianMixture::single(one(), 0.0, 0.25);
        assert!(solve_system(&g, &op, &SystemState::from_mixtures(&g, &[m]).unwrap()).is_err());
    }
}
