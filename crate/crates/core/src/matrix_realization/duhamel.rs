use num_complex::Complex64;

use super::grid::{Gaussian, GaussianMixture, GridSpec, SystemState};
use super::{CoupledOperator, RepMatrix};
use crate::error::{Result, SmashError};

const QUAD_TOL: f64 = 1e-8;
const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson quadrature of a complex integrand on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::default();
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `w_kj(t) = δ_kj + ∫₀ᵗ Σ_{m>k} C_km w_mj(s) ds`, unrolled from the last row up.
fn weight(c: &RepMatrix, k: usize, j: usize, t: f64) -> Complex64 {
    let mut w = if k == j { Complex64::new(1.0, 0.0) } else { Complex64::default() };
    if j <= k {
        return w;
    }
    for m in k + 1..=j {
        let ckm = c.get(k, m);
        if ckm == Complex64::default() {
            continue;
        }
        w += ckm * adaptive_simpson(&|s| weight(c, m, j, s), 0.0, t, QUAD_TOL);
    }
    w
}

/// Variation-of-constants weights of the coupling: the component
/// `ρ_k(t) = Σ_j w_kj(t) · e^{t H_x} ρ_j(0)`, with `w` obtained by quadrature.
pub fn duhamel_weights(op: &CoupledOperator, t: f64) -> Result<RepMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SmashError::InvalidParameter(format!("oracle time {t} must be finite and non-negative")));
    }
    let n = op.order();
    let mut w = RepMatrix::zeros(n);
    for k in 0..n {
        for j in k..n {
            w.set(k, j, weight(&op.coupling, k, j, t));
        }
    }
    Ok(w)
}

/// The exact solution at time `t` as Gaussian mixtures.
pub fn duhamel_mixtures(op: &CoupledOperator, initial: &[GaussianMixture], t: f64) -> Result<Vec<GaussianMixture>> {
    if initial.len() != op.order() {
        return Err(SmashError::InvalidParameter(format!(
            "{} initial mixtures for an operator of order {}",
            initial.len(),
            op.order()
        )));
    }
    for m in initial {
        m.validate()?;
    }
    let w = duhamel_weights(op, t)?;
    let free: Vec<GaussianMixture> = initial.iter().map(|m| m.evolve(t, op.velocity(), op.diffusivity)).collect();
    Ok((0..op.order())
        .map(|k| GaussianMixture {
            terms: (k..op.order())
                .flat_map(|j| {
                    let wkj = w.get(k, j);
                    free[j].terms.iter().map(move |g| Gaussian::new(g.weight * wkj, g.mean, g.var))
                })
                .filter(|g| g.weight != Complex64::default())
                .collect(),
        })
        .collect())
}

/// Semi-analytic solution of the coupled system sampled on the grid of `g`.
pub fn duhamel_oracle(op: &CoupledOperator, initial: &[GaussianMixture], t: f64, g: &GridSpec) -> Result<SystemState> {
    let mixtures = duhamel_mixtures(op, initial, t)?;
    let mut s = SystemState::from_mixtures(g, &mixtures)?;
    s.time = t;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::DiffusionParams;
    use crate::matrix_realization::{assemble_h, solve_system, DualVariant, Regime};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|s: f64| Complex64::new(s.cos(), s * s), 0.0, 2.0, 1e-10);
        assert!((v - Complex64::new(2.0f64.sin(), 8.0 / 3.0)).norm() < 1e-9);
        assert_eq!(adaptive_simpson(&|_| one(), 1.0, 1.0, 1e-8), Complex64::default());
    }

    #[test]
    fn weights_match_matrix_exponential() {
        let p =
            DiffusionParams { c1: 0.2, alpha1: 0.4, c2: 1.0, alpha2: Complex64::new(0.5, 0.0), ..Default::default() };
        for n in 2..=4 {
            for variant in [DualVariant::Printed, DualVariant::Algebraic] {
                let op = assemble_h(n, &p, variant, Regime::Stationary).unwrap();
                let t = 0.8;
                let w = duhamel_weights(&op, t).unwrap();
                let e = op.coupling.scale(Complex64::new(t, 0.0)).exp_nilpotent().unwrap();
                assert!(w.max_abs_diff(&e) < 1e-8, "N={n} {variant}");
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let p = DiffusionParams { alpha1: 0.4, c2: 1.0, ..Default::default() };
        let op = assemble_h(3, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        assert_eq!(duhamel_weights(&op, 0.0).unwrap(), RepMatrix::identity(3));
        let init = vec![GaussianMixture::single(one(), 0.0, 0.3); 3];
        assert_eq!(duhamel_mixtures(&op, &init, 0.0).unwrap()[2], init[2]);
        assert!(duhamel_weights(&op, -1.0).is_err());
    }

    #[test]
    fn uncoupled_components_evolve_independently() {
        let p = DiffusionParams { c1: 0.5, alpha1: 0.25, ..Default::default() };
        let op = assemble_h(2, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let init = [GaussianMixture::single(one(), 0.0, 0.1), GaussianMixture::single(one(), 1.0, 0.2)];
        let out = duhamel_mixtures(&op, &init, 1.0).unwrap();
        assert_eq!(out[0], init[0].evolve(1.0, 0.5, 0.25));
        assert_eq!(out[1], init[1].evolve(1.0, 0.5, 0.25));
    }

    #[test]
    fn rejects_bad_initial_data() {
        let p = DiffusionParams { alpha1: 0.25, ..Default::default() };
        let op = assemble_h(2, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let bad = [GaussianMixture::single(one(), 0.0, -1.0), GaussianMixture::single(one(), 0.0, 1.0)];
        assert_eq!(duhamel_mixtures(&op, &bad, 1.0), Err(SmashError::NotGaussianMixture));
        assert!(duhamel_mixtures(&op, &bad[..1], 1.0).is_err());
    }

    #[test]
    fn solver_matches_oracle_on_small_problem() {
        let p =
            DiffusionParams { c1: 0.5, alpha1: 0.5, c2: 1.0, alpha2: Complex64::new(0.5, 0.0), ..Default::default() };
        let op = assemble_h(3, &p, DualVariant::Printed, Regime::Stationary).unwrap();
        let g = GridSpec { x_min: -8.0, x_max: 8.0, dx: 0.02, dt: 2e-3, t_end: 0.5, ..GridSpec::default() };
        let init = vec![
            GaussianMixture::single(one(), -1.0, 0.3),
            GaussianMixture::single(Complex64::new(0.0, 1.0), 0.0, 0.4),
            GaussianMixture::single(one(), 1.0, 0.5),
        ];
        let start = SystemState::from_mixtures(&g, &init).unwrap();
        let out = solve_system(&g, &op, &start).unwrap();
        let oracle = duhamel_oracle(&op, &init, 0.5, &g).unwrap();
        assert!(out.final_state().max_relative_l2(&oracle) < 1e-3);
    }
}
