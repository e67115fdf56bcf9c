//! Two-point step functionals on Ω, their convolution powers and exact
//! n-step moments.
//!
//! The n-step functional is `φ^{*n} = φ^{⊗n} ∘ Δ^{n-1}`. On a monomial
//! `x^k ξ^l` the iterated coproduct spreads the powers over n slots with
//! multinomial weights, and each slot is evaluated with the single-step
//! moments `φ_x(x^i) φ_ξ(ξ^j)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compositions::{multinomial, Compositions};
use crate::error::{Result, SmashError};
use crate::par;
use crate::qcalculus::{q_factorial, q_multinomial, Deformation};
use crate::smash_algebra::{multislot_multiply, MultiSlotExpansion, SmashElement};

/// Largest step count accepted by [`moment_oracle`].
pub const ORACLE_MAX_STEPS: usize = 8;
/// Largest x-power accepted by [`moment_oracle`].
pub const ORACLE_MAX_X_POWER: usize = 5;

/// Step laws `p1 δ(x-a) + (1-p1) δ(x+a)` and `p2 δ(ξ-θ) + (1-p2) δ(ξ+θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDensity {
    pub a: f64,
    pub p1: f64,
    pub theta: f64,
    pub p2: f64,
}

impl StepDensity {
    pub fn new(a: f64, p1: f64, theta: f64, p2: f64) -> Result<Self> {
        let s = Self { a, p1, theta, p2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(SmashError::InvalidParameter(format!("{name} = {p} is not a probability")))
            }
        };
        prob("p1", self.p1)?;
        prob("p2", self.p2)?;
        if !(self.a > 0.0) {
            return Err(SmashError::InvalidParameter(format!("step a = {} must be positive", self.a)));
        }
        if !(self.theta > 0.0) {
            return Err(SmashError::InvalidParameter(format!("amplitude theta = {} must be positive", self.theta)));
        }
        Ok(())
    }
}

/// A walk of `n` steps with deformation data and cross braiding `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub step: StepDensity,
    pub n: usize,
    pub deformation: Deformation,
    #[serde(rename = "Q")]
    pub big_q: f64,
}

impl WalkSpec {
    pub fn new(step: StepDensity, n: usize, deformation: Deformation, big_q: f64) -> Result<Self> {
        let w = Self { step, n, deformation, big_q };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if self.n == 0 {
            return Err(SmashError::InvalidParameter("walk needs at least one step".into()));
        }
        if !self.big_q.is_finite() {
            return Err(SmashError::InvalidParameter(format!("Q = {} must be a finite real", self.big_q)));
        }
        Ok(())
    }

    /// Same walk with a different step count.
    pub fn with_steps(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

/// `φ_x(x^i) = p1 a^i + (1-p1)(-a)^i`.
pub fn phi_x(i: usize, s: &StepDensity) -> f64 {
    let up = s.a.powi(i as i32);
    let down = if i.is_multiple_of(2) { up } else { -up };
    s.p1 * up + (1.0 - s.p1) * down
}

/// `φ_ξ(ξ^j) = p2 θ^j + (1-p2)(-θ)^j`: the q-exponential shift contributes
/// `θ^j [j]_q!/[j]_q!`.
pub fn phi_xi(j: usize, s: &StepDensity, d: &Deformation) -> Result<f64> {
    d.check_xi_power(j)?;
    let up = s.theta.powi(j as i32);
    let down = if j.is_multiple_of(2) { up } else { -up };
    Ok(s.p2 * up + (1.0 - s.p2) * down)
}

/// Truncated power `p^n mod z^{len}` by repeated squaring.
fn truncated_power(base: &[Complex64], n: usize) -> Vec<Complex64> {
    let len = base.len();
    let mul = |a: &[Complex64], b: &[Complex64]| {
        let mut out = vec![Complex64::default(); len];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut result = vec![Complex64::default(); len];
    result[0] = Complex64::new(1.0, 0.0);
    let mut power = base.to_vec();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &power);
        }
        e >>= 1;
        if e > 0 {
            power = mul(&power, &power);
        }
    }
    result
}

/// x-sector sum `Σ_{i ⊢ k} (k; i) Π_t φ_x(i_t)`, evaluated as
/// `k! [z^k] (Σ_i φ_x(i) z^i / i!)^n`.
fn x_sector(k: usize, n: usize, s: &StepDensity) -> f64 {
    let mut fact = 1.0;
    let step: Vec<Complex64> = (0..=k)
        .map(|i| {
            if i > 0 {
                fact *= i as f64;
            }
            Complex64::new(phi_x(i, s) / fact, 0.0)
        })
        .collect();
    let k_fact: f64 = (1..=k).map(|i| i as f64).product();
    truncated_power(&step, n)[k].re * k_fact
}

/// ξ-sector sum `Σ_{j ⊢ l} [l; j]_q Π_t φ_ξ(j_t)`, evaluated as
/// `[l]_q! [z^l] (Σ_j φ_ξ(j) z^j / [j]_q!)^n`.
fn xi_sector(l: usize, n: usize, s: &StepDensity, d: &Deformation) -> Result<Complex64> {
    d.check_xi_power(l)?;
    let step =
        (0..=l).map(|j| Ok(Complex64::new(phi_xi(j, s, d)?, 0.0) / q_factorial(j, d))).collect::<Result<Vec<_>>>()?;
    Ok(truncated_power(&step, n)[l] * q_factorial(l, d))
}

/// `⟨x^k ⊗ ξ^l⟩` under the n-step functional `φ^{*n}`.
///
/// The composition sum factorizes over the two sectors, and each sector is a
/// truncated power of the one-step generating polynomial, so the cost does
/// not grow with the number of compositions.
pub fn moment(k: usize, l: usize, w: &WalkSpec) -> Result<Complex64> {
    let d = &w.deformation;
    d.check_xi_power(l)?;
    Ok(xi_sector(l, w.n, &w.step, d)? * x_sector(k, w.n, &w.step))
}

/// The same moment as [`moment`], summed literally over every pair of
/// compositions in colexicographic order. Parallel over the x-compositions.
pub fn moment_by_compositions(k: usize, l: usize, w: &WalkSpec) -> Result<Complex64> {
    let d = &w.deformation;
    d.check_xi_power(l)?;
    let n = w.n;
    let phx: Vec<f64> = (0..=k).map(|i| phi_x(i, &w.step)).collect();
    let phxi: Vec<f64> = (0..=l).map(|j| phi_xi(j, &w.step, d)).collect::<Result<_>>()?;
    let xi_terms: Vec<(Vec<usize>, Complex64)> =
        Compositions::new(l, n).map(|j| Ok((j.clone(), q_multinomial(l, &j, d)?))).collect::<Result<_>>()?;
    let x_parts: Vec<Vec<usize>> = Compositions::new(k, n).collect();
    let partial: Vec<Complex64> = par::map_collect(&x_parts, |i| {
        let xc = multinomial(i);
        let mut acc = Complex64::default();
        for (j, qc) in &xi_terms {
            let slots: f64 = i.iter().zip(j).map(|(&it, &jt)| phx[it] * phxi[jt]).product();
            acc += qc * (xc * slots);
        }
        acc
    });
    Ok(partial.into_iter().sum())
}

/// Ground-truth moment: expand `(x_1+…+x_n)^k (ξ_1+…+ξ_n)^l` in the braided
/// n-slot algebra by normal ordering alone, then evaluate slotwise.
///
/// Unlike [`moment`] this carries every power of `Q` generated by moving x
/// increments past earlier ξ increments.
pub fn moment_oracle(k: usize, l: usize, w: &WalkSpec) -> Result<Complex64> {
    let d = &w.deformation;
    d.check_xi_power(l)?;
    if w.n > ORACLE_MAX_STEPS || k > ORACLE_MAX_X_POWER {
        return Err(SmashError::EnumerationGuard(format!(
            "oracle limited to n <= {ORACLE_MAX_STEPS}, k <= {ORACLE_MAX_X_POWER} (got n = {}, k = {k})",
            w.n
        )));
    }
    let n = w.n;
    let x_sum = MultiSlotExpansion::x_sum(n);
    let xi_sum = MultiSlotExpansion::xi_sum(n);
    let mut word = MultiSlotExpansion::unit(n);
    for _ in 0..k {
        word = multislot_multiply(&word, &x_sum, w.big_q, d)?;
    }
    for _ in 0..l {
        word = multislot_multiply(&word, &xi_sum, w.big_q, d)?;
    }
    let mut total = Complex64::default();
    for (powers, c) in word.terms() {
        let mut slots = 1.0;
        for &(i, j) in powers {
            slots *= phi_x(i, &w.step) * phi_xi(j, &w.step, d)?;
        }
        total += c * slots;
    }
    Ok(total)
}

/// `φ^{*n}(f)` by linearity over the monomials of `f`.
pub fn expectation(f: &SmashElement, w: &WalkSpec) -> Result<Complex64> {
    if f.deformation() != &w.deformation {
        return Err(SmashError::DeformationMismatch);
    }
    let mut total = Complex64::default();
    for ((k, l), c) in f.terms() {
        total += c * moment(k, l, w)?;
    }
    Ok(total)
}

/// One row of a moment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub k: usize,
    pub l: usize,
    pub n: usize,
    pub value: Complex64,
}

/// Moments for every `n` in `steps`, `k <= k_max`, `l <= l_max`, in
/// lexicographic `(n, k, l)` order.
pub fn moment_table(w: &WalkSpec, steps: &[usize], k_max: usize, l_max: usize) -> Result<Vec<MomentRow>> {
    w.deformation.check_xi_power(l_max)?;
    let mut sorted = steps.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let keys: Vec<(usize, usize, usize)> =
        sorted.iter().flat_map(|&n| (0..=k_max).flat_map(move |k| (0..=l_max).map(move |l| (n, k, l)))).collect();
    par::map_collect(&keys, |&(n, k, l)| {
        let spec = WalkSpec::new(w.step, n, w.deformation, w.big_q)?;
        Ok(MomentRow { k, l, n, value: moment(k, l, &spec)? })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn walk(n: usize, order: usize) -> WalkSpec {
        WalkSpec::new(StepDensity::new(1.0, 0.3, 0.7, 0.6).unwrap(), n, Deformation::new(order).unwrap(), 1.0).unwrap()
    }

    /// E[(Σ_t s_t a)^k] over all 2^n sign patterns.
    fn sign_enumeration(k: usize, n: usize, s: &StepDensity) -> f64 {
        (0..1u32 << n)
            .map(|mask| {
                let mut prob = 1.0;
                let mut pos = 0.0;
                for t in 0..n {
                    if mask >> t & 1 == 1 {
                        prob *= s.p1;
                        pos += s.a;
                    } else {
                        prob *= 1.0 - s.p1;
                        pos -= s.a;
                    }
                }
                prob * pos.powi(k as i32)
            })
            .sum()
    }

    #[test]
    fn single_step_moments() {
        let s = StepDensity::new(1.0, 0.5, 0.7, 0.6).unwrap();
        let d = Deformation::new(3).unwrap();
        assert_eq!(phi_x(0, &s), 1.0);
        assert_eq!(phi_x(1, &s), 0.0);
        let s2 = StepDensity::new(1.0, 0.37, 0.7, 0.6).unwrap();
        assert_abs_diff_eq!(phi_x(2, &s2), 1.0, epsilon = 1e-15);
        assert_eq!(phi_xi(0, &s, &d).unwrap(), 1.0);
        assert_abs_diff_eq!(phi_xi(2, &s, &d).unwrap(), 0.49, epsilon = 1e-15);
        let sym = StepDensity::new(1.0, 0.5, 0.7, 0.5).unwrap();
        assert_eq!(phi_xi(1, &sym, &d).unwrap(), 0.0);
        assert!(phi_xi(3, &s, &d).is_err());
    }

    #[test]
    fn validation() {
        assert!(StepDensity::new(1.0, 1.2, 0.5, 0.5).is_err());
        assert!(StepDensity::new(0.0, 0.5, 0.5, 0.5).is_err());
        assert!(StepDensity::new(1.0, 0.5, -0.5, 0.5).is_err());
        let s = StepDensity::new(1.0, 0.5, 0.5, 0.5).unwrap();
        assert!(WalkSpec::new(s, 0, Deformation::new(2).unwrap(), 1.0).is_err());
    }

    #[test]
    fn normalization_and_first_moment() {
        for n in 1..=10 {
            let w = walk(n, 2);
            assert_abs_diff_eq!(moment(0, 0, &w).unwrap().re, 1.0, epsilon = 1e-14);
            let want = sign_enumeration(1, n, &w.step);
            assert_abs_diff_eq!(want, n as f64 * (2.0 * 0.3 - 1.0), epsilon = 1e-12);
            assert_abs_diff_eq!(moment(1, 0, &w).unwrap().re, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn x_moments_match_sign_enumeration() {
        for n in 1..=8 {
            let w = walk(n, 3);
            for k in 0..=5 {
                let want = sign_enumeration(k, n, &w.step);
                let got = moment(k, 0, &w).unwrap();
                assert!((got.re - want).abs() <= 1e-10 * want.abs().max(1.0), "n={n} k={k}");
                assert!(got.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_xi_moment_two_steps_order_three() {
        let w = walk(2, 3);
        let d = w.deformation;
        let th2 = 0.49;
        let want = Complex64::new(2.0 * th2, 0.0) + (Complex64::new(1.0, 0.0) + d.q()) * th2 * 0.2f64.powi(2);
        assert!((moment(0, 2, &w).unwrap() - want).norm() < 1e-14);
        assert!((moment_oracle(0, 2, &w).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn oracle_small_cases() {
        let w = walk(2, 2);
        assert_abs_diff_eq!(moment_oracle(0, 0, &w).unwrap().re, 1.0);
        let want = 2.0 * phi_x(2, &w.step) + 2.0 * phi_x(1, &w.step).powi(2);
        assert_abs_diff_eq!(moment_oracle(2, 0, &w).unwrap().re, want, epsilon = 1e-14);
    }

    #[test]
    fn oracle_guard() {
        assert!(matches!(moment_oracle(1, 0, &walk(9, 2)), Err(SmashError::EnumerationGuard(_))));
        assert!(matches!(moment_oracle(6, 0, &walk(2, 2)), Err(SmashError::EnumerationGuard(_))));
    }

    #[test]
    fn generating_function_matches_composition_sum() {
        for order in 2..=4 {
            for n in 1..=6 {
                let w = walk(n, order);
                for k in 0..=4 {
                    for l in 0..order {
                        let a = moment(k, l, &w).unwrap();
                        let b = moment_by_compositions(k, l, &w).unwrap();
                        assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "N={order} n={n} k={k} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn nilpotency_is_an_error() {
        let w = walk(3, 3);
        assert!(matches!(moment(0, 3, &w), Err(SmashError::NilpotencyBound { power: 3, order: 3 })));
        assert!(moment_oracle(0, 3, &w).is_err());
    }

    #[test]
    fn expectation_by_linearity() {
        let w = walk(4, 3);
        let d = w.deformation;
        assert_abs_diff_eq!(expectation(&SmashElement::one(d, 8), &w).unwrap().re, 1.0, epsilon = 1e-14);
        let mut f = SmashElement::x(d, 8);
        f.add_term(0, 0, Complex64::new(5.0, 0.0)).unwrap();
        let got = expectation(&f, &w).unwrap();
        assert_abs_diff_eq!(got.re, 4.0 * (2.0 * 0.3 - 1.0) + 5.0, epsilon = 1e-12);

        let w1 = walk(1, 3);
        let xxi = SmashElement::monomial(1, 1, Complex64::new(1.0, 0.0), d, 8).unwrap();
        let want = phi_x(1, &w1.step) * phi_xi(1, &w1.step, &d).unwrap();
        assert_abs_diff_eq!(expectation(&xxi, &w1).unwrap().re, want, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_walk_odd_moments_vanish() {
        let s = StepDensity::new(1.3, 0.5, 0.9, 0.5).unwrap();
        for order in 2..=5 {
            let w = WalkSpec::new(s, 5, Deformation::new(order).unwrap(), 1.0).unwrap();
            for k in (1..8).step_by(2) {
                assert!(moment(k, 0, &w).unwrap().norm() < 1e-12);
            }
            for l in (1..order).step_by(2) {
                assert!(moment(0, l, &w).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn table_rows_are_ordered() {
        let w = walk(1, 2);
        let rows = moment_table(&w, &[3], 2, 1).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].k, rows[0].l, rows[0].n), (0, 0, 3));
        assert_abs_diff_eq!(rows[0].value.re, 1.0, epsilon = 1e-14);
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.k, r.l)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(moment_table(&w, &[3], 2, 2).is_err());
    }
}
