//! Deformed arithmetic at a primitive N-th root of unity and the
//! one-variable q-difference calculus on truncated polynomials in ξ.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmashError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Nilpotency order `N` together with the braiding root `q = exp(2πi/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeformationRepr", into = "DeformationRepr")]
pub struct Deformation {
    order: usize,
    q: Complex64,
}

#[derive(Serialize, Deserialize)]
struct DeformationRepr {
    #[serde(rename = "N")]
    order: usize,
}

impl TryFrom<DeformationRepr> for Deformation {
    type Error = SmashError;
    fn try_from(r: DeformationRepr) -> Result<Self> {
        Deformation::new(r.order)
    }
}

impl From<Deformation> for DeformationRepr {
    fn from(d: Deformation) -> Self {
        DeformationRepr { order: d.order }
    }
}

impl Deformation {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(SmashError::InvalidOrder(order));
        }
        Ok(Self { order, q: Complex64::cis(TAU / order as f64) })
    }

    /// The nilpotency order `N` (ξ^N = 0).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    /// `q^m` for any integer `m`, reduced mod `N` before evaluation so that
    /// `q^N` is exactly one.
    pub fn q_pow(&self, m: i64) -> Complex64 {
        let r = m.rem_euclid(self.order as i64);
        if r == 0 {
            ONE
        } else {
            Complex64::cis(TAU * r as f64 / self.order as f64)
        }
    }

    /// Reject a ξ-power that is not representable.
    pub fn check_xi_power(&self, power: usize) -> Result<()> {
        if power >= self.order {
            Err(SmashError::NilpotencyBound { power, order: self.order })
        } else {
            Ok(())
        }
    }
}

/// The q-number `[m]_q = (1 - q^m)/(1 - q)`; zero whenever `N | m`.
pub fn q_number(m: usize, d: &Deformation) -> Complex64 {
    if m.is_multiple_of(d.order) {
        return ZERO;
    }
    (ONE - d.q_pow(m as i64)) / (ONE - d.q)
}

/// `[m]_q! = [1]_q … [m]_q`, vanishing for `m >= N`.
pub fn q_factorial(m: usize, d: &Deformation) -> Complex64 {
    if m >= d.order {
        return ZERO;
    }
    (1..=m).fold(ONE, |acc, i| acc * q_number(i, d))
}

/// `[m]_q! / Π [j_i]_q!` for a composition `parts` of `m < N`.
pub fn q_multinomial(m: usize, parts: &[usize], d: &Deformation) -> Result<Complex64> {
    if m >= d.order {
        return Err(SmashError::QMultinomialUndefined { m, order: d.order });
    }
    let sum: usize = parts.iter().sum();
    if sum != m {
        return Err(SmashError::BadComposition { sum, expected: m });
    }
    let denom = parts.iter().fold(ONE, |acc, &j| acc * q_factorial(j, d));
    Ok(q_factorial(m, d) / denom)
}

/// Two-part case `[m choose k]_q`.
pub fn q_binomial(m: usize, k: usize, d: &Deformation) -> Result<Complex64> {
    if k > m {
        return Ok(ZERO);
    }
    q_multinomial(m, &[k, m - k], d)
}

/// `1/[m]_q!`, the m-th Taylor coefficient of the truncated q-exponential.
pub fn q_exponential_coefficient(m: usize, d: &Deformation) -> Result<Complex64> {
    d.check_xi_power(m)?;
    Ok(ONE / q_factorial(m, d))
}

/// Element of `C[ξ]/ξ^N`, stored as the N coefficients of ξ^0 … ξ^{N-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiPolynomial {
    coeffs: Vec<Complex64>,
}

impl XiPolynomial {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![ZERO; order] }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(order, 0, ONE)
    }

    /// `c · ξ^power`; a power `>= order` gives the zero polynomial.
    pub fn monomial(order: usize, power: usize, c: Complex64) -> Self {
        let mut p = Self::zero(order);
        if power < order {
            p.coeffs[power] = c;
        }
        p
    }

    /// Build from coefficients of ξ^0, ξ^1, …; shorter inputs are zero-padded.
    pub fn from_coeffs(order: usize, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() > order {
            return Err(SmashError::NilpotencyBound { power: coeffs.len() - 1, order });
        }
        let mut p = Self::zero(order);
        p.coeffs[..coeffs.len()].copy_from_slice(coeffs);
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> Complex64 {
        self.coeffs.get(power).copied().unwrap_or(ZERO)
    }

    /// Evaluate at a scalar value of ξ.
    pub fn eval(&self, xi: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * xi + c)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.order(), other.order(), "order mismatch");
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Add for &XiPolynomial {
    type Output = XiPolynomial;
    fn add(self, rhs: &XiPolynomial) -> XiPolynomial {
        assert_eq!(self.order(), rhs.order(), "order mismatch");
        XiPolynomial { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &XiPolynomial {
    type Output = XiPolynomial;
    fn sub(self, rhs: &XiPolynomial) -> XiPolynomial {
        assert_eq!(self.order(), rhs.order(), "order mismatch");
        XiPolynomial { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

/// Truncated product in `C[ξ]/ξ^N` (ξ commutes with itself).
impl Mul for &XiPolynomial {
    type Output = XiPolynomial;
    fn mul(self, rhs: &XiPolynomial) -> XiPolynomial {
        assert_eq!(self.order(), rhs.order(), "order mismatch");
        let n = self.order();
        let mut out = XiPolynomial::zero(n);
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate().take(n - i) {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}

fn check_order(f: &XiPolynomial, d: &Deformation) {
    assert_eq!(f.order(), d.order(), "polynomial order does not match the deformation");
}

/// Jackson derivative: `ξ^m ↦ [m]_q ξ^{m-1}`.
pub fn jackson_derivative(f: &XiPolynomial, d: &Deformation) -> XiPolynomial {
    check_order(f, d);
    let n = d.order();
    let mut out = XiPolynomial::zero(n);
    for m in 1..n {
        out.coeffs[m - 1] = q_number(m, d) * f.coeffs[m];
    }
    out
}

/// Dilation `(L_s f)(ξ) = f(sξ)`.
pub fn scale_operator(f: &XiPolynomial, s: Complex64) -> XiPolynomial {
    let mut sm = ONE;
    let coeffs = f
        .coeffs
        .iter()
        .map(|&c| {
            let v = c * sm;
            sm *= s;
            v
        })
        .collect();
    XiPolynomial { coeffs }
}

/// Dual derivative `D* = -D_ξ ∘ L_{q^{-1}}`.
pub fn dual_derivative(f: &XiPolynomial, d: &Deformation) -> XiPolynomial {
    jackson_derivative(&scale_operator(f, d.q_pow(-1)), d).scale(-ONE)
}

/// Superdiagonal weight `g_m` with `D* ξ^m = g_m ξ^{m-1}`.
pub fn dual_derivative_weight(m: usize, d: &Deformation) -> Complex64 {
    -d.q_pow(-(m as i64)) * q_number(m, d)
}

/// Apply `exp(Σ_k coeffs[k] · D_ξ^{k+1})` exactly; the series terminates
/// after N terms because `D_ξ` is nilpotent.
pub fn jackson_exponential(f: &XiPolynomial, coeffs: &[Complex64], d: &Deformation) -> XiPolynomial {
    check_order(f, d);
    let generator = |g: &XiPolynomial| {
        let mut acc = XiPolynomial::zero(d.order());
        let mut power = g.clone();
        for &c in coeffs {
            power = jackson_derivative(&power, d);
            acc = &acc + &power.scale(c);
        }
        acc
    };
    let mut total = f.clone();
    let mut term = f.clone();
    for k in 1..d.order() {
        term = generator(&term).scale(Complex64::new(1.0 / k as f64, 0.0));
        total = &total + &term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn rejects_order_one() {
        assert_eq!(Deformation::new(1), Err(SmashError::InvalidOrder(1)));
        assert!(Deformation::new(0).is_err());
    }

    #[test]
    fn root_is_primitive() {
        for n in 2..9 {
            let d = Deformation::new(n).unwrap();
            close(d.q().powu(n as u32), ONE, 1e-12);
            for m in 1..n {
                assert!((d.q().powu(m as u32) - ONE).norm() > 1e-6);
            }
        }
    }

    #[test]
    fn q_number_examples() {
        let d4 = Deformation::new(4).unwrap();
        close(q_number(0, &d4), ZERO, 0.0);
        close(q_number(1, &d4), ONE, 1e-15);
        close(q_number(2, &d4), c(1.0, 1.0), 1e-14);
        assert_eq!(q_number(4, &d4), ZERO);
        assert_eq!(q_number(8, &d4), ZERO);
    }

    #[test]
    fn q_factorial_examples() {
        let d3 = Deformation::new(3).unwrap();
        close(q_factorial(0, &d3), ONE, 0.0);
        close(q_factorial(2, &d3), ONE + d3.q(), 1e-14);
        assert_eq!(q_factorial(3, &d3), ZERO);
    }

    #[test]
    fn q_multinomial_examples() {
        let d4 = Deformation::new(4).unwrap();
        close(q_multinomial(2, &[2, 0], &d4).unwrap(), ONE, 1e-14);
        close(q_multinomial(2, &[1, 1], &d4).unwrap(), c(1.0, 1.0), 1e-14);
        let d5 = Deformation::new(5).unwrap();
        close(q_multinomial(3, &[1, 1, 1], &d5).unwrap(), q_factorial(3, &d5), 1e-14);
        assert!(matches!(q_multinomial(4, &[2, 2], &d4), Err(SmashError::QMultinomialUndefined { m: 4, order: 4 })));
        assert!(matches!(q_multinomial(2, &[1, 0], &d4), Err(SmashError::BadComposition { .. })));
    }

    #[test]
    fn recursion_and_pascal() {
        for n in 2..=6 {
            let d = Deformation::new(n).unwrap();
            for m in 1..n {
                close(q_number(m, &d) * q_factorial(m - 1, &d), q_factorial(m, &d), 1e-12);
                for k in 1..m {
                    let lhs = q_binomial(m, k, &d).unwrap();
                    let rhs =
                        q_binomial(m - 1, k - 1, &d).unwrap() + d.q_pow(k as i64) * q_binomial(m - 1, k, &d).unwrap();
                    close(lhs, rhs, 1e-12);
                }
            }
        }
    }

    #[test]
    fn q_number_tends_to_integer_for_large_order() {
        let n = 2000;
        let d = Deformation::new(n).unwrap();
        for m in 0..3 {
            assert!((q_number(m, &d) - c(m as f64, 0.0)).norm() < 10.0 / n as f64);
        }
    }

    #[test]
    fn jackson_examples() {
        let d3 = Deformation::new(3).unwrap();
        let xi = XiPolynomial::monomial(3, 1, ONE);
        assert_eq!(jackson_derivative(&xi, &d3), XiPolynomial::one(3));
        assert_eq!(jackson_derivative(&XiPolynomial::one(3), &d3), XiPolynomial::zero(3));
        let xi2 = XiPolynomial::monomial(3, 2, ONE);
        let got = jackson_derivative(&xi2, &d3);
        close(got.coeff(1), ONE + d3.q(), 1e-14);
        close(got.coeff(0), ZERO, 0.0);
    }

    /// The difference quotient (f(ξ) - f(qξ)) / ((1-q)ξ) evaluated at a
    /// numeric point agrees with the monomial action.
    #[test]
    fn jackson_matches_difference_quotient() {
        let d = Deformation::new(5).unwrap();
        let f =
            XiPolynomial::from_coeffs(5, &[c(0.3, 0.1), c(-1.0, 2.0), c(0.5, 0.0), c(0.0, 1.5), c(2.0, -0.7)]).unwrap();
        let df = jackson_derivative(&f, &d);
        for &z in &[c(0.4, 0.2), c(-0.3, 0.9), c(1.1, -0.5)] {
            let quotient = (f.eval(z) - f.eval(d.q() * z)) / ((ONE - d.q()) * z);
            // the truncated f has no ξ^N term, so the quotient is exact
            close(df.eval(z), quotient, 1e-12);
        }
    }

    #[test]
    fn scale_examples() {
        let d3 = Deformation::new(3).unwrap();
        let f = XiPolynomial::from_coeffs(3, &[c(1.0, 2.0), c(3.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(scale_operator(&f, ONE), f);
        let xi2 = XiPolynomial::monomial(3, 2, ONE);
        let got = scale_operator(&xi2, d3.q());
        close(got.coeff(2), d3.q() * d3.q(), 1e-14);

        let d2 = Deformation::new(2).unwrap();
        let f = XiPolynomial::from_coeffs(2, &[ONE, ONE]).unwrap();
        let got = scale_operator(&f, d2.q_pow(-1));
        close(got.coeff(0), ONE, 1e-15);
        close(got.coeff(1), -ONE, 1e-15);
    }

    #[test]
    fn dual_derivative_examples() {
        let d2 = Deformation::new(2).unwrap();
        assert_eq!(dual_derivative(&XiPolynomial::one(2), &d2), XiPolynomial::zero(2));
        let got = dual_derivative(&XiPolynomial::monomial(2, 1, ONE), &d2);
        close(got.coeff(0), ONE, 1e-15);

        let d3 = Deformation::new(3).unwrap();
        let got = dual_derivative(&XiPolynomial::monomial(3, 2, ONE), &d3);
        close(got.coeff(1), -d3.q_pow(-2) * (ONE + d3.q()), 1e-14);
    }

    #[test]
    fn dual_weight_matches_operator_on_basis() {
        for n in 2..=6 {
            let d = Deformation::new(n).unwrap();
            for m in 0..n {
                let got = dual_derivative(&XiPolynomial::monomial(n, m, ONE), &d);
                let want = if m == 0 {
                    XiPolynomial::zero(n)
                } else {
                    XiPolynomial::monomial(n, m - 1, dual_derivative_weight(m, &d))
                };
                assert!(got.max_abs_diff(&want) < 1e-14);
            }
        }
    }

    #[test]
    fn q_exponential_examples() {
        let d4 = Deformation::new(4).unwrap();
        close(q_exponential_coefficient(0, &d4).unwrap(), ONE, 0.0);
        close(q_exponential_coefficient(1, &d4).unwrap(), ONE, 1e-15);
        close(q_exponential_coefficient(2, &d4).unwrap(), ONE / c(1.0, 1.0), 1e-14);
        assert!(q_exponential_coefficient(4, &d4).is_err());
    }

    #[test]
    fn truncated_product() {
        let x = XiPolynomial::monomial(3, 2, ONE);
        let y = XiPolynomial::monomial(3, 1, ONE);
        assert_eq!(&x * &y, XiPolynomial::zero(3));
        let s = XiPolynomial::from_coeffs(3, &[ONE, ONE]).unwrap();
        let sq = &s * &s;
        assert_abs_diff_eq!(sq.coeff(1).re, 2.0);
        assert_abs_diff_eq!(sq.coeff(2).re, 1.0);
    }

    #[test]
    fn jackson_exponential_first_order() {
        let d = Deformation::new(3).unwrap();
        let xi = XiPolynomial::monomial(3, 1, ONE);
        let got = jackson_exponential(&xi, &[c(0.7, 0.0)], &d);
        close(got.coeff(0), c(0.7, 0.0), 1e-15);
        close(got.coeff(1), ONE, 1e-15);
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = XiPolynomial> {
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n).prop_map(move |v| {
            XiPolynomial::from_coeffs(n, &v.into_iter().map(|(a, b)| c(a, b)).collect::<Vec<_>>()).unwrap()
        })
    }

    fn arb_pair() -> impl Strategy<Value = (usize, XiPolynomial, XiPolynomial)> {
        (2usize..=6).prop_flat_map(|n| (Just(n), arb_poly(n), arb_poly(n)))
    }

    proptest! {
        #[test]
        fn anyonic_leibniz((n, f, g) in arb_pair()) {
            let d = Deformation::new(n).unwrap();
            let lhs = jackson_derivative(&(&f * &g), &d);
            let rhs = &(&jackson_derivative(&f, &d) * &g)
                + &(&scale_operator(&f, d.q()) * &jackson_derivative(&g, &d));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn scale_is_multiplicative((n, f, _g) in arb_pair(), a in 0i64..12, b in 0i64..12) {
            let d = Deformation::new(n).unwrap();
            let twice = scale_operator(&scale_operator(&f, d.q_pow(a)), d.q_pow(b));
            let once = scale_operator(&f, d.q_pow(a + b));
            prop_assert!(twice.max_abs_diff(&once) < 1e-12);
        }
    }
}
