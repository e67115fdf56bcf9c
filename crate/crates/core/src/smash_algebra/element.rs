use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pair;
use crate::error::{Result, SmashError};
use crate::qcalculus::Deformation;

/// Default maximum x-power an element may carry.
pub const DEFAULT_X_CAP: usize = 16;

/// Finite expansion `Σ d_kl x^k ξ^l` in a single copy of Ω.
///
/// Coefficients are keyed by `(k, l)`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr", into = "ElementRepr")]
pub struct SmashElement {
    terms: BTreeMap<(usize, usize), Complex64>,
    deformation: Deformation,
    x_cap: usize,
}

impl SmashElement {
    pub fn zero(deformation: Deformation, x_cap: usize) -> Self {
        Self { terms: BTreeMap::new(), deformation, x_cap }
    }

    pub fn one(deformation: Deformation, x_cap: usize) -> Self {
        let mut e = Self::zero(deformation, x_cap);
        e.terms.insert((0, 0), Complex64::new(1.0, 0.0));
        e
    }

    /// `c · x^k ξ^l`.
    pub fn monomial(k: usize, l: usize, c: Complex64, deformation: Deformation, x_cap: usize) -> Result<Self> {
        let mut e = Self::zero(deformation, x_cap);
        e.add_term(k, l, c)?;
        Ok(e)
    }

    pub fn x(deformation: Deformation, x_cap: usize) -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0), deformation, x_cap).expect("x fits any cap")
    }

    pub fn xi(deformation: Deformation, x_cap: usize) -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0), deformation, x_cap).expect("N >= 2")
    }

    pub fn deformation(&self) -> &Deformation {
        &self.deformation
    }

    pub fn x_cap(&self) -> usize {
        self.x_cap
    }

    /// Accumulate `c · x^k ξ^l` into the expansion.
    pub fn add_term(&mut self, k: usize, l: usize, c: Complex64) -> Result<()> {
        self.deformation.check_xi_power(l)?;
        if k > self.x_cap {
            return Err(SmashError::XCapOverflow { power: k, cap: self.x_cap });
        }
        let entry = self.terms.entry((k, l)).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(k, l));
        }
        Ok(())
    }

    pub fn coeff(&self, k: usize, l: usize) -> Complex64 {
        self.terms.get(&(k, l)).copied().unwrap_or_default()
    }

    /// Terms in ascending `(k, l)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.terms.iter().map(|(&key, &c)| (key, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_x_power(&self) -> usize {
        self.terms.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.deformation != other.deformation || self.x_cap != other.x_cap {
            return Err(SmashError::DeformationMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for ((k, l), c) in other.terms() {
            out.add_term(k, l, c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.deformation, self.x_cap);
        for ((k, l), c) in self.terms() {
            out.add_term(k, l, c * s).expect("scaling keeps degrees");
        }
        out
    }

    /// Product in one copy of Ω; x and ξ commute inside a slot.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let order = self.deformation.order();
        let mut out = Self::zero(self.deformation, self.x_cap);
        for ((k1, l1), a) in self.terms() {
            for ((k2, l2), b) in other.terms() {
                if l1 + l2 >= order {
                    continue;
                }
                out.add_term(k1 + k2, l1 + l2, a * b)?;
            }
        }
        Ok(out)
    }

    /// ε(f) = d_00.
    pub fn counit(&self) -> Complex64 {
        self.coeff(0, 0)
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|&(k, l)| (self.coeff(k, l) - other.coeff(k, l)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    #[serde(rename = "N")]
    order: usize,
    x_cap: usize,
    terms: Vec<ElementTerm>,
}

#[derive(Serialize, Deserialize)]
struct ElementTerm {
    k: usize,
    l: usize,
    c: [f64; 2],
}

impl From<SmashElement> for ElementRepr {
    fn from(e: SmashElement) -> Self {
        ElementRepr {
            order: e.deformation.order(),
            x_cap: e.x_cap,
            terms: e.terms().map(|((k, l), c)| ElementTerm { k, l, c: pair(c) }).collect(),
        }
    }
}

impl TryFrom<ElementRepr> for SmashElement {
    type Error = SmashError;
    fn try_from(r: ElementRepr) -> Result<Self> {
        let mut e = SmashElement::zero(Deformation::new(r.order)?, r.x_cap);
        for t in r.terms {
            e.add_term(t.k, t.l, Complex64::new(t.c[0], t.c[1]))?;
        }
        Ok(e)
    }
}
