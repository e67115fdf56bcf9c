use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coproduct::coproduct_power;
use super::element::{SmashElement, DEFAULT_X_CAP};
use super::pair;
use super::word::{braided_normal_order, MultiSlotWord};
use crate::error::{Result, SmashError};
use crate::par;
use crate::qcalculus::Deformation;

/// Per-slot `(x-power, ξ-power)` tuple of a normal-ordered term.
pub type SlotPowers = Vec<(usize, usize)>;

/// Linear combination of normal-ordered n-slot words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionRepr", into = "ExpansionRepr")]
pub struct MultiSlotExpansion {
    slots: usize,
    x_cap: usize,
    terms: BTreeMap<SlotPowers, Complex64>,
}

impl MultiSlotExpansion {
    pub fn zero(slots: usize) -> Self {
        Self::zero_with_cap(slots, DEFAULT_X_CAP)
    }

    pub fn zero_with_cap(slots: usize, x_cap: usize) -> Self {
        Self { slots, x_cap, terms: BTreeMap::new() }
    }

    /// The empty word `1 ⊗ … ⊗ 1`.
    pub fn unit(slots: usize) -> Self {
        let mut e = Self::zero(slots);
        e.terms.insert(vec![(0, 0); slots], Complex64::new(1.0, 0.0));
        e
    }

    /// A single generator power placed in one slot.
    pub fn monomial_in_slot(slot: usize, x: usize, xi: usize, slots: usize) -> Result<Self> {
        if slot >= slots {
            return Err(SmashError::SlotOutOfRange { slot, slots });
        }
        let mut powers = vec![(0, 0); slots];
        powers[slot] = (x, xi);
        let mut e = Self::zero(slots);
        e.terms.insert(powers, Complex64::new(1.0, 0.0));
        Ok(e)
    }

    /// `x_1 + … + x_n`.
    pub fn x_sum(slots: usize) -> Self {
        let mut e = Self::zero(slots);
        for s in 0..slots {
            let mut p = vec![(0, 0); slots];
            p[s] = (1, 0);
            e.terms.insert(p, Complex64::new(1.0, 0.0));
        }
        e
    }

    /// `ξ_1 + … + ξ_n`.
    pub fn xi_sum(slots: usize) -> Self {
        let mut e = Self::zero(slots);
        for s in 0..slots {
            let mut p = vec![(0, 0); slots];
            p[s] = (0, 1);
            e.terms.insert(p, Complex64::new(1.0, 0.0));
        }
        e
    }

    pub fn with_x_cap(mut self, x_cap: usize) -> Self {
        self.x_cap = x_cap;
        self
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn x_cap(&self) -> usize {
        self.x_cap
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, powers: &[(usize, usize)]) -> Complex64 {
        self.terms.get(powers).copied().unwrap_or_default()
    }

    /// Terms in ascending lexicographic order of their slot powers.
    pub fn terms(&self) -> impl Iterator<Item = (&SlotPowers, Complex64)> + '_ {
        self.terms.iter().map(|(k, &c)| (k, c))
    }

    /// Accumulate `c` onto the term with the given slot powers.
    pub fn add_term(&mut self, powers: SlotPowers, c: Complex64) -> Result<()> {
        if powers.len() != self.slots {
            return Err(SmashError::SlotCountMismatch { left: self.slots, right: powers.len() });
        }
        if let Some(&(x, _)) = powers.iter().find(|&&(x, _)| x > self.x_cap) {
            return Err(SmashError::XCapOverflow { power: x, cap: self.x_cap });
        }
        let key = powers;
        let entry = self.terms.entry(key.clone()).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.slots != other.slots {
            return Err(SmashError::SlotCountMismatch { left: self.slots, right: other.slots });
        }
        let mut out = self.clone();
        for (p, c) in other.terms() {
            out.add_term(p.clone(), c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero_with_cap(self.slots, self.x_cap);
        for (p, c) in self.terms() {
            out.add_term(p.clone(), c * s).expect("scaling keeps degrees");
        }
        out
    }

    /// Drop coefficients with modulus below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() >= tol);
        out
    }

    /// Largest coefficient difference over the union of supports; infinite
    /// if the slot counts differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.slots != other.slots {
            return f64::INFINITY;
        }
        self.terms.keys().chain(other.terms.keys()).map(|k| (self.coeff(k) - other.coeff(k)).norm()).fold(0.0, f64::max)
    }

    /// Apply the counit to one tensor leg, removing that slot.
    pub fn apply_counit_at(&self, slot: usize) -> Result<Self> {
        if slot >= self.slots {
            return Err(SmashError::SlotOutOfRange { slot, slots: self.slots });
        }
        let mut out = Self::zero_with_cap(self.slots - 1, self.x_cap);
        for (p, c) in self.terms() {
            if p[slot] == (0, 0) {
                let mut rest = p.clone();
                rest.remove(slot);
                out.add_term(rest, c)?;
            }
        }
        Ok(out)
    }

    /// Replace slot `slot` of every term by the `parts`-fold coproduct of its
    /// monomial, splicing the new slots in place.
    pub fn apply_coproduct_at(&self, slot: usize, parts: usize, d: &Deformation) -> Result<Self> {
        if slot >= self.slots {
            return Err(SmashError::SlotOutOfRange { slot, slots: self.slots });
        }
        let mut out = Self::zero_with_cap(self.slots + parts - 1, self.x_cap);
        for (p, c) in self.terms() {
            let (k, l) = p[slot];
            let split = coproduct_power(k, l, parts, d)?;
            for (inner, ci) in split.terms() {
                let mut powers = Vec::with_capacity(out.slots);
                powers.extend_from_slice(&p[..slot]);
                powers.extend_from_slice(inner);
                powers.extend_from_slice(&p[slot + 1..]);
                out.add_term(powers, c * ci)?;
            }
        }
        Ok(out)
    }

    /// Collapse a one-slot expansion into a [`SmashElement`].
    pub fn to_element(&self, d: Deformation) -> Result<SmashElement> {
        if self.slots != 1 {
            return Err(SmashError::SlotCountMismatch { left: self.slots, right: 1 });
        }
        let mut e = SmashElement::zero(d, self.x_cap);
        for (p, c) in self.terms() {
            e.add_term(p[0].0, p[0].1, c)?;
        }
        Ok(e)
    }
}

/// Product in the braided n-slot algebra: concatenate each pair of terms and
/// normal order the result.
pub fn multislot_multiply(
    u: &MultiSlotExpansion,
    v: &MultiSlotExpansion,
    big_q: f64,
    d: &Deformation,
) -> Result<MultiSlotExpansion> {
    if u.slots != v.slots {
        return Err(SmashError::SlotCountMismatch { left: u.slots, right: v.slots });
    }
    let slots = u.slots;
    let x_cap = u.x_cap.min(v.x_cap);
    let left: Vec<MultiSlotWord> = u.terms().map(|(p, c)| MultiSlotWord::from_slot_powers(c, p)).collect();
    let right: Vec<MultiSlotWord> = v.terms().map(|(p, c)| MultiSlotWord::from_slot_powers(c, p)).collect();

    let partials: Vec<Vec<(SlotPowers, Complex64)>> = par::map_collect(&left, |lw| {
        right
            .iter()
            .filter_map(|rw| {
                let w = braided_normal_order(&lw.concat(rw), big_q, d);
                if w.is_zero() {
                    None
                } else {
                    Some((w.slot_powers().expect("normal ordered"), w.prefactor()))
                }
            })
            .collect()
    });

    let mut out = MultiSlotExpansion::zero_with_cap(slots, x_cap);
    for (p, c) in partials.into_iter().flatten() {
        out.add_term(p, c)?;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ExpansionRepr {
    slots: usize,
    x_cap: usize,
    terms: Vec<ExpansionTerm>,
}

#[derive(Serialize, Deserialize)]
struct ExpansionTerm {
    powers: Vec<[usize; 2]>,
    c: [f64; 2],
}

impl From<MultiSlotExpansion> for ExpansionRepr {
    fn from(e: MultiSlotExpansion) -> Self {
        ExpansionRepr {
            slots: e.slots,
            x_cap: e.x_cap,
            terms: e
                .terms()
                .map(|(p, c)| ExpansionTerm { powers: p.iter().map(|&(x, xi)| [x, xi]).collect(), c: pair(c) })
                .collect(),
        }
    }
}

impl TryFrom<ExpansionRepr> for MultiSlotExpansion {
    type Error = SmashError;
    fn try_from(r: ExpansionRepr) -> Result<Self> {
        let mut e = MultiSlotExpansion::zero_with_cap(r.slots, r.x_cap);
        for t in r.terms {
            e.add_term(t.powers.iter().map(|p| (p[0], p[1])).collect(), Complex64::new(t.c[0], t.c[1]))?;
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn xi_squared_in_one_slot() {
        for n in 2..5 {
            let d = Deformation::new(n).unwrap();
            let xi = MultiSlotExpansion::monomial_in_slot(0, 0, 1, 2).unwrap();
            let sq = multislot_multiply(&xi, &xi, 1.0, &d).unwrap();
            if n == 2 {
                assert!(sq.is_empty());
            } else {
                assert_eq!(sq.len(), 1);
                assert_eq!(sq.coeff(&[(0, 2), (0, 0)]), one());
            }
        }
    }

    #[test]
    fn slot_two_times_slot_one() {
        let d = Deformation::new(3).unwrap();
        let u = MultiSlotExpansion::monomial_in_slot(1, 0, 1, 2).unwrap();
        let v = MultiSlotExpansion::monomial_in_slot(0, 0, 1, 2).unwrap();
        let prod = multislot_multiply(&u, &v, 1.0, &d).unwrap();
        assert_eq!(prod.len(), 1);
        assert!((prod.coeff(&[(0, 1), (0, 1)]) - d.q()).norm() < 1e-15);
    }

    #[test]
    fn commuting_x_binomial() {
        let d = Deformation::new(2).unwrap();
        let s = MultiSlotExpansion::x_sum(2);
        let sq = multislot_multiply(&s, &s, 1.7, &d).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coeff(&[(2, 0), (0, 0)]), one());
        assert_eq!(sq.coeff(&[(1, 0), (1, 0)]), Complex64::new(2.0, 0.0));
        assert_eq!(sq.coeff(&[(0, 0), (2, 0)]), one());
    }

    #[test]
    fn slot_mismatch_rejected() {
        let d = Deformation::new(2).unwrap();
        let err = multislot_multiply(&MultiSlotExpansion::unit(2), &MultiSlotExpansion::unit(3), 1.0, &d);
        assert_eq!(err, Err(SmashError::SlotCountMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn x_cap_overflow_propagates() {
        let d = Deformation::new(2).unwrap();
        let s = MultiSlotExpansion::x_sum(2).with_x_cap(2);
        let cube = multislot_multiply(&multislot_multiply(&s, &s, 1.0, &d).unwrap(), &s, 1.0, &d);
        assert!(matches!(cube, Err(SmashError::XCapOverflow { power: 3, cap: 2 })));
    }

    #[test]
    fn nilpotency_in_any_slot_kills_product() {
        let d = Deformation::new(3).unwrap();
        let a = MultiSlotExpansion::monomial_in_slot(2, 1, 2, 3).unwrap();
        let b = MultiSlotExpansion::monomial_in_slot(2, 0, 1, 3).unwrap();
        assert!(multislot_multiply(&a, &b, 2.0, &d).unwrap().is_empty());
    }

    #[test]
    fn counit_and_coproduct_legs() {
        let d = Deformation::new(3).unwrap();
        let e = MultiSlotExpansion::monomial_in_slot(0, 2, 1, 2).unwrap();
        let c = e.apply_counit_at(1).unwrap();
        assert_eq!(c.slots(), 1);
        assert_eq!(c.coeff(&[(2, 1)]), one());
        assert!(e.apply_counit_at(0).unwrap().is_empty());
        let split = MultiSlotExpansion::unit(1).apply_coproduct_at(0, 3, &d).unwrap();
        assert_eq!(split, MultiSlotExpansion::unit(3));
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let d = Deformation::new(3).unwrap();
        let s = MultiSlotExpansion::xi_sum(2);
        let sq = multislot_multiply(&s, &s, 1.0, &d).unwrap();
        let json = serde_json::to_string(&sq).unwrap();
        assert!(json.starts_with(r#"{"slots":2,"x_cap":16,"terms":[{"powers":[[0,0],[0,2]]"#), "{json}");
        let back: MultiSlotExpansion = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sq);
    }
}
