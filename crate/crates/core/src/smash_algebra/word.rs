use num_complex::Complex64;

use crate::qcalculus::Deformation;

/// The block `x_slot^x ξ_slot^xi` of a multi-slot word (slots are 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotFactor {
    pub slot: usize,
    pub x: usize,
    pub xi: usize,
}

impl SlotFactor {
    pub fn new(slot: usize, x: usize, xi: usize) -> Self {
        Self { slot, x, xi }
    }
}

/// A product of slot blocks in the braided n-slot algebra, times a scalar.
///
/// The blocks may appear in any order. The normal form has exactly one block
/// per slot, slots ascending, with x before ξ inside each block.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSlotWord {
    prefactor: Complex64,
    slots: usize,
    factors: Vec<SlotFactor>,
}

impl MultiSlotWord {
    /// Word with unit prefactor. Panics if a factor addresses a slot `>= slots`.
    pub fn new(slots: usize, factors: Vec<SlotFactor>) -> Self {
        Self::with_prefactor(Complex64::new(1.0, 0.0), slots, factors)
    }

    pub fn with_prefactor(prefactor: Complex64, slots: usize, factors: Vec<SlotFactor>) -> Self {
        assert!(factors.iter().all(|f| f.slot < slots), "factor slot out of range");
        Self { prefactor, slots, factors }
    }

    /// Normal-ordered word from per-slot `(x, ξ)` powers.
    pub fn from_slot_powers(prefactor: Complex64, powers: &[(usize, usize)]) -> Self {
        let factors = powers.iter().enumerate().map(|(s, &(x, xi))| SlotFactor::new(s, x, xi)).collect();
        Self { prefactor, slots: powers.len(), factors }
    }

    pub fn zero(slots: usize) -> Self {
        Self::from_slot_powers(Complex64::new(0.0, 0.0), &vec![(0, 0); slots])
    }

    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn factors(&self) -> &[SlotFactor] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor == Complex64::new(0.0, 0.0)
    }

    /// Concatenate `other` to the right of `self`.
    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.slots, other.slots, "slot count mismatch");
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { prefactor: self.prefactor * other.prefactor, slots: self.slots, factors }
    }

    /// True when blocks are exactly one per slot in ascending order.
    pub fn is_normal(&self) -> bool {
        self.factors.len() == self.slots && self.factors.iter().enumerate().all(|(s, f)| f.slot == s)
    }

    /// Per-slot `(x, ξ)` powers of a normal-ordered word.
    pub fn slot_powers(&self) -> Option<Vec<(usize, usize)>> {
        self.is_normal().then(|| self.factors.iter().map(|f| (f.x, f.xi)).collect())
    }
}

/// Rewrite `w` into normal order using the increment relations
///
/// ```text
/// x_i x_j = x_j x_i,   ξ_i ξ_j = q ξ_j ξ_i,   x_i ξ_j = Q ξ_j x_i   (i > j)
/// ```
///
/// together with `ξ_i x_j = x_j ξ_i` for `i > j` and commuting x, ξ within a
/// slot. Every generator pair commutes up to a scalar, so the accumulated
/// phase only depends on how many times each ordered pair is inverted.
pub fn braided_normal_order(w: &MultiSlotWord, big_q: f64, d: &Deformation) -> MultiSlotWord {
    let slots = w.slots;
    if w.is_zero() {
        return MultiSlotWord::zero(slots);
    }
    let mut q_exponent: i64 = 0;
    let mut big_q_exponent: i32 = 0;
    let factors = &w.factors;
    for (a, left) in factors.iter().enumerate() {
        for right in &factors[a + 1..] {
            if left.slot > right.slot {
                // ξ_i^b past ξ_j^d picks up q^{bd}; x_i^a past ξ_j^d picks up Q^{ad}
                q_exponent += (left.xi * right.xi) as i64;
                big_q_exponent += (left.x * right.xi) as i32;
            }
        }
    }
    let mut powers = vec![(0usize, 0usize); slots];
    for f in factors {
        powers[f.slot].0 += f.x;
        powers[f.slot].1 += f.xi;
    }
    if powers.iter().any(|&(_, xi)| xi >= d.order()) {
        return MultiSlotWord::zero(slots);
    }
    let phase = d.q_pow(q_exponent) * big_q.powi(big_q_exponent);
    MultiSlotWord::from_slot_powers(w.prefactor * phase, &powers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) {
        assert!((a - b).norm() < 1e-14, "{a} vs {b}");
    }

    #[test]
    fn single_slot_is_unchanged() {
        let d = Deformation::new(3).unwrap();
        let w = MultiSlotWord::new(1, vec![SlotFactor::new(0, 2, 1)]);
        assert_eq!(braided_normal_order(&w, 2.0, &d), w);
    }

    #[test]
    fn xi_swap_gives_q() {
        for n in 2..6 {
            let d = Deformation::new(n).unwrap();
            // ξ_2 ξ_1 = q ξ_1 ξ_2
            let w = MultiSlotWord::new(2, vec![SlotFactor::new(1, 0, 1), SlotFactor::new(0, 0, 1)]);
            let out = braided_normal_order(&w, 1.0, &d);
            assert_eq!(out.slot_powers().unwrap(), vec![(0, 1), (0, 1)]);
            close(out.prefactor(), d.q());
        }
    }

    #[test]
    fn x_past_xi_gives_big_q() {
        let d = Deformation::new(3).unwrap();
        // x_2 ξ_1 = Q ξ_1 x_2
        let w = MultiSlotWord::new(2, vec![SlotFactor::new(1, 1, 0), SlotFactor::new(0, 0, 1)]);
        let out = braided_normal_order(&w, 2.5, &d);
        assert_eq!(out.slot_powers().unwrap(), vec![(0, 1), (1, 0)]);
        close(out.prefactor(), Complex64::new(2.5, 0.0));
    }

    #[test]
    fn x_sector_commutes() {
        let d = Deformation::new(2).unwrap();
        let w =
            MultiSlotWord::new(3, vec![SlotFactor::new(2, 1, 0), SlotFactor::new(0, 2, 0), SlotFactor::new(1, 1, 0)]);
        let out = braided_normal_order(&w, 3.0, &d);
        assert_eq!(out.slot_powers().unwrap(), vec![(2, 0), (1, 0), (1, 0)]);
        close(out.prefactor(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn within_slot_x_and_xi_commute() {
        let d = Deformation::new(4).unwrap();
        let w = MultiSlotWord::new(1, vec![SlotFactor::new(0, 0, 1), SlotFactor::new(0, 1, 0)]);
        let out = braided_normal_order(&w, 2.0, &d);
        assert_eq!(out.slot_powers().unwrap(), vec![(1, 1)]);
        close(out.prefactor(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn nilpotent_overflow_is_zero() {
        let d = Deformation::new(2).unwrap();
        let w =
            MultiSlotWord::new(2, vec![SlotFactor::new(0, 0, 1), SlotFactor::new(1, 0, 1), SlotFactor::new(0, 0, 1)]);
        assert!(braided_normal_order(&w, 1.0, &d).is_zero());
    }

    #[test]
    fn idempotent_on_normal_words() {
        let d = Deformation::new(5).unwrap();
        let w = MultiSlotWord::from_slot_powers(Complex64::new(0.3, 0.7), &[(1, 2), (0, 0), (3, 4)]);
        let once = braided_normal_order(&w, 1.7, &d);
        assert_eq!(once, w);
        assert_eq!(braided_normal_order(&once, 1.7, &d), once);
    }

    /// Letter-by-letter bubble sort agrees with the pair-counting rule.
    #[test]
    fn agrees_with_adjacent_swaps() {
        #[derive(Clone, Copy)]
        enum Letter {
            X(usize),
            Xi(usize),
        }
        let key = |l: &Letter| match *l {
            Letter::X(s) => (s, 0),
            Letter::Xi(s) => (s, 1),
        };
        let d = Deformation::new(4).unwrap();
        let big_q = 1.3;
        let word =
            [Letter::Xi(2), Letter::X(1), Letter::Xi(0), Letter::X(2), Letter::Xi(1), Letter::X(0), Letter::Xi(2)];
        let mut letters = word.to_vec();
        let mut phase = Complex64::new(1.0, 0.0);
        loop {
            let mut swapped = false;
            for i in 0..letters.len() - 1 {
                if key(&letters[i + 1]) < key(&letters[i]) {
                    phase *= match (letters[i], letters[i + 1]) {
                        (Letter::Xi(a), Letter::Xi(b)) if a > b => d.q(),
                        (Letter::X(a), Letter::Xi(b)) if a > b => Complex64::new(big_q, 0.0),
                        _ => Complex64::new(1.0, 0.0),
                    };
                    letters.swap(i, i + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        let factors = word
            .iter()
            .map(|l| match *l {
                Letter::X(s) => SlotFactor::new(s, 1, 0),
                Letter::Xi(s) => SlotFactor::new(s, 0, 1),
            })
            .collect();
        let out = braided_normal_order(&MultiSlotWord::new(3, factors), big_q, &d);
        assert_eq!(out.slot_powers().unwrap(), vec![(1, 1), (1, 1), (1, 2)]);
        close(out.prefactor(), phase);
    }
}
