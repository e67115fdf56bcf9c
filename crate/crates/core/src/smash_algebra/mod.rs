//! The smash line algebra Ω = A ⊗ B: single-slot elements, braided
//! multi-slot words and their normal ordering, and the iterated coproduct.

mod coproduct;
mod element;
mod expansion;
mod word;

pub use coproduct::{coproduct, coproduct_power};
pub use element::{SmashElement, DEFAULT_X_CAP};
pub use expansion::{multislot_multiply, MultiSlotExpansion, SlotPowers};
pub use word::{braided_normal_order, MultiSlotWord, SlotFactor};

pub(crate) fn pair(c: num_complex::Complex64) -> [f64; 2] {
    [c.re, c.im]
}
