//! Algebraic Brownian motion on the smash line.
//!
//! The smash line merges the real line (generator `x`) with a paragrassmann
//! line (generator `ξ`, `ξ^N = 0`) under a braided product. This crate
//! provides
//!
//! * [`qcalculus`]: q-numbers at `q = exp(2πi/N)` and the Jackson calculus on
//!   `C[ξ]/ξ^N`;
//! * [`smash_algebra`]: elements of Ω, braided multi-slot words and the
//!   iterated coproduct;
//! * [`random_walk`]: two-point step functionals, their convolution powers
//!   and exact n-step moments, with a brute-force normal-ordering oracle;
//! * [`diffusion`]: the continuum limit, the drifted heat kernel, the ξ-sector
//!   evolution and PDE residuals;
//! * [`matrix_realization`]: the N×N realizations of ξ, `D_ξ`, `D_ξ*`, the
//!   triangular operator `H` and a solver for the coupled diffusion system.
//!
//! Inner loops fan out over rayon when the `parallel` feature is enabled
//! (the default); results are reduced in a fixed order either way.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compositions;
pub mod diffusion;
pub mod error;
pub mod matrix_realization;
pub mod par;
pub mod qcalculus;
pub mod random_walk;
pub mod smash_algebra;

pub use error::{Result, SmashError};
pub use num_complex::Complex64;
pub use qcalculus::{Deformation, XiPolynomial};
pub use smash_algebra::{MultiSlotExpansion, MultiSlotWord, SmashElement};
