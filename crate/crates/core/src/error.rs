use thiserror::Error;

/// Errors raised by the smash-line library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmashError {
    #[error("nilpotency order N must be at least 2, got {0}")]
    InvalidOrder(usize),

    #[error("xi-power {power} is not representable: xi^N = 0 with N = {order}")]
    NilpotencyBound { power: usize, order: usize },

    #[error("x-power {power} exceeds the configured x cap {cap}; raise the cap")]
    XCapOverflow { power: usize, cap: usize },

    #[error("operands carry different deformations or x caps")]
    DeformationMismatch,

    #[error("slot count mismatch: {left} vs {right}")]
    SlotCountMismatch { left: usize, right: usize },

    #[error("slot index {slot} out of range for {slots} slots")]
    SlotOutOfRange { slot: usize, slots: usize },

    #[error("q-multinomial with m = {m} >= N = {order} is a 0/0 ratio at the root of unity")]
    QMultinomialUndefined { m: usize, order: usize },

    #[error("composition parts sum to {sum}, expected {expected}")]
    BadComposition { sum: usize, expected: usize },

    #[error("enumeration guard exceeded: {0}")]
    EnumerationGuard(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("[2]_q vanishes at N = 2, so the xi diffusivity alpha2 is undefined")]
    UndefinedXiDiffusivity,

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("the closed-form xi density divides by c2, which is zero")]
    ZeroXiDrift,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("explicit scheme unstable: alpha1*dt/dx^2 = {ratio} > 0.25")]
    StabilityBound { ratio: f64 },

    #[error("numerical instability: norm grew by {growth:e} at t = {time}")]
    Instability { growth: f64, time: f64 },

    #[error("boundary mass {mass:e} exceeds 1e-10 in component {component}; widen the domain")]
    BoundaryMass { component: usize, mass: f64 },

    #[error("initial data is not a Gaussian mixture")]
    NotGaussianMixture,
}

pub type Result<T> = std::result::Result<T, SmashError>;
