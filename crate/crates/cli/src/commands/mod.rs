pub mod coproduct;
pub mod diffusion;
pub mod moments;
pub mod verify;
