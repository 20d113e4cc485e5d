//! Numerical kernels for the steady drift-diffusion equation
//! `-div(grad u + b u) = f` on the periodic torus: spectral fields, Mikado
//! flows, fast-oscillation estimates, a convex-integration iteration, a
//! spectral solver with its well-posedness checks, and the ball counterexample.
#![no_std]

extern crate alloc;

pub mod convex;
pub mod counterexample;
pub mod error;
pub mod fft;
pub mod fit;
pub mod mikado;
pub mod oscillation;
pub mod quad;
pub mod random;
pub mod torus;
pub mod zhikov;

pub use error::{Error, Result};
