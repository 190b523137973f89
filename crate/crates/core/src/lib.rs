//! Heavy rigid body about a fixed point, with the full analytic pipeline of the
//! Kovalevskaya case: integration and first integrals, Painlevé leading balances,
//! separation variables, quartic root classification, reconstruction of the motion
//! from the separation variables, genus-2 theta machinery, and the mount design rule.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod euler_poisson;
pub mod hyperelliptic;
pub mod ode;
pub mod painleve;
pub mod poly;
pub mod quadrature;
pub mod quartic_class;
pub mod realization;
pub mod reconstruction;
pub mod separation;

pub use error::{Error, ErrorKind};
pub use num_complex::Complex64;

/// Shorthand used throughout for complex numbers.
pub type C64 = Complex64;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Deterministic random stream for every seeded search.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
