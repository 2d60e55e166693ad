//! Spectra of the PT-symmetric linear potential `igx` confined in a hard box
//! (infinite walls at x = ±1) and a soft box (zero potential outside).
//!
//! The numerical kernels ([`airy`], [`rootfind`], [`eigensolve`]) are generic
//! over the real scalar through [`Real`]; the physics layers work in `f64`.

pub mod airy;
pub mod branches;
pub mod cli;
pub mod eigensolve;
pub mod error;
pub mod hardbox;
pub mod rootfind;
pub mod scalar;
pub mod softbox;

pub use error::{Error, Result};
pub use scalar::{Real, Scaled};

/// Double-precision complex scalar used by the physics layers.
pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type AiryValues64 = airy::AiryValues<f64>;
pub type AiryValues32 = airy::AiryValues<f32>;
pub type HMatrix64 = eigensolve::HMatrix<f64>;
pub type HMatrix32 = eigensolve::HMatrix<f32>;
pub type Eigenvalue64 = eigensolve::Eigenvalue<f64>;
pub type RootPath64 = rootfind::RootPath<f64>;
