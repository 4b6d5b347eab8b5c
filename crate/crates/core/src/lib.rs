//! Conformal Wasserstein distances and correspondences between disk-type
//! and sphere-type triangle meshes.

pub mod cli;
pub mod correspondence;
pub mod cost;
pub mod error;
pub mod hyperbolic;
pub mod mesh;
pub mod sphere;
pub mod synth;
pub mod transport;
pub mod uniformization;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
