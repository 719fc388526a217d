//! Field-generic Hermitian matrices, the cone `Π_q`, spectral routines and the
//! special constants used throughout the crate.

mod matrix;
mod params;
mod special;
pub mod spectral;
pub mod text;

pub use matrix::{CMat, ConePoint, HermitianMatrix, SquareMatrix, HERMITIAN_TOL, PSD_TOL};
pub use params::{Field, HypergroupParams};
pub use special::{gamma_cone, gamma_fn, ln_gamma_cone, pochhammer_general, power_function, rising};
pub use spectral::{eig_herm, eigenvalues, loewner_leq, psd_sqrt, sqrt_of_hermitian, sqrt_of_hermitian_scaled, Eigen};
