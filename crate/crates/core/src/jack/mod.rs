//! Jack polynomials and the Bessel functions built from them.

mod bessel;
mod partition;
mod table;

pub use bessel::{
    bessel_J, character_phi, jack_C, jack_P, zonal_Z, BesselEval, BesselFunction, Character, MAX_DEGREE,
};
pub use partition::{partitions, Partition};
pub use table::monomial;
