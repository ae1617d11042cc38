// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod model;
pub mod numerics;
pub mod specfun;
pub mod spectral;
pub mod wavefunction;
