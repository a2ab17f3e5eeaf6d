// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod geometry;
pub mod numerics;
pub mod symmetry;
pub mod lecam;
pub mod gof;
pub mod montecarlo;
