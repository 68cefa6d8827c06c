//! Numerical building blocks shared by every other module.

mod quadrature;
mod rng;
mod special;
mod stats;

pub use quadrature::{
    adaptive_quadrature, chebyshev_nodes, integrate_to_infinity, Quadrature, DEFAULT_TOLERANCE,
};
pub use rng::RngStream;
pub use special::{
    bessel_i, bessel_i0, bessel_i0_scaled, bessel_i1, bessel_i1_scaled, gauss_error_phi,
    normal_cdf, q_function, BesselOrder,
};
pub use stats::{ks_distance, EmpiricalDistribution};
