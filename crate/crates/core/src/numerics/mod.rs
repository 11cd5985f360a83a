//! Numerical foundations: special functions, distributions, quadrature and
//! random streams.

pub mod dist;
pub mod quad;
pub mod rng;
pub mod special;

pub use dist::{
    beta_pdf, chi2_cdf, chi2_sf, f_cdf, f_pdf, gamma_pdf, noncentral_chi2_cdf, normal_cdf,
    normal_ln_cdf, normal_ln_pdf, normal_ln_sf, normal_pdf, normal_quantile, normal_sf, t_cdf,
    t_pdf, Beta, ChiSquared, Continuous, FisherF, Gamma, NoncentralChiSquared, Normal, StudentT,
};
pub use quad::{integrate_1d, integrate_2d, Domain, QuadResult, QuadratureSpec, Transform};
pub use rng::RngStream;
pub use special::{
    erfc, incomplete_beta_tails, log_beta, log_gamma, regularized_gamma_lower,
    regularized_gamma_upper, regularized_incomplete_beta, BetaTails,
};
