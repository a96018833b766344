//! Special-function kernels: Bessel I0/K, Marcum Q1, complex log-gamma,
//! incomplete gamma, the Mellin–Barnes Meijer-G used by the characteristic
//! function, and the product-of-shifted-exponentials CDF.

mod bessel;
mod gamma;
mod incomplete;
mod marcum;
mod meijer;
mod shifted_exp;

pub use bessel::{bessel_i0, bessel_i0e, bessel_k, ln_bessel_k};
pub(crate) use gamma::ln_gamma_unchecked;
pub use gamma::{ln_gamma, log_gamma_complex, reciprocal_gamma};
pub use incomplete::{gamma_p, gamma_q, lower_gamma_complex};
pub use marcum::{marcum_p1, marcum_q1};
pub use meijer::{meijer_g_3113, ContourSpec, ContourValue};
pub use shifted_exp::product_shifted_exp_cdf;
