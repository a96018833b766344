//! Analytic outage expressions and their numerical evaluation.

mod charfun;
mod clt;
mod correlation;
mod fr;
mod gil_pelaez;

pub use charfun::{char_fun, char_fun_density, CharFunSample, LemmaCharFun};
pub use clt::{outage_ar_clt, outage_ar_fox_h, outage_pr_siso};
pub use correlation::{corr_coeff, CorrelatedGainModel};
pub use fr::{outage_fr_bound, outage_fr_siso, outage_fr_siso_model, FrQuadratureSpec};
pub use gil_pelaez::{outage_gil_pelaez, outage_gil_pelaez_detailed, GilPelaezPlan, GilPelaezResult};
