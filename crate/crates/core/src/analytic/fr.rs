//! FR-scheme outage for SISO channels under the correlated-Rayleigh
//! surrogate, and the independent-sub-slot lower bound.

use super::clt::outage_ar_clt;
use super::correlation::{corr_coeff, CorrelatedGainModel};
use super::gil_pelaez::{outage_gil_pelaez, GilPelaezPlan};
use crate::channel::ChannelDims;
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, QuadOptions};
use crate::specfun::{bessel_i0e, marcum_p1};
use serde::{Deserialize, Serialize};

/// Integration plan of the nested (K−1)-dimensional quadrature over
/// τ_k = 1 + ρw_k ∈ [1, c_k], c_k = 2^{RK}/∏_{i<k} τ_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrQuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest K accepted (the integral has K − 1 dimensions).
    pub max_parts: usize,
    pub max_intervals: usize,
}

impl Default for FrQuadratureSpec {
    fn default() -> Self {
        FrQuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            max_parts: 4,
            max_intervals: 400,
        }
    }
}

impl FrQuadratureSpec {
    /// Upper limit c_i given τ_1..τ_{i−1}.
    pub fn limit(threshold: f64, taus: &[f64]) -> f64 {
        threshold / taus.iter().product::<f64>()
    }

    /// Θ = (2^{RK}/∏τ_k − 1)/(ρΩ) given τ_1..τ_{K−1}.
    pub fn theta(threshold: f64, taus: &[f64], rho: f64, omega: f64) -> f64 {
        ((Self::limit(threshold, taus) - 1.0) / (rho * omega)).max(0.0)
    }
}

struct Nested<'a> {
    k: usize,
    rho: f64,
    threshold: f64,
    model: &'a CorrelatedGainModel,
    spec: &'a FrQuadratureSpec,
}

impl Nested<'_> {
    /// Exponential density of W_1 (mean Q).
    fn f_w1(&self, w: f64) -> f64 {
        let q = self.model.sigma_sq;
        (-w / q).exp() / q
    }

    /// Non-central χ² density of W_k given W_1 = y, in scaled form.
    fn f_cond(&self, x: f64, y: f64) -> Result<f64> {
        let om = self.model.omega;
        let zeta = self.model.zeta;
        let arg = 2.0 * (zeta * x * y).sqrt() / om;
        let gap = x.sqrt() - (zeta * y).sqrt();
        Ok((-gap * gap / om).exp() * bessel_i0e(arg)? / om)
    }

    /// Integral over τ_{level+1}..τ_{K−1} given τ_1..τ_level in `taus`.
    fn level(&self, taus: &mut Vec<f64>) -> Result<f64> {
        let depth = taus.len();
        let w1 = (taus[0] - 1.0) / self.rho;
        if depth == self.k - 1 {
            let a = (2.0 * self.model.zeta * w1 / self.model.omega).sqrt();
            let b = (2.0 * FrQuadratureSpec::theta(self.threshold, taus, self.rho, self.model.omega)).sqrt();
            return marcum_p1(a, b);
        }
        let upper = FrQuadratureSpec::limit(self.threshold, taus);
        if upper <= 1.0 {
            return Ok(0.0);
        }
        let opts = QuadOptions {
            abs_tol: self.spec.abs_tol,
            rel_tol: self.spec.rel_tol,
            max_intervals: self.spec.max_intervals,
        };
        let f = |tau: f64| -> Result<f64> {
            let wk = (tau - 1.0) / self.rho;
            let dens = self.f_cond(wk, w1)? / self.rho;
            taus.push(tau);
            let inner = self.level_owned(taus);
            taus.pop();
            Ok(dens * inner?)
        };
        Ok(try_integrate(f, 1.0, upper, opts)?.value)
    }

    fn level_owned(&self, taus: &[f64]) -> Result<f64> {
        let mut v = taus.to_vec();
        self.level(&mut v)
    }

    fn outer(&self) -> Result<f64> {
        if self.threshold <= 1.0 {
            return Ok(0.0);
        }
        let opts = QuadOptions {
            abs_tol: self.spec.abs_tol,
            rel_tol: self.spec.rel_tol,
            max_intervals: self.spec.max_intervals,
        };
        let f = |tau: f64| -> Result<f64> {
            let dens = self.f_w1((tau - 1.0) / self.rho) / self.rho;
            Ok(dens * self.level(&mut vec![tau])?)
        };
        Ok(try_integrate(f, 1.0, self.threshold, opts)?.value.clamp(0.0, 1.0))
    }
}

/// FR outage of a SISO channel with the surrogate model given explicitly.
pub fn outage_fr_siso_model(
    rate_r: f64,
    k_parts: usize,
    rho: f64,
    model: &CorrelatedGainModel,
    spec: &FrQuadratureSpec,
) -> Result<f64> {
    if !(rate_r >= 0.0) || !(rho > 0.0) {
        return Err(Error::domain("rate must be >= 0 and SNR > 0"));
    }
    if k_parts < 2 {
        return Err(Error::domain("the FR surrogate needs K >= 2"));
    }
    if k_parts > spec.max_parts {
        return Err(Error::Config(format!(
            "K = {k_parts} means a {}-dimensional integral; the cap is K = {}",
            k_parts - 1,
            spec.max_parts
        )));
    }
    Nested {
        k: k_parts,
        rho,
        threshold: 2f64.powf(rate_r * k_parts as f64),
        model,
        spec,
    }
    .outer()
}

/// FR outage of a SISO channel with Q = K·m elements.
pub fn outage_fr_siso(rate_r: f64, k_parts: usize, m: usize, rho: f64, spec: &FrQuadratureSpec) -> Result<f64> {
    let model = corr_coeff(k_parts * m, k_parts, m)?;
    outage_fr_siso_model(rate_r, k_parts, rho, &model, spec)
}

/// Lower bound on the FR outage: AR with K sub-slots that each use all Q
/// elements, i.e. K independent copies of the full channel.
pub fn outage_fr_bound(rate_r: f64, k_parts: usize, dims: ChannelDims, rho: f64, plan: &GilPelaezPlan) -> Result<f64> {
    if dims.is_siso() {
        outage_ar_clt(rate_r, k_parts, dims.q(), rho)
    } else {
        outage_gil_pelaez(dims, rate_r, k_parts, rho, plan)
    }
}
