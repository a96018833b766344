use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Correlated-Rayleigh model of the FR sub-slot channels: sub-slot 1 is
/// σX_1 and sub-slot k ≥ 2 is σ(√(1−ζ)X_k + √ζ X_1) with σ² = Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedGainModel {
    pub q: usize,
    pub zeta: f64,
    /// Elements whose reflection sign differs between two sub-slots.
    pub b: usize,
    /// Q(1 − ζ)
    pub omega: f64,
    /// Per-sub-slot gain variance, Q.
    pub sigma_sq: f64,
    /// Value of ζ as Q → ∞ with K fixed.
    pub limit: f64,
}

impl CorrelatedGainModel {
    /// Model with an explicitly chosen ζ (b and the limit are not defined
    /// and are reported as 0 and ζ).
    pub fn with_zeta(q: usize, zeta: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("Q must be positive"));
        }
        if !(0.0..1.0).contains(&zeta) {
            return Err(Error::domain(format!("ζ must lie in [0, 1), got {zeta}")));
        }
        Ok(CorrelatedGainModel {
            q,
            zeta,
            b: 0,
            omega: q as f64 * (1.0 - zeta),
            sigma_sq: q as f64,
            limit: zeta,
        })
    }
}

/// Pearson correlation of the FR sub-slot gains:
/// ζ = ((Q − 2b)² + 2Q)/(Q(Q + 2)), b = m for K = 2 and 2m for K > 2.
pub fn corr_coeff(q: usize, k_parts: usize, m: usize) -> Result<CorrelatedGainModel> {
    if k_parts < 2 {
        return Err(Error::domain("gain correlation needs at least two sub-surfaces"));
    }
    if m == 0 || k_parts * m != q {
        return Err(Error::domain(format!("K·m = {}·{} does not equal Q = {q}", k_parts, m)));
    }
    let b = if k_parts == 2 { m } else { 2 * m };
    let qf = q as f64;
    let d = qf - 2.0 * b as f64;
    let zeta = (d * d + 2.0 * qf) / (qf * (qf + 2.0));
    let kf = k_parts as f64;
    let limit = if k_parts == 2 { 0.0 } else { 1.0 - 8.0 * (kf - 2.0) / (kf * kf) };
    Ok(CorrelatedGainModel {
        q,
        zeta,
        b,
        omega: qf * (1.0 - zeta),
        sigma_sq: qf,
        limit,
    })
}
