//! Outage probability by Gil-Pelaez inversion of the characteristic
//! function of the slot mutual information:
//! P{I < R} = 1/2 − (1/π) ∫₀^∞ Im{[e^{−jtR} φ(t)]^K}/t dt.
//!
//! The integral is summed over panels of half the tail oscillation period
//! π/(KR). It stops either when |φ(T)|^K/T falls under `tail_tol`, or when
//! Wynn's epsilon extrapolation of the panel partial sums has settled; the
//! second exit matters when the mutual-information density jumps at zero
//! (SISO), where |φ(t)| decays only like 1/t.

use super::charfun::LemmaCharFun;
use crate::channel::ChannelDims;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::{try_integrate, QuadOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GilPelaezPlan {
    /// Absolute tolerance of each panel integral.
    pub panel_tol: f64,
    /// Truncation criterion |φ(T)|^K / T.
    pub tail_tol: f64,
    /// Agreement required between successive extrapolated sums.
    pub accel_tol: f64,
    /// Hard limit on the truncation point.
    pub max_t: f64,
    /// Largest acceptable total error estimate of the probability.
    pub max_error: f64,
}

impl Default for GilPelaezPlan {
    fn default() -> Self {
        GilPelaezPlan {
            panel_tol: 1e-12,
            tail_tol: 1e-10,
            accel_tol: 1e-10,
            max_t: 20_000.0,
            max_error: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GilPelaezResult {
    pub probability: f64,
    /// Estimated absolute error of `probability`.
    pub error: f64,
    /// Point where summation stopped.
    pub truncation_t: f64,
    /// Estimated contribution of the neglected tail.
    pub tail_bound: f64,
    /// Whether the panel sums were extrapolated.
    pub extrapolated: bool,
}

/// Wynn epsilon on a sequence of partial sums; returns the last two
/// even-column estimates on the final diagonal.
fn wynn_epsilon(s: &[f64]) -> Option<(f64, f64)> {
    let n = s.len();
    if n < 3 {
        return None;
    }
    // prev = column k−1, cur = column k
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = (s[n - 1], s[n - 2]);
    let mut col = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                return Some((cur[i + 1], cur[i + 1]));
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        col += 1;
        prev = cur;
        cur = next;
        if col % 2 == 0 && cur.len() >= 2 {
            let m = cur.len();
            if cur[m - 1].is_finite() && cur[m - 2].is_finite() {
                best = (cur[m - 1], cur[m - 2]);
            }
        }
    }
    Some(best)
}

/// P{(1/K) Σ_k I_k < R} with I_k i.i.d. copies of the mutual information of
/// `sub_dims` at SNR ρ; K = 1 gives the plain outage of `sub_dims`.
pub fn outage_gil_pelaez_detailed(
    sub_dims: ChannelDims,
    rate_r: f64,
    k_parts: usize,
    rho: f64,
    plan: &GilPelaezPlan,
) -> Result<GilPelaezResult> {
    if !(rate_r >= 0.0) || !rate_r.is_finite() {
        return Err(Error::domain(format!("rate must be finite and >= 0, got {rate_r}")));
    }
    if k_parts == 0 {
        return Err(Error::domain("K must be at least 1"));
    }
    if !(rho > 0.0) {
        return Err(Error::domain(format!("SNR must be positive, got {rho}")));
    }
    if rate_r == 0.0 {
        return Ok(GilPelaezResult {
            probability: 0.0,
            error: 0.0,
            truncation_t: 0.0,
            tail_bound: 0.0,
            extrapolated: false,
        });
    }
    let mut cf = LemmaCharFun::new(sub_dims, rho)?;
    let k = k_parts as i32;
    let panel = (PI / (k_parts as f64 * rate_r)).min(2.0);
    let opts = QuadOptions {
        abs_tol: plan.panel_tol,
        rel_tol: 0.0,
        max_intervals: 200,
    };
    let mut cf_err: f64 = 0.0;
    let mut partial = Vec::new();
    let mut sum = 0.0;
    let mut quad_err = 0.0;
    let mut a = 0.0;
    let mut prev_est: Option<f64> = None;
    let mut settled = 0;
    loop {
        let b = a + panel;
        let integrand = |t: f64| -> Result<f64> {
            let s = cf.eval(t)?;
            cf_err = cf_err.max(s.error);
            let z = (C64::new(0.0, -t * rate_r).exp() * s.value).powi(k);
            Ok(z.im / t)
        };
        let r = try_integrate(integrand, a, b, opts)?;
        sum += r.value;
        quad_err += r.error;
        partial.push(sum);
        a = b;
        let phi_t = cf.eval(a)?.value.norm().powi(k);
        let tail = phi_t / a;
        if tail < plan.tail_tol {
            return finish(sum, quad_err + tail + cf_err * a, a, tail, false, plan);
        }
        if partial.len() >= 6 {
            let window = &partial[partial.len().saturating_sub(24)..];
            if let Some((e1, e2)) = wynn_epsilon(window) {
                let change = (e1 - e2).abs().max(prev_est.map_or(f64::INFINITY, |p: f64| (e1 - p).abs()));
                prev_est = Some(e1);
                if change < plan.accel_tol {
                    settled += 1;
                    if settled >= 2 {
                        let tail_est = (e1 - sum).abs();
                        return finish(e1, quad_err + change + cf_err * a, a, tail_est, true, plan);
                    }
                } else {
                    settled = 0;
                }
            }
        }
        if a > plan.max_t {
            let p = 0.5 - sum / PI;
            return Err(Error::accuracy(
                format!("inversion integral not settled by t = {a}"),
                p,
                tail / PI,
            ));
        }
    }
}

fn finish(
    integral: f64,
    err: f64,
    t: f64,
    tail: f64,
    extrapolated: bool,
    plan: &GilPelaezPlan,
) -> Result<GilPelaezResult> {
    let raw = 0.5 - integral / PI;
    let error = err / PI;
    if error > plan.max_error || !raw.is_finite() {
        return Err(Error::accuracy("inversion integral failed its error check", raw, error));
    }
    if raw < -1e-9 {
        log::warn!("inversion gave {raw:e}, clamped to 0");
    } else if raw < 0.0 {
        log::debug!("inversion gave {raw:e}, clamped to 0");
    }
    Ok(GilPelaezResult {
        probability: raw.clamp(0.0, 1.0),
        error,
        truncation_t: t,
        tail_bound: tail / PI,
        extrapolated,
    })
}

/// Probability-only form of [`outage_gil_pelaez_detailed`].
pub fn outage_gil_pelaez(
    sub_dims: ChannelDims,
    rate_r: f64,
    k_parts: usize,
    rho: f64,
    plan: &GilPelaezPlan,
) -> Result<f64> {
    outage_gil_pelaez_detailed(sub_dims, rate_r, k_parts, rho, plan).map(|r| r.probability)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 − 1/2 + 1/3 − …
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=14)
            .map(|n| {
                s += if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
                s
            })
            .collect();
        let (e, _) = wynn_epsilon(&sums).unwrap();
        assert!((e - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn zero_rate_is_zero() {
        let d = ChannelDims::new(2, 3, 2).unwrap();
        assert_eq!(outage_gil_pelaez(d, 0.0, 1, 10.0, &GilPelaezPlan::default()).unwrap(), 0.0);
    }

    #[test]
    fn siso_single_element_closed_form() {
        // Q = 1: λ = |h g|² with P{λ < x} = 1 − 2√x K1(2√x).
        let d = ChannelDims::siso(1).unwrap();
        let rho = 10.0;
        let x: f64 = 1.0 / rho;
        let z = 2.0 * x.sqrt();
        let exact = 1.0 - z * crate::specfun::bessel_k(1.0, z).unwrap();
        let v = outage_gil_pelaez(d, 1.0, 1, rho, &GilPelaezPlan::default()).unwrap();
        assert!((v - exact).abs() < 1e-7, "{v} vs {exact}");
    }
}
