//! Outage under the Gaussian (CLT) model of each sub-slot channel.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::{integrate, QuadOptions};
use crate::specfun::{lower_gamma_complex, product_shifted_exp_cdf};
use crate::specfun::ln_gamma_unchecked;

fn check(rate_r: f64, rho: f64) -> Result<()> {
    if !(rate_r >= 0.0) || !rate_r.is_finite() {
        return Err(Error::domain(format!("rate must be finite and >= 0, got {rate_r}")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("SNR must be positive, got {rho}")));
    }
    Ok(())
}

/// 1 − exp(−(2^R − 1)/(ρQ)): SISO pure-reflect outage with an exponential
/// end-to-end gain of mean Q.
pub fn outage_pr_siso(rate_r: f64, rho: f64, q: usize) -> Result<f64> {
    check(rate_r, rho)?;
    if q == 0 {
        return Err(Error::domain("Q must be positive"));
    }
    Ok(-(-(2f64.powf(rate_r) - 1.0) / (rho * q as f64)).exp_m1())
}

/// AR outage with K independent exponential sub-slot gains of mean m:
/// P{∏(1 + ρm E_k) < 2^{RK}}.
pub fn outage_ar_clt(rate_r: f64, k_parts: usize, m: usize, rho: f64) -> Result<f64> {
    check(rate_r, rho)?;
    if m == 0 {
        return Err(Error::domain("m must be positive"));
    }
    product_shifted_exp_cdf(k_parts, rho * m as f64, 2f64.powf(rate_r * k_parts as f64))
}

/// Same quantity through the upper-incomplete Fox-H representation
/// 1 − e^{K/(ρm)} H[Θ], Θ = (2^R/(ρm))^K, whose Mellin–Barnes integrand is
/// Γ(1+s, 1/(ρm))^K Θ^{−s}/s. Expanding Γ(1+s,y) = Γ(1+s) − γ(1+s,y)
/// binomially, every term containing Γ(1+s) decays fast on Re s = c; the
/// remaining γ(1+s,y)^K term is analytic for Re s > 0 and is taken on a
/// line far to the right, where it is negligible.
pub fn outage_ar_fox_h(rate_r: f64, k_parts: usize, m: usize, rho: f64) -> Result<f64> {
    check(rate_r, rho)?;
    if k_parts == 0 || m == 0 {
        return Err(Error::domain("K and m must be positive"));
    }
    if rate_r == 0.0 {
        return Ok(0.0);
    }
    let k = k_parts as i32;
    let y = 1.0 / (rho * m as f64);
    let ln_theta = k as f64 * (rate_r * std::f64::consts::LN_2 + y.ln());
    let binom: Vec<f64> = (0..=k_parts)
        .map(|j| (0..j).fold(1.0, |acc, i| acc * (k_parts - i) as f64 / (i + 1) as f64))
        .collect();
    let binom = &binom;
    let near = |c: f64| {
        move |v: f64| -> f64 {
            let s = C64::new(c, v);
            let big = ln_gamma_unchecked(s + 1.0).exp();
            let small = -lower_gamma_complex(s + 1.0, y).unwrap_or_default();
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..k_parts {
                acc += small.powi(j as i32) * big.powi(k - j as i32) * binom[j];
            }
            (acc / s * (-s * ln_theta).exp()).re
        }
    };
    let far = |c: f64| {
        move |v: f64| -> f64 {
            let s = C64::new(c, v);
            let small = -lower_gamma_complex(s + 1.0, y).unwrap_or_default();
            ((small.ln() * k as f64 - s * ln_theta).exp() / s).re
        }
    };
    // Conjugate symmetry: (1/2πi)∫ f ds = (1/π)∫₀^∞ Re f(c + jv) dv.
    let opts = QuadOptions::new(1e-13, 1e-11);
    let c = 0.25;
    let mut h = 0.0;
    let mut lo = 0.0;
    for hi in [2.0, 8.0, 20.0, 45.0] {
        h += integrate(near(c), lo, hi, opts)?.value;
        lo = hi;
    }
    let c_far = (100.0 / (rate_r * k as f64)).max(2.0);
    h += integrate(far(c_far), 0.0, 60.0, opts)?.value;
    h /= std::f64::consts::PI;
    Ok((1.0 - (k as f64 * y).exp() * h).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pr_siso_values() {
        assert_eq!(outage_pr_siso(0.0, 10.0, 60).unwrap(), 0.0);
        let v = outage_pr_siso(1.0, 100.0, 60).unwrap();
        assert!((v - 1.6665e-4).abs() < 5e-9);
        let h = outage_pr_siso(1.0, 100.0, 120).unwrap();
        assert!((v / h - 2.0).abs() < 1e-3);
    }

    #[test]
    fn single_factor_is_pr_siso() {
        for &(r, rho, q) in &[(1.0, 10.0, 60), (2.5, 3.0, 4), (0.3, 1000.0, 16)] {
            let a = outage_ar_clt(r, 1, q, rho).unwrap();
            let b = outage_pr_siso(r, rho, q).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }
    }

    #[test]
    fn fox_h_line_matches_recursive_cdf() {
        for &(r, k, m, rho) in &[(1.0, 1, 60, 10.0), (1.0, 2, 30, 10.0), (1.0, 2, 30, 100.0), (2.0, 3, 4, 10.0), (1.0, 4, 15, 31.6)] {
            let a = outage_ar_fox_h(r, k, m, rho).unwrap();
            let b = outage_ar_clt(r, k, m, rho).unwrap();
            assert!((a - b).abs() < 1e-9 + 1e-6 * b, "K={k} m={m} rho={rho}: {a} vs {b}");
        }
    }

    #[test]
    fn two_factor_decay_is_second_order() {
        let at = |rho: f64| outage_ar_clt(1.0, 2, 30, rho).unwrap() * rho * rho;
        let (a, b) = (at(1e4), at(1e5));
        assert!((a / b - 1.0).abs() < 2e-3);
    }
}
