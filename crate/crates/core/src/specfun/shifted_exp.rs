use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, QuadOptions};

const OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-14,
    rel_tol: 1e-11,
    max_intervals: 400,
};

/// Beyond this many e-folds of the exponential weight the tail is dropped.
const TAIL_CUT: f64 = 45.0;

/// P{∏_{k=1..K} (1 + scale·W_k) < threshold} for i.i.d. W_k ~ Exp(1).
///
/// Recursion on K: condition on the first factor τ = 1 + scale·w and
/// integrate the (K−1)-factor CDF at threshold/τ against the exponential
/// density of w.
pub fn product_shifted_exp_cdf(k_factors: usize, scale: f64, threshold: f64) -> Result<f64> {
    if k_factors == 0 {
        return Err(Error::domain("product of zero factors"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!("scale must be positive and finite, got {scale}")));
    }
    if threshold.is_nan() {
        return Err(Error::domain("threshold is NaN"));
    }
    cdf(k_factors, scale, threshold)
}

fn cdf(k: usize, scale: f64, threshold: f64) -> Result<f64> {
    if threshold <= 1.0 {
        return Ok(0.0);
    }
    let w_max = (threshold - 1.0) / scale;
    if k == 1 {
        return Ok(-(-w_max).exp_m1());
    }
    let upper = w_max.min(TAIL_CUT);
    let inner = |w: f64| -> Result<f64> { Ok((-w).exp() * cdf(k - 1, scale, threshold / (1.0 + scale * w))?) };
    let v = try_integrate(inner, 0.0, upper, OPTS)?.value;
    Ok(v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_closed_form() {
        let (rho_m, r) = (30.0, 1.5f64);
        let v = product_shifted_exp_cdf(1, rho_m, 2f64.powf(r)).unwrap();
        let expect = 1.0 - (-(2f64.powf(r) - 1.0) / rho_m).exp();
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn empty_event_and_errors() {
        assert_eq!(product_shifted_exp_cdf(3, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(product_shifted_exp_cdf(2, 2.0, 0.5).unwrap(), 0.0);
        assert!(product_shifted_exp_cdf(0, 2.0, 3.0).is_err());
        assert!(product_shifted_exp_cdf(2, 0.0, 3.0).is_err());
    }

    #[test]
    fn two_factor_closed_form() {
        // K = 2: P = ∫₀^{w*} e^{−w}(1 − exp(−(θ/(1+sw) − 1)/s)) dw, checked
        // against a fine composite Simpson rule.
        let (s, th) = (10.0, 4.0);
        let w_max = (th - 1.0) / s;
        let n = 200_000;
        let h = w_max / n as f64;
        let f = |w: f64| (-w).exp() * (1.0 - (-(th / (1.0 + s * w) - 1.0) / s).exp());
        let mut acc = f(0.0) + f(w_max);
        for i in 1..n {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = acc * h / 3.0;
        let v = product_shifted_exp_cdf(2, s, th).unwrap();
        assert!((v - simpson).abs() < 1e-12);
    }
}
