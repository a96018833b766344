use crate::error::{Error, Result};
use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 30.0;

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// e^{−x} I0(x) · sqrt(2πx) from the large-argument expansion.
fn i0_asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * x * k);
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum
}

/// Modified Bessel function I0.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("I0 needs x >= 0, got {x}")));
    }
    if x <= SERIES_LIMIT {
        Ok(i0_series(x))
    } else {
        Ok(x.exp() * i0_asymptotic_scaled(x) / (2.0 * PI * x).sqrt())
    }
}

/// Exponentially scaled e^{−x} I0(x), finite for every x ≥ 0.
pub fn bessel_i0e(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("I0 needs x >= 0, got {x}")));
    }
    if x <= SERIES_LIMIT {
        Ok(i0_series(x) * (-x).exp())
    } else {
        Ok(i0_asymptotic_scaled(x) / (2.0 * PI * x).sqrt())
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// ln K_ν(z) for real order ν and z > 0, from the trapezoid rule on
/// K_ν(z) = ∫₀^∞ exp(−z cosh u) cosh(νu) du, evaluated in log scale.
pub fn ln_bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() || !nu.is_finite() {
        return Err(Error::domain(format!("K_nu needs finite nu and z > 0, got nu={nu}, z={z}")));
    }
    let nu = nu.abs();
    let g = |u: f64| -z * u.cosh() + ln_cosh(nu * u);
    let dg = |u: f64| -z * u.sinh() + nu * (nu * u).tanh();
    // Peak of the log-integrand by bisection on its derivative.
    let mut lo = 0.0;
    let mut hi = (nu / z).asinh() + 1.0;
    if dg(lo + 1e-12) <= 0.0 {
        hi = 0.0;
    }
    for _ in 0..200 {
        if hi - lo < 1e-14 * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if dg(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let peak_u = 0.5 * (lo + hi);
    let peak = g(peak_u);
    let curvature = (z * peak_u.cosh() - nu * nu / (nu * peak_u).cosh().powi(2)).abs().max(1e-300);
    let width = curvature.sqrt().recip().min(1.0);
    // Upper cut where the log-integrand is 60 below the peak.
    let mut upper = peak_u + width;
    while g(upper) > peak - 60.0 {
        upper += width.max(0.1);
    }
    let mut h = (width / 4.0).min(0.25);
    let sum_at = |h: f64| -> f64 {
        let n = (upper / h).ceil() as usize;
        let mut s = 0.5 * (g(0.0) - peak).exp();
        for k in 1..=n {
            s += (g(k as f64 * h) - peak).exp();
        }
        s * h
    };
    let mut prev = sum_at(h);
    for _ in 0..10 {
        h *= 0.5;
        let cur = sum_at(h);
        if (cur - prev).abs() <= 1e-14 * cur {
            return Ok(peak + cur.ln());
        }
        prev = cur;
    }
    Err(Error::accuracy("K-Bessel trapezoid did not settle", peak + prev.ln(), f64::NAN))
}

/// K_ν(z); may underflow for large z or overflow for large ν.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    ln_bessel_k(nu, z).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Periodic trapezoid rule on I0(x) = (1/π)∫₀^π e^{x cos θ} dθ.
    fn i0_integral(x: f64) -> f64 {
        let n = 400;
        let h = PI / n as f64;
        let mut s = 0.5 * (x.exp() + (-x).exp());
        for k in 1..n {
            s += (x * (k as f64 * h).cos()).exp();
        }
        s * h / PI
    }

    /// Plain 60-term power series.
    fn i0_sixty(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= (x * x / 4.0) / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn i0_reference_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        let v1 = bessel_i0(1.0).unwrap();
        assert!((v1 - 1.266_065_877_752_008_4).abs() <= 1e-12 * v1);
        let v10 = bessel_i0(10.0).unwrap();
        assert!((v10 - 2_815.716_628_466_254).abs() <= 1e-12 * v10);
        assert!(bessel_i0(-1.0).is_err());
    }

    #[test]
    fn i0_matches_oracles_across_split() {
        for &x in &[0.1, 1.0, 5.0, 10.0, 29.9, 30.1, 45.0, 80.0] {
            let v = bessel_i0(x).unwrap();
            let o = i0_integral(x);
            assert!((v - o).abs() <= 1e-12 * o, "x={x}: {v} vs {o}");
            if x <= 20.0 {
                assert!((v - i0_sixty(x)).abs() <= 1e-12 * v);
            }
            let e = bessel_i0e(x).unwrap();
            assert!((e - o * (-x).exp()).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn k_reference_values() {
        assert!((bessel_k(0.0, 1.0).unwrap() - 0.421_024_438_240_708_34).abs() < 1e-14);
        assert!((bessel_k(1.0, 1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-14);
        for &z in &[0.01, 0.7, 3.0, 40.0] {
            let exact = (PI / (2.0 * z)).sqrt() * (-z).exp();
            let v = bessel_k(0.5, z).unwrap();
            assert!((v - exact).abs() <= 1e-13 * exact, "z={z}");
        }
    }

    #[test]
    fn k_recurrence_high_order() {
        // K_{ν+1}(z) = K_{ν−1}(z) + (2ν/z) K_ν(z)
        for &z in &[0.05, 1.5, 12.0] {
            for nu in [3.0, 20.0, 59.0] {
                let lhs = ln_bessel_k(nu + 1.0, z).unwrap();
                let a = ln_bessel_k(nu - 1.0, z).unwrap();
                let b = ln_bessel_k(nu, z).unwrap() + (2.0 * nu / z).ln();
                let m = a.max(b);
                let rhs = m + ((a - m).exp() + (b - m).exp()).ln();
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "nu={nu} z={z}");
            }
        }
    }
}
