use super::gamma::ln_gamma_unchecked;
use crate::error::{Error, Result};
use crate::linalg::C64;

fn check(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !(x >= 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma needs a > 0, x >= 0; got a={a}, x={x}")));
    }
    Ok(())
}

fn lower_series(a: f64, x: f64) -> f64 {
    // P(a,x) = x^a e^{−x}/Γ(a+1) Σ x^n / ((a+1)…(a+n))
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    while term > 1e-17 * sum {
        term *= x / (a + n);
        sum += term;
        n += 1.0;
    }
    let ln_pref = a * x.ln() - x - ln_gamma_unchecked(C64::new(a + 1.0, 0.0)).re;
    ln_pref.exp() * sum
}

fn upper_fraction(a: f64, x: f64) -> f64 {
    // Modified Lentz on the continued fraction for Γ(a,x).
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    let ln_pref = a * x.ln() - x - ln_gamma_unchecked(C64::new(a, 0.0)).re;
    ln_pref.exp() * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_fraction(a, x)
    })
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_fraction(a, x)
    })
}

/// Non-regularized lower incomplete gamma γ(a, y) for complex a with
/// Re a > 0 and real y ≥ 0, by its power series.
pub fn lower_gamma_complex(a: C64, y: f64) -> Result<C64> {
    if !(a.re > 0.0) || !(y >= 0.0) {
        return Err(Error::domain("lower incomplete gamma needs Re a > 0 and y >= 0"));
    }
    if y == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    // γ(a,y) = y^a e^{−y} Σ y^n / (a(a+1)…(a+n))
    let mut term = a.inv();
    let mut sum = term;
    let mut n = 1.0;
    while term.norm() > 1e-17 * sum.norm() && n < 10_000.0 {
        term = term * y / (a + n);
        sum += term;
        n += 1.0;
    }
    Ok((a * y.ln() - y).exp() * sum)
}
