use crate::error::{Error, Result};
use crate::linalg::C64;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k(2k−1)) for k = 1..10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const STIRLING_RADIUS: f64 = 17.0;

fn stirling(z: C64) -> C64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        series = series * inv2 + *c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series * inv
}

/// Complex log-gamma, the analytic continuation of ln Γ with its branch cut
/// on the negative real axis; satisfies lnΓ(z+1) = lnΓ(z) + ln z with the
/// principal logarithm.
pub fn log_gamma_complex(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("log-gamma of non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("Γ has a pole at {}", z.re)));
    }
    Ok(ln_gamma_unchecked(z))
}

#[inline]
pub(crate) fn ln_gamma_unchecked(z: C64) -> C64 {
    if z.re >= 0.5 && z.norm_sqr() >= STIRLING_RADIUS * STIRLING_RADIUS {
        return stirling(z);
    }
    // Shift right until Stirling is accurate, peeling off ln(z+k).
    let mut shifted = z;
    let mut correction = C64::new(0.0, 0.0);
    while shifted.re < 0.5 || shifted.norm_sqr() < STIRLING_RADIUS * STIRLING_RADIUS {
        correction += shifted.ln();
        shifted += 1.0;
    }
    stirling(shifted) - correction
}

/// 1/Γ(z), an entire function: exactly zero on the poles of Γ.
pub fn reciprocal_gamma(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return C64::new(0.0, 0.0);
    }
    (-ln_gamma_unchecked(z)).exp()
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("real log-gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(C64::new(x, 0.0)).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Lanczos approximation (g = 7, n = 9) with reflection, as an
    /// independent oracle.
    fn lanczos(z: C64) -> C64 {
        const G: f64 = 7.0;
        const COEF: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z.re < 0.5 {
            // Γ(z)Γ(1−z) = π / sin(πz)
            return C64::new(PI, 0.0).ln() - (z * PI).sin().ln() - lanczos(1.0 - z);
        }
        let z = z - 1.0;
        let mut x = C64::new(COEF[0], 0.0);
        for (i, c) in COEF.iter().enumerate().skip(1) {
            x += *c / (z + i as f64);
        }
        let t = z + G + 0.5;
        HALF_LN_2PI + (z + 0.5) * t.ln() - t + x.ln()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        // Imaginary parts may differ by 2πk between branch conventions;
        // compare Γ values through exp when the real part is moderate.
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn known_values() {
        assert!(log_gamma_complex(C64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma_complex(C64::new(0.5, 0.0)).unwrap();
        assert!((half.re - 0.5 * PI.ln()).abs() < 3e-14 && half.im == 0.0);
        let lf = ln_gamma(11.0).unwrap();
        assert!((lf - 3_628_800f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn lanczos_cross_check() {
        for &(re, im) in &[(1.0, 1.0), (2.5, -3.0), (0.7, 10.0), (4.0, 0.3), (1.5, 25.0), (12.0, -7.0)] {
            let z = C64::new(re, im);
            let a = log_gamma_complex(z).unwrap();
            let b = lanczos(z);
            assert!(close(a, b, 1e-12), "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn recurrence_defines_branch() {
        for &(re, im) in &[(-3.3, 0.4), (-0.5, -2.0), (-10.2, 5.0), (0.25, -0.1)] {
            let z = C64::new(re, im);
            let lhs = log_gamma_complex(z + 1.0).unwrap();
            let rhs = log_gamma_complex(z).unwrap() + z.ln();
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn reflection_magnitude() {
        // |Γ(iy)|² = π / (y sinh πy)
        for &y in &[0.3, 1.0, 4.0] {
            let g = log_gamma_complex(C64::new(0.0, y)).unwrap();
            let expect = 0.5 * (PI / (y * (PI * y).sinh())).ln();
            assert!((g.re - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn poles() {
        assert!(matches!(log_gamma_complex(C64::new(0.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(log_gamma_complex(C64::new(-4.0, 0.0)), Err(Error::Pole(_))));
        assert_eq!(reciprocal_gamma(C64::new(-2.0, 0.0)), C64::new(0.0, 0.0));
        assert!((reciprocal_gamma(C64::new(3.0, 0.0)).re - 0.5).abs() < 1e-15);
    }
}
