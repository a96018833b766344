//! Adaptive Gauss–Kronrod (7/15) quadrature over finite intervals, for real
//! or complex integrands.

use crate::error::{Error, Result};
use crate::linalg::C64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values the integrator can accumulate.
pub trait QValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    floor: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn gk15<T: QValue, F: FnMut(f64) -> Result<T>>(f: &mut F, a: f64, b: f64) -> Result<(T, f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [T::zero(); 15];
    fv[7] = f(c)?;
    for j in 0..7 {
        fv[j] = f(c - h * XGK[j])?;
        fv[14 - j] = f(c + h * XGK[j])?;
    }
    let mut kron = fv[7] * WGK[7];
    let mut gauss = fv[7] * WG[3];
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fv[7] - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).magnitude() + (fv[14 - j] - mean).magnitude());
    }
    let resasc = resasc * h.abs();
    let kron = kron * h;
    let gauss = gauss * h;
    let mut err = (kron - gauss).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if !kron.magnitude().is_finite() {
        return Err(Error::accuracy("integrand produced a non-finite value", f64::NAN, f64::INFINITY));
    }
    // Round-off floor of the segment.
    let floor = 50.0 * f64::EPSILON * kron.magnitude();
    Ok((kron, err.max(floor), floor))
}

/// Neumaier-compensated sum of pieces taken in left-to-right order.
fn ordered_sum<T: QValue>(mut pieces: Vec<Piece<T>>) -> (T, f64) {
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut sum = T::zero();
    let mut comp = T::zero();
    let mut err = 0.0;
    for p in &pieces {
        let t = sum + p.value;
        if sum.magnitude() >= p.value.magnitude() {
            comp = comp + ((sum - t) + p.value);
        } else {
            comp = comp + ((p.value - t) + sum);
        }
        sum = t;
        err += p.error;
    }
    (sum + comp, err)
}

/// Integrate a fallible integrand over [a, b].
pub fn try_integrate<T, F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral<T>>
where
    T: QValue,
    F: FnMut(f64) -> Result<T>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let (v, e, fl) = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = v;
    let mut total_err = e;
    let mut total_floor = fl;
    heap.push(Piece { a, b, value: v, error: e, floor: fl });
    loop {
        // A tolerance below the accumulated round-off floor is unattainable.
        let tol = opts.abs_tol.max(opts.rel_tol * total.magnitude()).max(2.0 * total_floor);
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            let (value, error) = ordered_sum(heap.into_vec());
            return Err(Error::accuracy(
                "adaptive quadrature hit its interval limit",
                value.magnitude(),
                error,
            ));
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            let (value, error) = ordered_sum(heap.into_vec());
            return Err(Error::accuracy("quadrature interval underflow", value.magnitude(), error));
        }
        let (v1, e1, f1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2, f2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        total_floor += f1 + f2 - worst.floor;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1, floor: f1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2, floor: f2 });
    }
    let (value, error) = ordered_sum(heap.into_vec());
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Integrate an infallible integrand over [a, b].
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral<T>>
where
    T: QValue,
    F: FnMut(f64) -> T,
{
    try_integrate(|x| Ok(f(x)), a, b, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let r = integrate(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        let r = integrate(|x: f64| (-x).exp(), 0.0, 40.0, QuadOptions::default()).unwrap();
        assert!((r.value - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, QuadOptions::new(1e-10, 1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn complex_oscillatory() {
        let r = integrate(|x: f64| C64::new(0.0, 3.0 * x).exp(), 0.0, 10.0, QuadOptions::default()).unwrap();
        let exact = (C64::new(0.0, 30.0).exp() - 1.0) / C64::new(0.0, 3.0);
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| x.cos();
        let a = integrate(f, 0.0, 1.0, QuadOptions::default()).unwrap().value;
        let b = integrate(f, 1.0, 0.0, QuadOptions::default()).unwrap().value;
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Integral<f64>> = try_integrate(|_| Err(Error::domain("x")), 0.0, 1.0, QuadOptions::default());
        assert!(r.is_err());
    }
}
