//! Small dense complex matrices and the Hermitian log-determinant used for
//! mutual information.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::domain(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Lower triangle of the smaller Gram matrix of the r×s row-major `a`
/// (A·A† if r ≤ s, else A†·A) into `out`; returns its order.
pub fn gram_lower(a: &[C64], r: usize, s: usize, out: &mut Vec<C64>) -> usize {
    let d = r.min(s);
    out.clear();
    out.resize(d * d, C64::new(0.0, 0.0));
    if r <= s {
        for i in 0..r {
            for j in 0..=i {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..s {
                    acc += a[i * s + k] * a[j * s + k].conj();
                }
                out[i * d + j] = acc;
            }
        }
    } else {
        for i in 0..s {
            for j in 0..=i {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..r {
                    acc += a[k * s + i].conj() * a[k * s + j];
                }
                out[i * d + j] = acc;
            }
        }
    }
    d
}

/// ln det(I + c·G) for a d×d Gram matrix given by its lower triangle.
pub fn ln_det_identity_plus_scaled(g: &[C64], d: usize, c: f64, scratch: &mut Vec<C64>) -> f64 {
    match d {
        1 => (c * g[0].re).ln_1p(),
        2 => {
            let p0 = 1.0 + c * g[0].re;
            let p1 = 1.0 + c * g[3].re - c * c * g[2].norm_sqr() / p0;
            (p0 * p1.max(f64::MIN_POSITIVE)).ln()
        }
        _ => {
            scratch.clear();
            scratch.extend(g[..d * d].iter().map(|z| z * c));
            for i in 0..d {
                scratch[i * d + i] += 1.0;
            }
            cholesky_ln_det(scratch, d)
        }
    }
}

/// Natural log of det(I + c·A·A†) where `a` is r×s row-major.
///
/// Works on the smaller of the two Gram matrices (Sylvester's identity) and
/// factors it with a Cholesky decomposition, so no raw determinant is formed.
/// `scratch` is reused across calls to avoid allocation in sampling loops.
pub fn ln_det_identity_plus_gram(a: &[C64], r: usize, s: usize, c: f64, scratch: &mut Vec<C64>) -> f64 {
    if r == 1 || s == 1 {
        let e: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        return (c * e).ln_1p();
    }
    let mut g = Vec::new();
    let d = gram_lower(a, r, s, &mut g);
    ln_det_identity_plus_scaled(&g, d, c, scratch)
}

/// In-place Cholesky of a Hermitian positive definite matrix whose lower
/// triangle is stored in `m`; returns ln det.
fn cholesky_ln_det(m: &mut [C64], d: usize) -> f64 {
    let mut ln_det = 0.0;
    for j in 0..d {
        let mut diag = m[j * d + j].re;
        for k in 0..j {
            diag -= m[j * d + k].norm_sqr();
        }
        // I + PSD is at least 1 on the pivots; guard against rounding only.
        let diag = diag.max(f64::MIN_POSITIVE);
        ln_det += diag.ln();
        let l_jj = diag.sqrt();
        m[j * d + j] = C64::new(l_jj, 0.0);
        for i in (j + 1)..d {
            let mut v = m[i * d + j];
            for k in 0..j {
                v -= m[i * d + k] * m[j * d + k].conj();
            }
            m[i * d + j] = v / l_jj;
        }
    }
    ln_det
}

/// Determinant of a small square complex matrix by LU with partial pivoting.
pub fn det(m: &CMatrix) -> Result<C64> {
    if m.rows != m.cols {
        return Err(Error::domain("determinant of a non-square matrix"));
    }
    let n = m.rows;
    let mut a = m.data.clone();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .unwrap_or(col);
        if a[pivot * n + col].norm() == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in (col + 1)..n {
            let f = a[row * n + col] / p;
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ln_det_matches_explicit_2x2() {
        let a = [c(1.0, 0.5), c(-0.3, 2.0), c(0.7, -1.1), c(0.2, 0.0)];
        let g00 = a[0].norm_sqr() + a[1].norm_sqr();
        let g11 = a[2].norm_sqr() + a[3].norm_sqr();
        let g01 = a[0] * a[2].conj() + a[1] * a[3].conj();
        let cc = 3.0;
        let expect = ((1.0 + cc * g00) * (1.0 + cc * g11) - cc * cc * g01.norm_sqr()).ln();
        let mut s = Vec::new();
        let got = ln_det_identity_plus_gram(&a, 2, 2, cc, &mut s);
        assert!((got - expect).abs() < 1e-13);
    }

    #[test]
    fn ln_det_3x3_matches_lu() {
        let a: Vec<C64> = (0..12).map(|k| c((k as f64 * 1.3).cos(), (k as f64 * 0.4).sin())).collect();
        let m = CMatrix::from_vec(3, 4, a.clone()).unwrap();
        let mut g = m.matmul(&m.adjoint()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v = g.get(i, j) * 0.8 + if i == j { 1.0 } else { 0.0 };
                g.set(i, j, v);
            }
        }
        let expect = det(&g).unwrap().re.ln();
        let mut s = Vec::new();
        assert!((ln_det_identity_plus_gram(&a, 3, 4, 0.8, &mut s) - expect).abs() < 1e-12);
    }

    #[test]
    fn sylvester_sides_agree() {
        let a: Vec<C64> = (0..6).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let mut s = Vec::new();
        let wide = ln_det_identity_plus_gram(&a, 2, 3, 1.7, &mut s);
        let m = CMatrix::from_vec(2, 3, a.clone()).unwrap().adjoint();
        let tall = ln_det_identity_plus_gram(m.as_slice(), 3, 2, 1.7, &mut s);
        assert!((wide - tall).abs() < 1e-13);
    }

    #[test]
    fn det_of_permutation_and_triangular() {
        let m = CMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(det(&m).unwrap(), c(-1.0, 0.0));
        let t = CMatrix::from_vec(
            3,
            3,
            vec![c(2.0, 0.0), c(5.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 3.0), c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)],
        )
        .unwrap();
        let d = det(&t).unwrap();
        assert!((d - c(2.0, 0.0) * c(0.0, 3.0) * c(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn matmul_shape_mismatch_is_error() {
        let a = CMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
    }
}
