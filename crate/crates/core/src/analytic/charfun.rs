//! Characteristic function of the mutual information of a Rayleigh product
//! channel, φ(t) = E[exp(jt·log2 det(I + (ρ/N)·HH†))].
//!
//! The main path is the determinant of n0×n0 Meijer-G values. Each entry
//! G^{3,1}_{1,3}(N/ρ | 1; −jt/ln2, ν2+i, ν1+i+j−1)/Γ(−jt/ln2) is a
//! Mellin–Barnes integral on Re s = 1/2 with the crossed pole at
//! s = −jt/ln2 added back as a residue. Log-gamma values that do not depend
//! on t are cached per node, so a sweep over t costs one new log-gamma per
//! node.

use crate::channel::ChannelDims;
use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix, C64};
use crate::quadrature::{integrate, QuadOptions};
use crate::specfun::{ln_bessel_k, ln_gamma};
use crate::specfun::log_gamma_complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharFunSample {
    pub t: f64,
    pub value: C64,
    /// A-posteriori error estimate of `value`.
    pub error: f64,
}

const OFFSET: f64 = 0.5;
const STEP: f64 = 0.1;
/// Log-magnitude drop below the running peak at which marching stops.
const DROP: f64 = 42.0;
/// Consecutive low nodes required before marching stops.
const QUIET_NODES: usize = 25;

use crate::specfun::ln_gamma_unchecked as lng;

/// t-independent log-gamma values at one node s = 1/2 + jkh.
#[derive(Clone)]
struct NodeTerms {
    /// ln Γ(s) + s ln x
    base: C64,
    /// ln Γ(ν2 + i − s), i = 1..n0
    b2: Vec<C64>,
    /// ln Γ(ν1 + d − s), d = 1..2n0−1
    b3: Vec<C64>,
}

/// Reusable evaluator of φ(t) for one (dims, ρ).
pub struct LemmaCharFun {
    n0: usize,
    nu1: f64,
    nu2: f64,
    ln_x: f64,
    /// ln Γ(ν2+i) + ln Γ(ν1+j), row-major n0×n0
    norm: Vec<f64>,
    ln_fact_prod: f64,
    pos: Vec<Option<NodeTerms>>,
    neg: Vec<Option<NodeTerms>>,
}

impl LemmaCharFun {
    pub fn new(dims: ChannelDims, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("SNR must be positive, got {rho}")));
        }
        let [n0, _, _] = dims.sorted();
        let nu = dims.nu();
        let (nu1, nu2) = (nu[1] as f64, nu[2] as f64);
        let mut norm = Vec::with_capacity(n0 * n0);
        for i in 1..=n0 {
            for j in 1..=n0 {
                norm.push(ln_gamma(nu2 + i as f64)? + ln_gamma(nu1 + j as f64)?);
            }
        }
        let mut ln_fact_prod = 0.0;
        for z in 1..=n0 {
            ln_fact_prod += ln_gamma(z as f64)?;
        }
        Ok(LemmaCharFun {
            n0,
            nu1,
            nu2,
            ln_x: (dims.n() as f64 / rho).ln(),
            norm,
            ln_fact_prod,
            pos: Vec::new(),
            neg: Vec::new(),
        })
    }

    fn node(&mut self, k: i64) -> &NodeTerms {
        let (store, idx) = if k >= 0 {
            (&mut self.pos, k as usize)
        } else {
            (&mut self.neg, (-k) as usize)
        };
        if store.len() <= idx {
            store.resize(idx + 1, None);
        }
        if store[idx].is_none() {
            let s = C64::new(OFFSET, k as f64 * STEP);
            let n0 = self.n0;
            store[idx] = Some(NodeTerms {
                base: lng(s) + s * self.ln_x,
                b2: (1..=n0).map(|i| lng(self.nu2 + i as f64 - s)).collect(),
                b3: (1..=2 * n0 - 1).map(|d| lng(self.nu1 + d as f64 - s)).collect(),
            });
        }
        store[idx].as_ref().expect("filled above")
    }

    /// φ(t) with an error estimate.
    pub fn eval(&mut self, t: f64) -> Result<CharFunSample> {
        if !t.is_finite() {
            return Err(Error::domain("characteristic function needs a finite t"));
        }
        let n0 = self.n0;
        let tau = t / LN_2;
        let b1 = C64::new(0.0, -tau);
        let mut entries = vec![C64::new(0.0, 0.0); n0 * n0];
        let mut half = vec![C64::new(0.0, 0.0); n0 * n0];
        let mut l1 = vec![0.0f64; n0 * n0];
        if t == 0.0 {
            for i in 1..=n0 {
                for j in 1..=n0 {
                    let e = ln_gamma(self.nu2 + i as f64)? + ln_gamma(self.nu1 + (i + j - 1) as f64)?
                        - self.norm[(i - 1) * n0 + (j - 1)];
                    entries[(i - 1) * n0 + (j - 1)] = C64::new(e.exp(), 0.0);
                }
            }
            let value = det(&CMatrix::from_vec(n0, n0, entries)?)? * (-self.ln_fact_prod).exp();
            return Ok(CharFunSample { t, value, error: 0.0 });
        }
        let ln_rg = -log_gamma_complex(b1)?;
        // Residue of the crossed pole at s = b1.
        let mut residue = vec![C64::new(0.0, 0.0); n0 * n0];
        for i in 1..=n0 {
            for j in 1..=n0 {
                let lr = lng(self.nu2 + i as f64 - b1) + lng(self.nu1 + (i + j - 1) as f64 - b1) + b1 * self.ln_x
                    - self.norm[(i - 1) * n0 + (j - 1)];
                residue[(i - 1) * n0 + (j - 1)] = lr.exp();
            }
        }
        let mut peak = f64::NEG_INFINITY;
        let mut quiet_edge = [false; 2];
        let tau_node = (-tau / STEP).round() as i64;
        let norm = self.norm.clone();
        for (dir_idx, dir) in [1i64, -1].into_iter().enumerate() {
            let mut k: i64 = if dir == 1 { 0 } else { -1 };
            let mut quiet = 0usize;
            loop {
                let s = C64::new(OFFSET, k as f64 * STEP);
                let tdep = lng(b1 - s) + ln_rg;
                let nt = self.node(k);
                let mut local = f64::NEG_INFINITY;
                for i in 0..n0 {
                    for j in 0..n0 {
                        let lv = tdep + nt.base + nt.b2[i] + nt.b3[i + j] - norm[i * n0 + j];
                        local = local.max(lv.re);
                        let v = lv.exp();
                        let idx = i * n0 + j;
                        entries[idx] += v;
                        l1[idx] += v.norm();
                        if k % 2 == 0 {
                            half[idx] += v;
                        }
                    }
                }
                peak = peak.max(local);
                // The integrand has a secondary ridge near y = −τ; never
                // stop on the way to it.
                let before_ridge = (dir == -1 && k > tau_node) || (dir == 1 && k < tau_node);
                if local < peak - DROP && !before_ridge {
                    quiet += 1;
                    if quiet >= QUIET_NODES {
                        quiet_edge[dir_idx] = true;
                        break;
                    }
                } else {
                    quiet = 0;
                }
                k += dir;
                if k.unsigned_abs() > 2_000_000 {
                    break;
                }
            }
        }
        if !(quiet_edge[0] && quiet_edge[1]) {
            return Err(Error::accuracy("contour window did not close", f64::NAN, f64::INFINITY));
        }
        let scale = STEP / (2.0 * PI);
        let mut err_entries = 0.0f64;
        let mut m_full = Vec::with_capacity(n0 * n0);
        let mut m_half = Vec::with_capacity(n0 * n0);
        for idx in 0..n0 * n0 {
            let full = entries[idx] * scale;
            let coarse = half[idx] * (2.0 * scale);
            let mass = l1[idx] * scale;
            let d = (full - coarse).norm();
            // Trapezoid error on an analytic strip decays like e^{−2πd/h}, so
            // the step-h error is about the square of the relative step-2h one.
            let e = if d < 1e-3 * mass { d * d / mass } else { d };
            err_entries = err_entries.max(e + 4.0 * f64::EPSILON * mass);
            m_full.push(full + residue[idx]);
            m_half.push(coarse + residue[idx]);
        }
        let f = (-self.ln_fact_prod).exp();
        let value = det(&CMatrix::from_vec(n0, n0, m_full.clone())?)? * f;
        let max_entry = m_full.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let fact = (1..=n0).product::<usize>() as f64;
        let error = err_entries * fact * max_entry.powi(n0 as i32 - 1) * f;
        Ok(CharFunSample { t, value, error })
    }
}

/// φ(t) of the mutual information of the (N, Q, L) channel at SNR ρ.
pub fn char_fun(dims: ChannelDims, rho: f64, t: f64) -> Result<CharFunSample> {
    LemmaCharFun::new(dims, rho)?.eval(t)
}

/// Independent evaluation of φ(t) for channels with min(N, Q, L) = 1: the
/// single eigenvalue λ is a product of independent Gamma(n1) and Gamma(n2)
/// variables with density 2λ^{(n1+n2)/2−1} K_{n2−n1}(2√λ)/(Γ(n1)Γ(n2)),
/// integrated against e^{jt·log2(1+ρλ/N)} over w = ln λ.
pub fn char_fun_density(dims: ChannelDims, rho: f64, t: f64) -> Result<CharFunSample> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("SNR must be positive, got {rho}")));
    }
    let [n0, n1, n2] = dims.sorted();
    if n0 != 1 {
        return Err(Error::Unsupported(format!(
            "density path needs a single eigenvalue, got {dims}"
        )));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let ln_norm = LN_2 - ln_gamma(a)? - ln_gamma(b)?;
    let c = rho / dims.n() as f64;
    let ln_weight = |w: f64| -> Result<f64> {
        let lam = w.exp();
        Ok(ln_norm + 0.5 * (a + b) * w + ln_bessel_k(b - a, 2.0 * lam.sqrt())?)
    };
    // Bracket the support in w where λf(λ) is within e^{−45} of its peak.
    let mut peak = f64::NEG_INFINITY;
    let mut w = -10.0;
    while w <= 12.0 {
        peak = peak.max(ln_weight(w)?);
        w += 0.25;
    }
    let mut lo = -10.0;
    while ln_weight(lo)? > peak - 45.0 {
        lo -= 2.0;
    }
    let mut hi = 12.0;
    while ln_weight(hi)? > peak - 45.0 {
        hi += 0.5;
    }
    let mut failure = None;
    let f = |w: f64| -> C64 {
        match ln_weight(w) {
            Ok(lw) => {
                let phase = t * (c * w.exp()).ln_1p() / LN_2;
                C64::from_polar(lw.exp(), phase)
            }
            Err(e) => {
                failure.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let r = integrate(f, lo, hi, QuadOptions::new(1e-12, 1e-11))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CharFunSample {
        t,
        value: r.value,
        error: r.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation_at_zero() {
        for dims in [(1, 4, 1), (2, 3, 2), (3, 5, 3), (2, 60, 2), (1, 1, 1)] {
            let d = ChannelDims::new(dims.0, dims.1, dims.2).unwrap();
            let v = char_fun(d, 10.0, 0.0).unwrap().value;
            assert!((v - 1.0).norm() < 1e-12, "{d}: {v}");
        }
    }

    #[test]
    fn meijer_path_matches_density_path() {
        for &(q, rho, t) in &[(4, 10.0, 0.5), (4, 10.0, 1.0), (4, 10.0, 2.0), (16, 3.0, 1.3), (2, 100.0, 4.0)] {
            let d = ChannelDims::siso(q).unwrap();
            let a = char_fun(d, rho, t).unwrap();
            let b = char_fun_density(d, rho, t).unwrap();
            assert!((a.value - b.value).norm() < 1e-9, "Q={q} t={t}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn density_path_handles_mimo_rank_one() {
        let d = ChannelDims::new(1, 5, 3).unwrap();
        let a = char_fun(d, 4.0, 0.8).unwrap();
        let b = char_fun_density(d, 4.0, 0.8).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
        assert!(char_fun_density(ChannelDims::new(2, 3, 2).unwrap(), 1.0, 1.0).is_err());
    }

    #[test]
    fn bounded_by_one_and_conjugate_symmetric() {
        let d = ChannelDims::new(2, 3, 2).unwrap();
        let mut ev = LemmaCharFun::new(d, 10.0).unwrap();
        for &t in &[0.1, 0.7, 2.0, 5.0, 15.0, 40.0] {
            let p = ev.eval(t).unwrap();
            let m = ev.eval(-t).unwrap();
            assert!(p.value.norm() <= 1.0 + 1e-9);
            assert!((p.value - m.value.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn cached_and_fresh_evaluations_agree_bitwise() {
        let d = ChannelDims::new(2, 3, 2).unwrap();
        let mut ev = LemmaCharFun::new(d, 5.0).unwrap();
        let _ = ev.eval(3.0).unwrap();
        let cached = ev.eval(1.5).unwrap();
        let fresh = char_fun(d, 5.0, 1.5).unwrap();
        assert_eq!(cached.value, fresh.value);
    }
}
