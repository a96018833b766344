//! G^{3,1}_{1,3}(x | a; b1, b2, b3) by a straight Mellin–Barnes line.
//!
//! The integrand is Γ(b1−s)Γ(b2−s)Γ(b3−s)Γ(1−a+s)x^s. When no vertical line
//! separates the two pole families (for instance b1 purely imaginary and
//! a = 1), the line is placed right of the offending b-poles and their
//! residues are added back, which reproduces the value on the proper
//! (curved) contour.

use super::gamma::ln_gamma_unchecked;
use crate::error::{Error, Result};
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Evaluation plan for the line Re s = offset, y ∈ window ± half_length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub offset: f64,
    pub half_length: f64,
    pub nodes: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourValue {
    pub value: C64,
    pub error: f64,
    pub nodes: usize,
}

const MIN_NODES: usize = 64;
const MAX_DOUBLINGS: usize = 8;

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

impl ContourSpec {
    /// Offset halfway between the rightmost a-family pole (s = a − 1) and
    /// the nearest b-pole strictly to its right (at most one unit away);
    /// b-poles level with the a-pole end up left of the line and are
    /// residue-corrected. The window is grown until the integrand is far
    /// below its peak.
    pub fn auto(a: C64, b: &[C64; 3], x: f64) -> Self {
        let pa = a.re - 1.0;
        let gap = b
            .iter()
            .map(|bj| bj.re - pa)
            .filter(|&g| g > 0.0)
            .fold(1.0f64, f64::min);
        let offset = pa + 0.5 * gap;
        let h = 0.2 * (0.5 * gap).min(0.5);
        let (lo_c, hi_c) = centre_range(b);
        let ln_x = x.ln();
        let logmag = |y: f64| log_integrand(a, b, ln_x, C64::new(offset, y)).re;
        let mut peak = f64::NEG_INFINITY;
        let mut y = lo_c;
        while y <= hi_c {
            peak = peak.max(logmag(y));
            y += 0.5;
        }
        let mut half = 4.0;
        loop {
            let edge = logmag(lo_c - half).max(logmag(hi_c + half));
            peak = peak.max(edge);
            if edge < peak - 45.0 || half > 2000.0 {
                break;
            }
            half *= 1.25;
        }
        let nodes = (((hi_c - lo_c + 2.0 * half) / h).ceil() as usize + 1).max(MIN_NODES);
        ContourSpec {
            offset,
            half_length: half,
            nodes,
            tolerance: 1e-10,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.nodes < MIN_NODES || !(self.half_length > 0.0) || !self.offset.is_finite() {
            return Err(Error::Config(format!(
                "contour plan needs tolerance > 0, nodes >= {MIN_NODES}, positive half-length; got {self:?}"
            )));
        }
        Ok(())
    }
}

fn centre_range(b: &[C64; 3]) -> (f64, f64) {
    let lo = b.iter().map(|z| z.im).fold(0.0f64, f64::min);
    let hi = b.iter().map(|z| z.im).fold(0.0f64, f64::max);
    (lo, hi)
}

#[inline]
fn log_integrand(a: C64, b: &[C64; 3], ln_x: f64, s: C64) -> C64 {
    ln_gamma_unchecked(b[0] - s)
        + ln_gamma_unchecked(b[1] - s)
        + ln_gamma_unchecked(b[2] - s)
        + ln_gamma_unchecked(1.0 - a + s)
        + s * ln_x
}

/// Residue contributions of b-poles lying left of the line.
fn crossed_residues(a: C64, b: &[C64; 3], ln_x: f64, offset: f64) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for j in 0..3 {
        if b[j].re >= offset {
            continue;
        }
        if offset - b[j].re >= 1.0 {
            return Err(Error::Config(format!(
                "line at Re s = {offset} lies more than one unit right of the pole at {}",
                b[j]
            )));
        }
        let mut ln_term = ln_gamma_or_pole(1.0 - a + b[j])? + b[j] * ln_x;
        for l in 0..3 {
            if l != j {
                ln_term += ln_gamma_or_pole(b[l] - b[j])?;
            }
        }
        total += ln_term.exp();
    }
    Ok(total)
}

fn ln_gamma_or_pole(z: C64) -> Result<C64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("coincident poles: Γ argument {z}")));
    }
    Ok(ln_gamma_unchecked(z))
}

/// Numerical G^{3,1}_{1,3}(x | a; b1, b2, b3) with a node-doubling error
/// estimate.
pub fn meijer_g_3113(b: [C64; 3], a: C64, x: f64, plan: &ContourSpec) -> Result<ContourValue> {
    plan.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("Meijer-G argument must be positive, got {x}")));
    }
    let c = plan.offset;
    for bj in &b {
        if bj.re == c {
            return Err(Error::Config(format!("contour Re s = {c} passes through the pole at {bj}")));
        }
        if is_nonpositive_integer(*bj - a + 1.0) {
            return Err(Error::Pole(format!("b = {bj} collides with an a-family pole")));
        }
    }
    if a.re - 1.0 >= c {
        return Err(Error::Config(format!(
            "a-family pole at {} is not left of the line Re s = {c}",
            a - 1.0
        )));
    }
    let ln_x = x.ln();
    let residues = crossed_residues(a, &b, ln_x, c)?;
    let (lo_c, hi_c) = centre_range(&b);
    let y0 = lo_c - plan.half_length;
    let width = hi_c - lo_c + 2.0 * plan.half_length;
    let f = |y: f64| log_integrand(a, &b, ln_x, C64::new(c, y)).exp();

    let mut nodes = plan.nodes;
    let mut h = width / (nodes - 1) as f64;
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..nodes {
        let w = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
        sum += f(y0 + k as f64 * h) * w;
    }
    let edge = f(y0).norm().max(f(y0 + width).norm()) / (2.0 * PI);
    let mut line = sum * h / (2.0 * PI);
    for _ in 0..MAX_DOUBLINGS {
        // Midpoints of the current grid refine it to h/2.
        let mut mids = C64::new(0.0, 0.0);
        for k in 0..nodes - 1 {
            mids += f(y0 + (k as f64 + 0.5) * h);
        }
        sum += mids;
        nodes = 2 * nodes - 1;
        h *= 0.5;
        let refined = sum * h / (2.0 * PI);
        let error = (refined - line).norm() + edge * width;
        line = refined;
        if error <= plan.tolerance.max(1e-15 * line.norm()) {
            return Ok(ContourValue {
                value: line + residues,
                error,
                nodes,
            });
        }
        if !line.re.is_finite() || !line.im.is_finite() {
            break;
        }
    }
    let value = line + residues;
    Err(Error::accuracy(
        "Mellin–Barnes line did not converge under node doubling",
        value.norm(),
        f64::NAN,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Gauss multiplication gives G^{3,0}_{0,3}(z | β, β+1/3, β+2/3) =
    /// (2π/√3) z^β e^{−3 z^{1/3}}; integrating against e^{−v}/v supplies
    /// the Γ(s) factor of G^{3,1}_{1,3}(x | 1; …).
    fn gauss_triplet_oracle(beta: C64, x: f64) -> C64 {
        use crate::quadrature::{integrate, QuadOptions};
        let pref = 2.0 * PI / 3f64.sqrt();
        let f = |w: f64| {
            // v = e^w
            let v = w.exp();
            ((beta * (x * v).ln()) - v - 3.0 * (x * v).cbrt()).exp() * pref
        };
        integrate(f, -250.0, 5.0, QuadOptions::new(1e-300, 1e-13)).unwrap().value
    }

    #[test]
    fn matches_gauss_multiplication_closed_form() {
        let a = c(1.0, 0.0);
        for &(beta, x) in &[(c(0.5, 0.0), 2.0), (c(1.2, -0.8), 0.3), (c(0.25, 1.5), 5.0)] {
            let b = [beta, beta + 1.0 / 3.0, beta + 2.0 / 3.0];
            let plan = ContourSpec::auto(a, &b, x);
            let v = meijer_g_3113(b, a, x, &plan).unwrap();
            let o = gauss_triplet_oracle(beta, x);
            assert!((v.value - o).norm() < 1e-10 * o.norm(), "beta={beta} x={x}: {} vs {o}", v.value);
        }
    }

    #[test]
    fn shifted_contour_equals_residue_corrected_contour() {
        // Moving the line past the pole at b1 must not change G.
        let b = [c(0.3, -0.7), c(2.0, 0.0), c(3.0, 0.0)];
        let a = c(1.0, 0.0);
        let mut left = ContourSpec::auto(a, &b, 0.8);
        left.offset = 0.15;
        let mut right = left;
        right.offset = 0.6;
        let vl = meijer_g_3113(b, a, 0.8, &left).unwrap();
        let vr = meijer_g_3113(b, a, 0.8, &right).unwrap();
        assert!((vl.value - vr.value).norm() < 1e-10 * vl.value.norm());
    }

    #[test]
    fn doubling_stays_within_error_estimate() {
        let b = [c(0.0, -1.4), c(2.0, 0.0), c(3.0, 0.0)];
        let a = c(1.0, 0.0);
        let plan = ContourSpec::auto(a, &b, 0.1);
        let v1 = meijer_g_3113(b, a, 0.1, &plan).unwrap();
        let mut finer = plan;
        finer.nodes = 2 * v1.nodes - 1;
        let v2 = meijer_g_3113(b, a, 0.1, &finer).unwrap();
        assert!((v1.value - v2.value).norm() <= v1.error.max(1e-15));
    }

    #[test]
    fn configuration_errors() {
        let b = [c(0.5, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let a = c(1.0, 0.0);
        let mut plan = ContourSpec::auto(a, &b, 1.0);
        plan.offset = 0.5;
        assert!(matches!(meijer_g_3113(b, a, 1.0, &plan), Err(Error::Config(_))));
        plan.offset = -0.2;
        assert!(matches!(meijer_g_3113(b, a, 1.0, &plan), Err(Error::Config(_))));
        plan.offset = 0.25;
        plan.nodes = 10;
        assert!(matches!(meijer_g_3113(b, a, 1.0, &plan), Err(Error::Config(_))));
        let zero = [c(0.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let p = ContourSpec::auto(a, &zero, 1.0);
        assert!(matches!(meijer_g_3113(zero, a, 1.0, &p), Err(Error::Pole(_))));
    }
}
