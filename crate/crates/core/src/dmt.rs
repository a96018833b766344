//! Diversity-multiplexing tradeoff curves at integer multiplexing gains.

use crate::channel::{ChannelDims, PartitionPlan};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Piecewise-linear DMT curve given by its vertices at r = 0, 1, …, r_max.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmtCurve {
    pub label: String,
    pub vertices: Vec<(usize, usize)>,
}

impl DmtCurve {
    fn from_fn(label: String, r_max: usize, d: impl Fn(usize) -> usize) -> Self {
        DmtCurve {
            label,
            vertices: (0..=r_max).map(|r| (r, d(r))).collect(),
        }
    }

    /// Largest multiplexing gain on the curve.
    pub fn max_r(&self) -> usize {
        self.vertices.last().map_or(0, |v| v.0)
    }

    /// Diversity gain at r = 0.
    pub fn d0(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.1)
    }

    /// Value at integer r, `None` outside the curve's domain.
    pub fn at(&self, r: usize) -> Option<usize> {
        self.vertices.get(r).map(|v| v.1)
    }

    /// Linear interpolation at real r in [0, max_r]; 0 beyond.
    pub fn eval(&self, r: f64) -> f64 {
        if !(r >= 0.0) || r >= self.max_r() as f64 {
            return 0.0;
        }
        let i = r.floor() as usize;
        let f = r - i as f64;
        let (a, b) = (self.vertices[i].1 as f64, self.vertices[i + 1].1 as f64);
        a + f * (b - a)
    }
}

impl fmt::Display for DmtCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        for (r, d) in &self.vertices {
            write!(f, " ({r},{d})")?;
        }
        Ok(())
    }
}

/// High-SNR summary of a channel: cut-set extremes, SISO coding gain and
/// the range of sub-surface sizes that reach both extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSummary {
    pub d_max: usize,
    pub r_max: usize,
    pub coding_gain: Option<f64>,
    /// Divisors m of Q with min{N,L} ≤ m ≤ |N−L|+1; often empty.
    pub partition_window: Vec<usize>,
}

/// What a given sub-surface size achieves under FR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Both,
    DiversityOnly,
    MultiplexingOnly,
    Neither,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Both => "achieves both d_max and r_max",
            Verdict::DiversityOnly => "achieves d_max only",
            Verdict::MultiplexingOnly => "achieves r_max only",
            Verdict::Neither => "achieves neither",
        })
    }
}

/// d(r) of the Rayleigh product channel for the sorted triple n0 ≤ n1 ≤ n2.
fn product_d(n: [usize; 3], r: usize) -> usize {
    let [n0, n1, n2] = n;
    let excess = (n0 + n1).saturating_sub(n2 + r);
    (n0 - r) * (n1 - r) - excess * excess / 4
}

fn pr_curve(dims: ChannelDims, label: String) -> DmtCurve {
    let s = dims.sorted();
    DmtCurve::from_fn(label, s[0], |r| product_d(s, r))
}

/// DMT of the PR scheme (the plain product channel).
pub fn dmt_pr(dims: ChannelDims) -> DmtCurve {
    pr_curve(dims, format!("PR {dims}"))
}

/// DMT of the AR scheme: K times the curve of the (N, m, L) channel.
pub fn dmt_ar(dims: ChannelDims, plan: &PartitionPlan) -> Result<DmtCurve> {
    let sub = sub_dims(dims, plan)?;
    let k = plan.k_parts();
    let s = sub.sorted();
    Ok(DmtCurve::from_fn(format!("AR {dims} K={k}"), s[0], |r| k * product_d(s, r)))
}

/// Lower bound on the FR DMT: the pointwise maximum of the AR and PR
/// curves, with PR alone past the AR domain.
pub fn dmt_fr_lower_bound(dims: ChannelDims, plan: &PartitionPlan) -> Result<DmtCurve> {
    let ar = dmt_ar(dims, plan)?;
    let pr = dmt_pr(dims);
    let label = format!("FR bound {dims} K={}", plan.k_parts());
    Ok(DmtCurve::from_fn(label, pr.max_r(), |r| {
        pr.at(r).unwrap_or(0).max(ar.at(r).unwrap_or(0))
    }))
}

/// Cut-set upper bound min{d_(N,Q)(r), d_(Q,L)(r)} with d_(a,b)(r) = (a−r)(b−r).
pub fn cutset_curve(dims: ChannelDims) -> DmtCurve {
    let (n, q, l) = (dims.n(), dims.q(), dims.l());
    let r_max = n.min(q).min(l);
    DmtCurve::from_fn(format!("cut-set {dims}"), r_max, |r| {
        ((n - r) * (q - r)).min((q - r) * (l - r))
    })
}

/// Extremes, SISO coding gain (2^R − 1)/Q and partition window.
pub fn cutset_summary(dims: ChannelDims, rate_r: f64) -> AsymptoticSummary {
    let (n, q, l) = (dims.n(), dims.q(), dims.l());
    let lo = n.min(l);
    let hi = n.abs_diff(l) + 1;
    AsymptoticSummary {
        d_max: lo * q,
        r_max: lo.min(q),
        coding_gain: dims.is_siso().then(|| (2f64.powf(rate_r) - 1.0) / q as f64),
        partition_window: (lo..=hi).filter(|m| q % m == 0).collect(),
    }
}

/// Classifies a sub-surface size m (a divisor of Q) against the window
/// min{N,L} ≤ m ≤ |N−L|+1.
pub fn check_partition_condition(dims: ChannelDims, m: usize) -> Result<Verdict> {
    if m == 0 || dims.q() % m != 0 {
        return Err(Error::domain(format!("m = {m} does not divide Q = {}", dims.q())));
    }
    let diversity = m <= dims.n().abs_diff(dims.l()) + 1;
    let multiplexing = m >= dims.n().min(dims.l());
    Ok(match (diversity, multiplexing) {
        (true, true) => Verdict::Both,
        (true, false) => Verdict::DiversityOnly,
        (false, true) => Verdict::MultiplexingOnly,
        (false, false) => Verdict::Neither,
    })
}

fn sub_dims(dims: ChannelDims, plan: &PartitionPlan) -> Result<ChannelDims> {
    if plan.q() != dims.q() {
        return Err(Error::domain(format!(
            "partition covers {} elements but the surface has {}",
            plan.q(),
            dims.q()
        )));
    }
    dims.with_elements(plan.m())
}
