//! Channel geometry, Rayleigh fading draws, per-scheme RIS configurations and
//! slot mutual information.

use crate::error::{Error, Result};
use crate::linalg::{ln_det_identity_plus_gram, CMatrix, C64};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

/// Default upper bound on the number of RIS elements.
pub const DEFAULT_ELEMENT_CAP: usize = 1024;

/// The (N, Q, L) geometry: transmit antennas, RIS elements, receive antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelDims {
    n: usize,
    q: usize,
    l: usize,
}

impl ChannelDims {
    pub fn new(n: usize, q: usize, l: usize) -> Result<Self> {
        Self::with_element_cap(n, q, l, DEFAULT_ELEMENT_CAP)
    }

    pub fn with_element_cap(n: usize, q: usize, l: usize, cap: usize) -> Result<Self> {
        if n == 0 || q == 0 || l == 0 {
            return Err(Error::domain(format!("dimensions must be positive, got ({n},{q},{l})")));
        }
        if q > cap {
            return Err(Error::domain(format!("Q = {q} exceeds the element cap {cap}")));
        }
        Ok(ChannelDims { n, q, l })
    }

    pub fn siso(q: usize) -> Result<Self> {
        Self::new(1, q, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn is_siso(&self) -> bool {
        self.n == 1 && self.l == 1
    }

    /// (n0, n1, n2): the sorted (N, Q, L).
    pub fn sorted(&self) -> [usize; 3] {
        let mut s = [self.n, self.q, self.l];
        s.sort_unstable();
        s
    }

    /// nu_i = n_i − n0.
    pub fn nu(&self) -> [usize; 3] {
        let s = self.sorted();
        [0, s[1] - s[0], s[2] - s[0]]
    }

    /// Same antennas, `m` elements.
    pub fn with_elements(&self, m: usize) -> Result<Self> {
        Self::with_element_cap(self.n, m, self.l, usize::MAX)
    }
}

impl fmt::Display for ChannelDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.q, self.l)
    }
}

/// Assignment of the Q elements to K equally sized, disjoint sub-surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    k_parts: usize,
    m: usize,
    /// Zero-based sub-surface index for each element.
    assignment: Vec<usize>,
}

impl PartitionPlan {
    /// Contiguous blocks: sub-surface k holds elements (k−1)m+1 ..= km.
    pub fn contiguous(q: usize, k_parts: usize) -> Result<Self> {
        if k_parts == 0 || q == 0 || q % k_parts != 0 {
            return Err(Error::domain(format!("K = {k_parts} does not divide Q = {q}")));
        }
        let m = q / k_parts;
        Ok(PartitionPlan {
            k_parts,
            m,
            assignment: (0..q).map(|i| i / m).collect(),
        })
    }

    /// Arbitrary assignment given as one-based sub-surface labels per element.
    pub fn from_assignment(labels: &[usize], k_parts: usize) -> Result<Self> {
        let q = labels.len();
        if k_parts == 0 || q == 0 || q % k_parts != 0 {
            return Err(Error::domain(format!("K = {k_parts} does not divide Q = {q}")));
        }
        let m = q / k_parts;
        let mut counts = vec![0usize; k_parts];
        let mut assignment = Vec::with_capacity(q);
        for &lab in labels {
            if lab == 0 || lab > k_parts {
                return Err(Error::domain(format!("sub-surface label {lab} outside 1..={k_parts}")));
            }
            counts[lab - 1] += 1;
            assignment.push(lab - 1);
        }
        if counts.iter().any(|&c| c != m) {
            return Err(Error::domain("every sub-surface must hold exactly Q/K elements"));
        }
        Ok(PartitionPlan { k_parts, m, assignment })
    }

    pub fn k_parts(&self) -> usize {
        self.k_parts
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn q(&self) -> usize {
        self.assignment.len()
    }

    /// One-based sub-surface of one-based element `i`.
    pub fn part_of(&self, element: usize) -> usize {
        self.assignment[element - 1] + 1
    }

    /// One-based element indices of sub-surface `k` (one-based).
    pub fn members(&self, k: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &p)| p + 1 == k)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Pure reflection: every element on, zero phase.
    Pr,
    /// Activate-reflect: only sub-surface k is on in sub-slot k.
    Ar,
    /// Flip-reflect: sub-surface k is phase-flipped in sub-slot k.
    Fr,
    /// Passive beamforming, phases aligned to the cascaded channel.
    Pb,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Pr => "PR",
            SchemeKind::Ar => "AR",
            SchemeKind::Fr => "FR",
            SchemeKind::Pb => "PB",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PR" => Ok(SchemeKind::Pr),
            "AR" => Ok(SchemeKind::Ar),
            "FR" => Ok(SchemeKind::Fr),
            "PB" => Ok(SchemeKind::Pb),
            other => Err(Error::domain(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeConfig {
    kind: SchemeKind,
    plan: PartitionPlan,
}

impl SchemeConfig {
    pub fn pr(q: usize) -> Result<Self> {
        Ok(SchemeConfig {
            kind: SchemeKind::Pr,
            plan: PartitionPlan::contiguous(q, 1)?,
        })
    }

    pub fn pb(q: usize) -> Result<Self> {
        Ok(SchemeConfig {
            kind: SchemeKind::Pb,
            plan: PartitionPlan::contiguous(q, 1)?,
        })
    }

    pub fn ar(plan: PartitionPlan) -> Self {
        SchemeConfig { kind: SchemeKind::Ar, plan }
    }

    pub fn fr(plan: PartitionPlan) -> Self {
        SchemeConfig { kind: SchemeKind::Fr, plan }
    }

    /// Scheme with the default contiguous partition (K ignored for PR/PB).
    pub fn new(kind: SchemeKind, q: usize, k_parts: usize) -> Result<Self> {
        match kind {
            SchemeKind::Pr => Self::pr(q),
            SchemeKind::Pb => Self::pb(q),
            SchemeKind::Ar => Ok(Self::ar(PartitionPlan::contiguous(q, k_parts)?)),
            SchemeKind::Fr => Ok(Self::fr(PartitionPlan::contiguous(q, k_parts)?)),
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }
    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }
    pub fn k_parts(&self) -> usize {
        self.plan.k_parts
    }
}

/// One fading draw: H is Q×N (Tx→RIS), G is L×Q (RIS→Rx).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_mat: CMatrix,
    pub g_mat: CMatrix,
}

#[inline]
fn cn01<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl ChannelRealization {
    pub fn zeros(dims: ChannelDims) -> Self {
        ChannelRealization {
            h_mat: CMatrix::zeros(dims.q(), dims.n()),
            g_mat: CMatrix::zeros(dims.l(), dims.q()),
        }
    }

    /// Overwrite with a fresh draw: H row-major first, then G row-major.
    pub fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for z in self.h_mat.as_mut_slice() {
            *z = cn01(rng);
        }
        for z in self.g_mat.as_mut_slice() {
            *z = cn01(rng);
        }
    }

    pub fn dims(&self) -> ChannelDims {
        ChannelDims {
            n: self.h_mat.cols(),
            q: self.h_mat.rows(),
            l: self.g_mat.rows(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h_mat.is_finite() && self.g_mat.is_finite()
    }
}

/// Independent CN(0,1) entries for H then G.
pub fn draw_channel<R: Rng + ?Sized>(dims: ChannelDims, rng: &mut R) -> ChannelRealization {
    let mut r = ChannelRealization::zeros(dims);
    r.redraw(rng);
    r
}

/// Per-element amplitude and phase of one sub-slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionState {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl ReflectionState {
    /// a_i e^{jφ_i}, with the phases 0 and π mapped to exactly ±a_i.
    pub fn coefficients(&self) -> Vec<C64> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&a, &p)| {
                if p == 0.0 {
                    C64::new(a, 0.0)
                } else if p == PI {
                    C64::new(-a, 0.0)
                } else {
                    C64::from_polar(a, p)
                }
            })
            .collect()
    }
}

/// RIS configuration of sub-slot `sub_slot` (one-based).
pub fn build_reflection(
    config: &SchemeConfig,
    sub_slot: usize,
    realization: Option<&ChannelRealization>,
) -> Result<ReflectionState> {
    let k_parts = config.k_parts();
    if sub_slot == 0 || sub_slot > k_parts {
        return Err(Error::domain(format!("sub-slot {sub_slot} outside 1..={k_parts}")));
    }
    let plan = &config.plan;
    let q = plan.q();
    let in_slot = |i: usize| plan.assignment[i] + 1 == sub_slot;
    match config.kind {
        SchemeKind::Pr => Ok(ReflectionState {
            amplitudes: vec![1.0; q],
            phases: vec![0.0; q],
        }),
        SchemeKind::Ar => Ok(ReflectionState {
            amplitudes: (0..q).map(|i| if in_slot(i) { 1.0 } else { 0.0 }).collect(),
            phases: vec![0.0; q],
        }),
        SchemeKind::Fr => {
            let flips = k_parts > 2 || (k_parts == 2 && sub_slot == 2);
            Ok(ReflectionState {
                amplitudes: vec![1.0; q],
                phases: (0..q).map(|i| if flips && in_slot(i) { PI } else { 0.0 }).collect(),
            })
        }
        SchemeKind::Pb => {
            let r = realization
                .ok_or_else(|| Error::domain("passive beamforming needs the channel realization"))?;
            let d = r.dims();
            if !d.is_siso() {
                return Err(Error::Unsupported(format!(
                    "passive beamforming is defined for SISO only, got {d}"
                )));
            }
            if d.q() != q {
                return Err(Error::domain("realization and scheme disagree on Q"));
            }
            let phases = (0..q)
                .map(|i| {
                    let c = r.h_mat.get(i, 0) * r.g_mat.get(0, i);
                    (-c.arg()).rem_euclid(2.0 * PI)
                })
                .collect();
            Ok(ReflectionState {
                amplitudes: vec![1.0; q],
                phases,
            })
        }
    }
}

/// G · diag(a e^{jφ}) · H.
pub fn effective_channel(realization: &ChannelRealization, state: &ReflectionState) -> Result<CMatrix> {
    let d = realization.dims();
    if state.amplitudes.len() != d.q() || state.phases.len() != d.q() {
        return Err(Error::domain(format!(
            "reflection state has {} elements, channel has {}",
            state.amplitudes.len(),
            d.q()
        )));
    }
    let coeff = state.coefficients();
    Ok(cascade(realization, &coeff))
}

pub(crate) fn cascade(realization: &ChannelRealization, coeff: &[C64]) -> CMatrix {
    let d = realization.dims();
    let mut out = CMatrix::zeros(d.l(), d.n());
    cascade_into(realization, coeff, out.as_mut_slice());
    out
}

/// Writes G·diag(coeff)·H (L×N row-major) into `out`.
#[inline]
pub(crate) fn cascade_into(realization: &ChannelRealization, coeff: &[C64], out: &mut [C64]) {
    let (n, q, l) = (realization.h_mat.cols(), realization.h_mat.rows(), realization.g_mat.rows());
    let h = realization.h_mat.as_slice();
    let g = realization.g_mat.as_slice();
    out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    for qi in 0..q {
        let c = coeff[qi];
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        for li in 0..l {
            let gc = g[li * q + qi] * c;
            for ni in 0..n {
                out[li * n + ni] += gc * h[qi * n + ni];
            }
        }
    }
}

/// log2 det(I_L + (ρ/N)·eff·eff†) in bits per channel use.
pub fn mutual_information_subslot(eff: &CMatrix, rho: f64, n: usize) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("SNR must be a finite non-negative number, got {rho}")));
    }
    if n == 0 {
        return Err(Error::domain("transmit antenna count must be positive"));
    }
    if !eff.is_finite() {
        return Err(Error::domain("effective channel has non-finite entries"));
    }
    let mut scratch = Vec::new();
    let nats = ln_det_identity_plus_gram(eff.as_slice(), eff.rows(), eff.cols(), rho / n as f64, &mut scratch);
    Ok((nats / LN_2).max(0.0))
}

/// (1/K) Σ_k I_k over the scheme's K sub-slots.
pub fn slot_mutual_information(
    realization: &ChannelRealization,
    config: &SchemeConfig,
    rho: f64,
    n: usize,
) -> Result<f64> {
    if !realization.is_finite() {
        return Err(Error::domain("channel realization has non-finite entries"));
    }
    let k_parts = config.k_parts();
    let mut total = 0.0;
    for k in 1..=k_parts {
        let state = build_reflection(config, k, Some(realization))?;
        let eff = effective_channel(realization, &state)?;
        total += mutual_information_subslot(&eff, rho, n)?;
    }
    Ok(total / k_parts as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;

    #[test]
    fn dims_sorting_and_nu() {
        let d = ChannelDims::new(3, 2, 5).unwrap();
        assert_eq!(d.sorted(), [2, 3, 5]);
        assert_eq!(d.nu(), [0, 1, 3]);
        assert!(ChannelDims::new(0, 1, 1).is_err());
        assert!(ChannelDims::new(1, 1025, 1).is_err());
        assert!(ChannelDims::with_element_cap(1, 2000, 1, 4096).is_ok());
    }

    #[test]
    fn partition_validation() {
        assert!(PartitionPlan::contiguous(10, 3).is_err());
        let p = PartitionPlan::from_assignment(&[2, 1, 2, 1], 2).unwrap();
        assert_eq!(p.members(1), vec![2, 4]);
        assert!(PartitionPlan::from_assignment(&[1, 1, 1, 2], 2).is_err());
        assert!(PartitionPlan::from_assignment(&[1, 3], 2).is_err());
    }

    #[test]
    fn ar_activates_second_block() {
        let cfg = SchemeConfig::ar(PartitionPlan::contiguous(36, 4).unwrap());
        let s = build_reflection(&cfg, 2, None).unwrap();
        for i in 1..=36 {
            let want = if (10..=18).contains(&i) { 1.0 } else { 0.0 };
            assert_eq!(s.amplitudes[i - 1], want);
        }
        assert!(s.phases.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn fr_phase_rules() {
        let cfg2 = SchemeConfig::fr(PartitionPlan::contiguous(8, 2).unwrap());
        assert!(build_reflection(&cfg2, 1, None).unwrap().phases.iter().all(|&p| p == 0.0));
        let s22 = build_reflection(&cfg2, 2, None).unwrap();
        assert_eq!(s22.phases, vec![0.0, 0.0, 0.0, 0.0, PI, PI, PI, PI]);
        let cfg4 = SchemeConfig::fr(PartitionPlan::contiguous(36, 4).unwrap());
        let s = build_reflection(&cfg4, 3, None).unwrap();
        for i in 1..=36 {
            let want = if (19..=27).contains(&i) { PI } else { 0.0 };
            assert_eq!(s.phases[i - 1], want);
            assert_eq!(s.amplitudes[i - 1], 1.0);
        }
        assert!(build_reflection(&cfg4, 5, None).is_err());
        assert!(build_reflection(&cfg4, 0, None).is_err());
    }

    #[test]
    fn pb_needs_siso_and_aligns_phases() {
        let mut rng = RngSpec::new(1).stream(0);
        let mimo = draw_channel(ChannelDims::new(2, 4, 1).unwrap(), &mut rng);
        let cfg = SchemeConfig::pb(4).unwrap();
        assert!(matches!(build_reflection(&cfg, 1, Some(&mimo)), Err(Error::Unsupported(_))));
        let r = draw_channel(ChannelDims::siso(4).unwrap(), &mut rng);
        let s = build_reflection(&cfg, 1, Some(&r)).unwrap();
        let eff = effective_channel(&r, &s).unwrap().get(0, 0);
        let sum_abs: f64 = (0..4).map(|i| (r.h_mat.get(i, 0) * r.g_mat.get(0, i)).norm()).sum();
        assert!((eff.re - sum_abs).abs() < 1e-12 && eff.im.abs() < 1e-12);
        assert!(s.phases.iter().all(|&p| (0.0..2.0 * PI).contains(&p)));
    }

    #[test]
    fn effective_channel_trivia() {
        let mut rng = RngSpec::new(2).stream(0);
        let r = draw_channel(ChannelDims::new(2, 4, 2).unwrap(), &mut rng);
        let off = ReflectionState {
            amplitudes: vec![0.0; 4],
            phases: vec![0.0; 4],
        };
        assert_eq!(effective_channel(&r, &off).unwrap(), CMatrix::zeros(2, 2));
        let pr = build_reflection(&SchemeConfig::pr(4).unwrap(), 1, None).unwrap();
        let direct = r.g_mat.matmul(&r.h_mat).unwrap();
        assert!(effective_channel(&r, &pr).unwrap().max_abs_diff(&direct) < 1e-14);
        let bad = ReflectionState {
            amplitudes: vec![1.0; 3],
            phases: vec![0.0; 3],
        };
        assert!(effective_channel(&r, &bad).is_err());
    }

    #[test]
    fn single_element_product() {
        let h = C64::new(0.3, -1.2);
        let g = C64::new(-0.5, 0.25);
        let r = ChannelRealization {
            h_mat: CMatrix::from_vec(1, 1, vec![h]).unwrap(),
            g_mat: CMatrix::from_vec(1, 1, vec![g]).unwrap(),
        };
        let s = ReflectionState {
            amplitudes: vec![1.0],
            phases: vec![0.0],
        };
        assert_eq!(effective_channel(&r, &s).unwrap().get(0, 0), h * g);
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(mutual_information_subslot(&CMatrix::zeros(2, 3), 5.0, 3).unwrap(), 0.0);
        let one = CMatrix::from_vec(1, 1, vec![C64::new(0.6, 0.8)]).unwrap();
        assert!((mutual_information_subslot(&one, 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((mutual_information_subslot(&CMatrix::identity(2), 2.0, 2).unwrap() - 2.0).abs() < 1e-14);
        let nan = CMatrix::from_vec(1, 1, vec![C64::new(f64::NAN, 0.0)]).unwrap();
        assert!(mutual_information_subslot(&nan, 1.0, 1).is_err());
        assert!(mutual_information_subslot(&one, -1.0, 1).is_err());
    }

    #[test]
    fn slot_mi_siso_ar_matches_scalar_recomputation() {
        let mut rng = RngSpec::new(3).stream(9);
        let r = draw_channel(ChannelDims::siso(6).unwrap(), &mut rng);
        let cfg = SchemeConfig::ar(PartitionPlan::contiguous(6, 2).unwrap());
        let rho = 7.5;
        let w = |lo: usize, hi: usize| -> f64 {
            (lo..hi)
                .map(|i| r.h_mat.get(i, 0) * r.g_mat.get(0, i))
                .sum::<C64>()
                .norm_sqr()
        };
        let expect = 0.5 * ((1.0 + rho * w(0, 3)).log2() + (1.0 + rho * w(3, 6)).log2());
        let got = slot_mutual_information(&r, &cfg, rho, 1).unwrap();
        assert!((got - expect).abs() < 1e-13);
    }

    #[test]
    fn fr_relabeling_and_pr_coincidences() {
        let mut rng = RngSpec::new(4).stream(1);
        let dims = ChannelDims::new(2, 6, 3).unwrap();
        let r = draw_channel(dims, &mut rng);
        let a = SchemeConfig::fr(PartitionPlan::from_assignment(&[1, 1, 1, 2, 2, 2], 2).unwrap());
        let b = SchemeConfig::fr(PartitionPlan::from_assignment(&[2, 2, 2, 1, 1, 1], 2).unwrap());
        let ia = slot_mutual_information(&r, &a, 4.0, 2).unwrap();
        let ib = slot_mutual_information(&r, &b, 4.0, 2).unwrap();
        assert!((ia - ib).abs() < 1e-12);
        let pr = slot_mutual_information(&r, &SchemeConfig::pr(6).unwrap(), 4.0, 2).unwrap();
        let ar1 = slot_mutual_information(&r, &SchemeConfig::new(SchemeKind::Ar, 6, 1).unwrap(), 4.0, 2).unwrap();
        assert_eq!(pr, ar1);
        // FR K=2, sub-slot 1 is the PR channel.
        let s1 = build_reflection(&a, 1, None).unwrap();
        let spr = build_reflection(&SchemeConfig::pr(6).unwrap(), 1, None).unwrap();
        assert_eq!(effective_channel(&r, &s1).unwrap(), effective_channel(&r, &spr).unwrap());
    }
}
