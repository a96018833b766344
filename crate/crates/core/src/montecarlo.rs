//! Reproducible parallel Monte Carlo estimators.
//!
//! Trials are grouped in fixed blocks of `BLOCK` consecutive indices; each
//! trial draws from its own stream (see [`RngSpec::stream`]), blocks run on
//! the rayon pool, and block results are combined in block order. Counts are
//! integers and float moments are merged in a fixed order, so every result is
//! a pure function of (seed, trials) whatever the worker count.

use crate::analytic::CorrelatedGainModel;
use crate::channel::{build_reflection, ChannelDims, ChannelRealization, PartitionPlan, SchemeConfig, SchemeKind};
use crate::error::{Error, Result};
use crate::linalg::{gram_lower, ln_det_identity_plus_scaled, C64};
use crate::rng::{RngSpec, TrialRng};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

/// Trials per work unit.
pub const BLOCK: u64 = 4096;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Linear SNR values and the target rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    rho_values: Vec<f64>,
    rate_r: f64,
}

impl SnrGrid {
    pub fn new(rho_values: Vec<f64>, rate_r: f64) -> Result<Self> {
        if rho_values.is_empty() {
            return Err(Error::domain("SNR grid is empty"));
        }
        if rho_values.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::domain("SNR values must be positive and finite"));
        }
        if rho_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("SNR values must be strictly increasing"));
        }
        if !(rate_r >= 0.0) || !rate_r.is_finite() {
            return Err(Error::domain(format!("rate must be finite and >= 0, got {rate_r}")));
        }
        Ok(SnrGrid { rho_values, rate_r })
    }

    pub fn from_db(db: &[f64], rate_r: f64) -> Result<Self> {
        Self::new(db.iter().map(|d| db_to_linear(*d)).collect(), rate_r)
    }

    pub fn rho_values(&self) -> &[f64] {
        &self.rho_values
    }

    pub fn rate_r(&self) -> f64 {
        self.rate_r
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub outages: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: RngSpec,
}

impl OutageEstimate {
    pub fn from_counts(outages: u64, trials: u64, seed: RngSpec) -> Self {
        let (ci_low, ci_high) = wilson_interval(outages, trials);
        OutageEstimate {
            p_hat: outages as f64 / trials as f64,
            outages,
            trials,
            ci_low,
            ci_high,
            seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// Binomial standard error sqrt(p(1−p)/n).
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0).min(p) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0).max(p) };
    (lo, hi)
}

/// Run `work` on each block of trial indices in parallel and return the
/// per-block results in block order.
pub fn map_blocks<T, F>(trials: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync + Send,
{
    let n_blocks = trials.div_ceil(BLOCK);
    (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            work(start..(start + BLOCK).min(trials))
        })
        .collect()
}

/// Run `f` on a dedicated pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// A scheme reduced to what the sampling loop needs.
enum Prepared {
    /// Fixed per-sub-slot reflection coefficients.
    Fixed(Vec<Vec<C64>>),
    /// Phase-aligned beamforming (SISO).
    Beamforming,
}

fn prepare(dims: ChannelDims, config: &SchemeConfig) -> Result<Prepared> {
    if config.plan().q() != dims.q() {
        return Err(Error::domain(format!(
            "scheme is built for Q = {}, channel has Q = {}",
            config.plan().q(),
            dims.q()
        )));
    }
    if config.kind() == SchemeKind::Pb {
        if !dims.is_siso() {
            return Err(Error::Unsupported(format!("passive beamforming is SISO only, got {dims}")));
        }
        return Ok(Prepared::Beamforming);
    }
    let coeffs = (1..=config.k_parts())
        .map(|k| build_reflection(config, k, None).map(|s| s.coefficients()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared::Fixed(coeffs))
}

struct Workspace {
    real: ChannelRealization,
    cascade: Vec<C64>,
    eff: Vec<C64>,
    gram: Vec<C64>,
    scratch: Vec<C64>,
    acc: Vec<f64>,
}

/// Per-trial outage indicators of several schemes at several SNRs, all on
/// the same channel draw.
struct OutageKernel<'a> {
    dims: ChannelDims,
    schemes: Vec<Prepared>,
    rhos: &'a [f64],
    /// Outage iff Σ_k ln det(...) < ln_threshold[scheme].
    ln_threshold: Vec<f64>,
    /// Outage iff ∏_k (1 + ρ W_k) < threshold[scheme] (SISO).
    threshold: Vec<f64>,
}

impl<'a> OutageKernel<'a> {
    fn new(dims: ChannelDims, configs: &[SchemeConfig], rhos: &'a [f64], rate: f64) -> Result<Self> {
        let schemes = configs.iter().map(|c| prepare(dims, c)).collect::<Result<Vec<_>>>()?;
        let ln_threshold: Vec<f64> = configs.iter().map(|c| rate * c.k_parts() as f64 * LN_2).collect();
        let threshold = ln_threshold.iter().map(|x| x.exp()).collect();
        Ok(OutageKernel {
            dims,
            schemes,
            rhos,
            ln_threshold,
            threshold,
        })
    }

    fn workspace(&self) -> Workspace {
        Workspace {
            real: ChannelRealization::zeros(self.dims),
            cascade: vec![C64::new(0.0, 0.0); self.dims.q() * self.dims.n() * self.dims.l()],
            eff: vec![C64::new(0.0, 0.0); self.dims.n() * self.dims.l()],
            gram: Vec::new(),
            scratch: Vec::new(),
            acc: vec![0.0; self.rhos.len()],
        }
    }

    /// Draw one channel and add the outage indicators into `counts`
    /// (scheme-major, then SNR), for SNR positions where `active` holds.
    fn trial(&self, rng: &mut TrialRng, ws: &mut Workspace, counts: &mut [u64], active: &[bool]) {
        ws.real.redraw(rng);
        if self.dims.is_siso() {
            self.trial_siso(ws, counts, active);
        } else {
            self.trial_mimo(ws, counts, active);
        }
    }

    fn trial_siso(&self, ws: &mut Workspace, counts: &mut [u64], active: &[bool]) {
        let q = self.dims.q();
        let h = ws.real.h_mat.as_slice();
        let g = ws.real.g_mat.as_slice();
        for i in 0..q {
            ws.cascade[i] = h[i] * g[i];
        }
        let nr = self.rhos.len();
        for (s, scheme) in self.schemes.iter().enumerate() {
            let prod = &mut ws.acc;
            prod.iter_mut().for_each(|p| *p = 1.0);
            match scheme {
                Prepared::Beamforming => {
                    let amp: f64 = ws.cascade[..q].iter().map(|z| z.norm()).sum();
                    let w = amp * amp;
                    for (p, rho) in prod.iter_mut().zip(self.rhos) {
                        *p *= 1.0 + rho * w;
                    }
                }
                Prepared::Fixed(coeffs) => {
                    for c in coeffs {
                        let mut e = C64::new(0.0, 0.0);
                        for (ci, zi) in c.iter().zip(&ws.cascade[..q]) {
                            if ci.im == 0.0 {
                                e += zi * ci.re;
                            } else {
                                e += zi * ci;
                            }
                        }
                        let w = e.norm_sqr();
                        for (p, rho) in prod.iter_mut().zip(self.rhos) {
                            *p *= 1.0 + rho * w;
                        }
                    }
                }
            }
            let th = self.threshold[s];
            for j in 0..nr {
                if active[j] && prod[j] < th {
                    counts[s * nr + j] += 1;
                }
            }
        }
    }

    fn trial_mimo(&self, ws: &mut Workspace, counts: &mut [u64], active: &[bool]) {
        let (n, q, l) = (self.dims.n(), self.dims.q(), self.dims.l());
        let h = ws.real.h_mat.as_slice();
        let g = ws.real.g_mat.as_slice();
        // Rank-one cascade terms g_{:,i} h_{i,:} for every element.
        for i in 0..q {
            for li in 0..l {
                let gl = g[li * q + i];
                for ni in 0..n {
                    ws.cascade[(i * l + li) * n + ni] = gl * h[i * n + ni];
                }
            }
        }
        let nr = self.rhos.len();
        for (s, scheme) in self.schemes.iter().enumerate() {
            let Prepared::Fixed(coeffs) = scheme else {
                unreachable!("beamforming is rejected for MIMO at preparation")
            };
            ws.acc.iter_mut().for_each(|a| *a = 0.0);
            for c in coeffs {
                ws.eff.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                for (i, ci) in c.iter().enumerate() {
                    if ci.re == 0.0 && ci.im == 0.0 {
                        continue;
                    }
                    let term = &ws.cascade[i * l * n..(i + 1) * l * n];
                    if ci.im == 0.0 {
                        for (e, t) in ws.eff.iter_mut().zip(term) {
                            *e += t * ci.re;
                        }
                    } else {
                        for (e, t) in ws.eff.iter_mut().zip(term) {
                            *e += t * ci;
                        }
                    }
                }
                let d = gram_lower(&ws.eff, l, n, &mut ws.gram);
                for (a, rho) in ws.acc.iter_mut().zip(self.rhos) {
                    *a += ln_det_identity_plus_scaled(&ws.gram, d, rho / n as f64, &mut ws.scratch);
                }
            }
            let th = self.ln_threshold[s];
            for j in 0..nr {
                if active[j] && ws.acc[j] < th {
                    counts[s * nr + j] += 1;
                }
            }
        }
    }
}

/// Outage counts for several schemes over a grid, trial `i` contributing
/// to SNR position `j` only when `i < limits[j]`.
fn outage_counts(
    dims: ChannelDims,
    configs: &[SchemeConfig],
    rhos: &[f64],
    rate: f64,
    limits: &[u64],
    rng: RngSpec,
) -> Result<Vec<u64>> {
    let kernel = OutageKernel::new(dims, configs, rhos, rate)?;
    let total = limits.iter().copied().max().unwrap_or(0);
    let cells = configs.len() * rhos.len();
    let per_block = map_blocks(total, |range| {
        let mut ws = kernel.workspace();
        let mut counts = vec![0u64; cells];
        let mut active = vec![true; rhos.len()];
        for t in range {
            for (a, lim) in active.iter_mut().zip(limits) {
                *a = t < *lim;
            }
            let mut stream = rng.stream(t);
            kernel.trial(&mut stream, &mut ws, &mut counts, &active);
        }
        counts
    });
    let mut counts = vec![0u64; cells];
    for block in per_block {
        for (c, b) in counts.iter_mut().zip(block) {
            *c += b;
        }
    }
    Ok(counts)
}

/// Outage estimates of several schemes on common channel draws: result is
/// indexed [scheme][snr].
pub fn estimate_outage_many(
    dims: ChannelDims,
    configs: &[SchemeConfig],
    grid: &SnrGrid,
    trials: u64,
    rng: RngSpec,
) -> Result<Vec<Vec<OutageEstimate>>> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let rhos = grid.rho_values();
    let limits = vec![trials; rhos.len()];
    let counts = outage_counts(dims, configs, rhos, grid.rate_r(), &limits, rng)?;
    Ok(counts
        .chunks(rhos.len())
        .map(|row| row.iter().map(|&c| OutageEstimate::from_counts(c, trials, rng)).collect())
        .collect())
}

/// Outage probability P{I < R} of one scheme at each SNR of the grid.
pub fn estimate_outage(
    dims: ChannelDims,
    config: &SchemeConfig,
    grid: &SnrGrid,
    trials: u64,
    rng: RngSpec,
) -> Result<Vec<OutageEstimate>> {
    let mut all = estimate_outage_many(dims, std::slice::from_ref(config), grid, trials, rng)?;
    Ok(all.remove(0))
}

/// Pearson correlation estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub r: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Running co-moments of a pair, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct CoMoments {
    n: f64,
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl CoMoments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mx;
        let dy = y - self.my;
        self.mx += dx / self.n;
        self.my += dy / self.n;
        self.sxx += dx * (x - self.mx);
        self.syy += dy * (y - self.my);
        self.sxy += dx * (y - self.my);
    }

    fn merge(&mut self, o: &CoMoments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let dx = o.mx - self.mx;
        let dy = o.my - self.my;
        let f = self.n * o.n / n;
        self.sxx += o.sxx + dx * dx * f;
        self.syy += o.syy + dy * dy * f;
        self.sxy += o.sxy + dx * dy * f;
        self.mx += dx * o.n / n;
        self.my += dy * o.n / n;
        self.n = n;
    }

    fn pearson(&self) -> f64 {
        self.sxy / (self.sxx * self.syy).sqrt()
    }
}

/// Sample Pearson correlation of the FR sub-slot gains W_k and W_l of a
/// SISO channel. The standard error comes from the spread of per-block
/// estimates (batch means).
pub fn estimate_correlation(
    dims: ChannelDims,
    plan: &PartitionPlan,
    sub_slots: (usize, usize),
    trials: u64,
    rng: RngSpec,
) -> Result<CorrelationEstimate> {
    let (k, l) = sub_slots;
    if k == l {
        return Err(Error::domain("correlation needs two distinct sub-slots"));
    }
    if !dims.is_siso() {
        return Err(Error::Unsupported("gain correlation is defined for SISO channels".into()));
    }
    if trials < 2 {
        return Err(Error::domain("correlation needs at least 2 trials"));
    }
    let config = SchemeConfig::fr(plan.clone());
    let ck = build_reflection(&config, k, None)?.coefficients();
    let cl = build_reflection(&config, l, None)?.coefficients();
    if ck.len() != dims.q() {
        return Err(Error::domain("partition and channel disagree on Q"));
    }
    let blocks = map_blocks(trials, |range| {
        let mut real = ChannelRealization::zeros(dims);
        let mut m = CoMoments::default();
        for t in range {
            real.redraw(&mut rng.stream(t));
            let h = real.h_mat.as_slice();
            let g = real.g_mat.as_slice();
            let mut ek = C64::new(0.0, 0.0);
            let mut el = C64::new(0.0, 0.0);
            for i in 0..h.len() {
                let z = h[i] * g[i];
                ek += z * ck[i].re;
                el += z * cl[i].re;
            }
            m.push(ek.norm_sqr(), el.norm_sqr());
        }
        m
    });
    let mut total = CoMoments::default();
    for b in &blocks {
        total.merge(b);
    }
    let r = total.pearson();
    let full: Vec<f64> = blocks.iter().filter(|b| b.n == BLOCK as f64).map(|b| b.pearson()).collect();
    let std_error = if full.len() >= 10 {
        let nb = full.len() as f64;
        let mean = full.iter().sum::<f64>() / nb;
        let var = full.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nb - 1.0);
        (var / nb).sqrt()
    } else {
        (1.0 - r * r) / (total.n - 1.0).sqrt()
    };
    Ok(CorrelationEstimate { r, std_error, trials })
}

/// Outage of the correlated-Rayleigh surrogate of the FR scheme: W_1 = Q|X_1|²,
/// W_k = Q|√(1−ζ)X_k + √ζ X_1|², outage iff ∏(1+ρW_k) < 2^{RK}.
pub fn estimate_surrogate_outage(
    model: &CorrelatedGainModel,
    k_parts: usize,
    grid: &SnrGrid,
    trials: u64,
    rng: RngSpec,
) -> Result<Vec<OutageEstimate>> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if k_parts == 0 {
        return Err(Error::domain("K must be at least 1"));
    }
    let rhos = grid.rho_values();
    let threshold = 2f64.powf(grid.rate_r() * k_parts as f64);
    let sigma = (model.q as f64).sqrt();
    let (a, b) = ((1.0 - model.zeta).sqrt(), model.zeta.sqrt());
    let blocks = map_blocks(trials, |range| {
        let mut counts = vec![0u64; rhos.len()];
        let mut prod = vec![1.0; rhos.len()];
        for t in range {
            let mut s = rng.stream(t);
            let mut cn = || {
                let re: f64 = s.sample(StandardNormal);
                let im: f64 = s.sample(StandardNormal);
                C64::new(re, im) * FRAC_1_SQRT_2
            };
            prod.iter_mut().for_each(|p| *p = 1.0);
            let x1 = cn();
            for k in 0..k_parts {
                let hk = if k == 0 { x1 } else { cn() * a + x1 * b } * sigma;
                let w = hk.norm_sqr();
                for (p, rho) in prod.iter_mut().zip(rhos) {
                    *p *= 1.0 + rho * w;
                }
            }
            for (c, p) in counts.iter_mut().zip(&prod) {
                if *p < threshold {
                    *c += 1;
                }
            }
        }
        counts
    });
    let mut counts = vec![0u64; rhos.len()];
    for b in blocks {
        for (c, x) in counts.iter_mut().zip(b) {
            *c += x;
        }
    }
    Ok(counts.into_iter().map(|c| OutageEstimate::from_counts(c, trials, rng)).collect())
}

/// Trials per SNR point for slope estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrialSchedule {
    Fixed(u64),
    PerPoint(Vec<u64>),
}

impl TrialSchedule {
    fn limits(&self, points: usize) -> Result<Vec<u64>> {
        let v = match self {
            TrialSchedule::Fixed(n) => vec![*n; points],
            TrialSchedule::PerPoint(v) => {
                if v.len() != points {
                    return Err(Error::domain(format!("schedule has {} entries for {points} SNR points", v.len())));
                }
                v.clone()
            }
        };
        if v.iter().any(|&n| n == 0) {
            return Err(Error::domain("every SNR point needs at least one trial"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub snr_db: f64,
    pub estimate: OutageEstimate,
    /// p_hat > 10 / trials.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: Vec<SlopePoint>,
}

/// Ordinary least squares y = a + b x; returns (b, a, rms residual).
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Slope of −log10 p̂ against log10 ρ over an SNR window.
pub fn estimate_dmt_slope(
    dims: ChannelDims,
    config: &SchemeConfig,
    rate_r: f64,
    window_db: &[f64],
    schedule: &TrialSchedule,
    rng: RngSpec,
) -> Result<SlopeFit> {
    if window_db.len() < 3 {
        return Err(Error::domain("slope window needs at least 3 SNR points"));
    }
    let grid = SnrGrid::from_db(window_db, rate_r)?;
    let limits = schedule.limits(window_db.len())?;
    let counts = outage_counts(dims, std::slice::from_ref(config), grid.rho_values(), rate_r, &limits, rng)?;
    let points: Vec<SlopePoint> = window_db
        .iter()
        .zip(counts.iter().zip(&limits))
        .map(|(&db, (&c, &n))| {
            let estimate = OutageEstimate::from_counts(c, n, rng);
            SlopePoint {
                snr_db: db,
                valid: estimate.p_hat > 10.0 / n as f64,
                estimate,
            }
        })
        .collect();
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.valid)
        .map(|p| (p.snr_db / 10.0, -p.estimate.p_hat.log10()))
        .collect();
    if xy.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} of {} SNR points pass the 10-event guard",
            xy.len(),
            points.len()
        )));
    }
    let (slope, intercept, residual_rms) = fit_line(&xy);
    Ok(SlopeFit {
        slope,
        intercept,
        residual_rms,
        points,
    })
}
