//! Declarative experiments: a flat TOML description is validated, run
//! through the Monte Carlo and analytic evaluators, and written as CSV with
//! a `#` metadata header plus a JSON companion.

mod output;
mod presets;
mod spec;

pub use output::{write_dmt_table, write_table, DmtRow, DmtTable};
pub use presets::{figure_preset, FigureOutput, PresetOverrides, PRESETS};
pub use spec::{parse_spec, AnalyticMethod, Evaluator, ExperimentSpec};

use crate::analytic::{
    outage_ar_clt, outage_fr_bound, outage_fr_siso, outage_gil_pelaez, outage_pr_siso, FrQuadratureSpec,
    GilPelaezPlan,
};
use crate::channel::{ChannelDims, SchemeConfig, SchemeKind};
use crate::error::{Error, Result};
use crate::montecarlo::{db_to_linear, estimate_outage_many, SnrGrid};
use crate::rng::RngSpec;
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = concat!("rislab ", env!("CARGO_PKG_VERSION"));

/// One output line: an SNR point of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    #[serde(rename = "R")]
    pub rate_r: f64,
    pub p_mc: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub p_analytic: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

/// Everything needed to re-run an experiment, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub name: String,
    pub seed: u64,
    pub trials: u64,
    pub status: String,
    pub notes: Vec<String>,
    pub spec: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn is_partial(&self) -> bool {
        self.metadata.status != "complete"
    }
}

/// A result plus the accuracy failure that cut it short, if any.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: ResultTable,
    pub failure: Option<Error>,
}

/// One curve of an experiment: a scheme, what to evaluate, and its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub config: SchemeConfig,
    pub mc: bool,
    pub analytic: Option<AnalyticMethod>,
}

/// Several series on one channel sharing channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub dims: ChannelDims,
    pub series: Vec<Series>,
    pub snr_db: Vec<f64>,
}

/// Concrete evaluator behind an analytic request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Resolved {
    PrSiso,
    ArClt,
    FrQuadrature,
    GilPelaez,
    FrBound,
}

fn resolve(method: AnalyticMethod, config: &SchemeConfig, dims: ChannelDims, fr: &FrQuadratureSpec) -> Result<Resolved> {
    let kind = config.kind();
    let k = config.k_parts();
    if kind == SchemeKind::Pb {
        return Err(Error::Unsupported("PB has no analytic evaluator; it is simulated only".into()));
    }
    let siso = dims.is_siso();
    let single = k == 1 || kind == SchemeKind::Pr;
    let r = match method {
        AnalyticMethod::Auto => match (kind, siso) {
            (_, true) if single => Resolved::PrSiso,
            (SchemeKind::Ar, true) => Resolved::ArClt,
            (SchemeKind::Fr, true) => Resolved::FrQuadrature,
            (SchemeKind::Fr, false) if !single => Resolved::FrBound,
            _ => Resolved::GilPelaez,
        },
        AnalyticMethod::ClosedForm => {
            if !siso {
                return Err(Error::Unsupported("closed forms are SISO only".into()));
            }
            match kind {
                _ if single => Resolved::PrSiso,
                SchemeKind::Ar => Resolved::ArClt,
                _ => Resolved::FrQuadrature,
            }
        }
        AnalyticMethod::GilPelaez => {
            if kind == SchemeKind::Fr && !single {
                return Err(Error::Unsupported("FR sub-slots are correlated; no exact inversion exists".into()));
            }
            Resolved::GilPelaez
        }
        AnalyticMethod::Bound => {
            if kind != SchemeKind::Fr {
                return Err(Error::Unsupported("the lower bound applies to FR only".into()));
            }
            Resolved::FrBound
        }
    };
    if r == Resolved::FrQuadrature && k > fr.max_parts {
        return Err(Error::Config(format!(
            "FR with K = {k} needs a {}-dimensional integral; at most K = {} is supported",
            k - 1,
            fr.max_parts
        )));
    }
    Ok(r)
}

fn analytic_value(r: Resolved, config: &SchemeConfig, dims: ChannelDims, rate: f64, rho: f64) -> Result<f64> {
    let k = config.k_parts();
    let m = config.plan().m();
    let gp = GilPelaezPlan::default();
    match r {
        Resolved::PrSiso => outage_pr_siso(rate, rho, dims.q()),
        Resolved::ArClt => outage_ar_clt(rate, k, m, rho),
        Resolved::FrQuadrature => outage_fr_siso(rate, k, m, rho, &FrQuadratureSpec::default()),
        Resolved::GilPelaez => {
            if config.kind() == SchemeKind::Pr || k == 1 {
                outage_gil_pelaez(dims, rate, 1, rho, &gp)
            } else {
                outage_gil_pelaez(dims.with_elements(m)?, rate, k, rho, &gp)
            }
        }
        Resolved::FrBound => outage_fr_bound(rate, k, dims, rho, &gp),
    }
}

/// Checks that every requested evaluator exists for its series.
pub fn validate_groups(groups: &[Group]) -> Result<()> {
    let fr = FrQuadratureSpec::default();
    for g in groups {
        SnrGrid::from_db(&g.snr_db, 1.0)?;
        for s in &g.series {
            if s.config.plan().q() != g.dims.q() {
                return Err(Error::Config(format!("series {} does not match Q = {}", s.label, g.dims.q())));
            }
            if s.config.kind() == SchemeKind::Pb && !g.dims.is_siso() {
                return Err(Error::Unsupported("PB is defined for SISO channels only".into()));
            }
            if let Some(method) = s.analytic {
                resolve(method, &s.config, g.dims, &fr)?;
            }
            if !s.mc && s.analytic.is_none() {
                return Err(Error::Config(format!("series {} has no evaluator", s.label)));
            }
        }
    }
    Ok(())
}

/// Runs the groups in order. Monte Carlo draws are shared across the series
/// of a group; group 0 uses the master seed's streams and group `i > 0` the
/// family derived with tag `i`.
/// An accuracy failure stops analytic evaluation and the rows gathered so
/// far are returned together with the error.
pub fn run_groups(groups: &[Group], rate: f64, trials: u64, seed: u64) -> Result<(Vec<ResultRow>, Option<Error>)> {
    validate_groups(groups)?;
    let fr = FrQuadratureSpec::default();
    let master = RngSpec::new(seed);
    let mut rows = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let grid = SnrGrid::from_db(&g.snr_db, rate)?;
        let rng = if gi == 0 { master } else { master.derive(gi as u64) };
        let mc_configs: Vec<SchemeConfig> = g.series.iter().filter(|s| s.mc).map(|s| s.config.clone()).collect();
        let mc = if mc_configs.is_empty() {
            Vec::new()
        } else {
            if trials == 0 {
                return Err(Error::Config("Monte Carlo needs trials >= 1".into()));
            }
            estimate_outage_many(g.dims, &mc_configs, &grid, trials, rng)?
        };
        let mut mc_index = 0;
        for s in &g.series {
            let est = if s.mc {
                mc_index += 1;
                Some(&mc[mc_index - 1])
            } else {
                None
            };
            let method = match s.analytic {
                Some(m) => Some(resolve(m, &s.config, g.dims, &fr)?),
                None => None,
            };
            for (i, &db) in g.snr_db.iter().enumerate() {
                let e = est.map(|v| &v[i]);
                let p_analytic = match method {
                    Some(r) => match analytic_value(r, &s.config, g.dims, rate, db_to_linear(db)) {
                        Ok(v) => Some(v),
                        Err(err) if err.is_accuracy() => {
                            rows.push(row(g.dims, s, db, rate, seed, e, None));
                            return Ok((rows, Some(err)));
                        }
                        Err(err) => return Err(err),
                    },
                    None => None,
                };
                rows.push(row(g.dims, s, db, rate, seed, e, p_analytic));
            }
        }
    }
    Ok((rows, None))
}

fn row(
    dims: ChannelDims,
    s: &Series,
    db: f64,
    rate: f64,
    seed: u64,
    e: Option<&crate::montecarlo::OutageEstimate>,
    p_analytic: Option<f64>,
) -> ResultRow {
    ResultRow {
        snr_db: db,
        scheme: s.label.clone(),
        n: dims.n(),
        l: dims.l(),
        q: dims.q(),
        k: s.config.k_parts(),
        m: s.config.plan().m(),
        rate_r: rate,
        p_mc: e.map(|e| e.p_hat),
        ci_low: e.map(|e| e.ci_low),
        ci_high: e.map(|e| e.ci_high),
        p_analytic,
        trials: e.map(|e| e.trials),
        seed: e.map(|_| seed),
    }
}

fn status_of(failure: &Option<Error>) -> String {
    match failure {
        None => "complete".into(),
        Some(e) => format!("partial: {e}"),
    }
}

/// Runs a validated experiment description.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    let group = spec.group()?;
    let (rows, failure) = run_groups(std::slice::from_ref(&group), spec.rate_r, spec.trials, spec.seed)?;
    let metadata = Metadata {
        tool_version: TOOL_VERSION.into(),
        name: spec.name.clone(),
        seed: spec.seed,
        trials: spec.trials,
        status: status_of(&failure),
        notes: Vec::new(),
        spec: serde_json::to_value(spec).map_err(|e| Error::Io(e.to_string()))?,
    };
    Ok(Outcome {
        table: ResultTable { metadata, rows },
        failure,
    })
}
