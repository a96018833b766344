use super::{Group, Series};
use crate::channel::{ChannelDims, PartitionPlan, SchemeConfig, SchemeKind};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::path::PathBuf;
use toml::Spanned;

/// Which evaluators fill a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    Mc,
    Analytic,
    Both,
}

/// Analytic evaluator family. `Auto` picks the SISO closed forms for SISO
/// channels, Gil-Pelaez inversion for MIMO PR/AR and the lower bound for
/// MIMO FR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticMethod {
    Auto,
    ClosedForm,
    GilPelaez,
    Bound,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub scheme: SchemeKind,
    pub n: usize,
    pub q: usize,
    pub l: usize,
    pub k: usize,
    pub partition: Option<Vec<usize>>,
    pub snr_db: Vec<f64>,
    pub rate_r: f64,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub evaluator: Evaluator,
    pub analytic_method: AnalyticMethod,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<Spanned<String>>,
    scheme: Spanned<String>,
    n: Spanned<i64>,
    q: Spanned<i64>,
    l: Spanned<i64>,
    k: Option<Spanned<i64>>,
    partition: Option<Spanned<Vec<i64>>>,
    snr_db: Spanned<Vec<f64>>,
    rate: Spanned<f64>,
    trials: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    output: Option<Spanned<String>>,
    evaluator: Option<Spanned<String>>,
    analytic_method: Option<Spanned<String>>,
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T> {
        Err(Error::Spec {
            line: self.line(span),
            message: message.into(),
        })
    }

    fn count(&self, v: &Spanned<i64>, what: &str, min: i64) -> Result<usize> {
        if *v.get_ref() < min {
            return self.err(v.span(), format!("{what} must be at least {min}, got {}", v.get_ref()));
        }
        Ok(*v.get_ref() as usize)
    }
}

fn keyword<T: for<'de> Deserialize<'de>>(loc: &Locator<'_>, v: &Spanned<String>, what: &str, allowed: &str) -> Result<T> {
    let s = v.get_ref().to_ascii_lowercase();
    serde_json::from_value(serde_json::Value::String(s))
        .or_else(|_| loc.err(v.span(), format!("unknown {what} {:?}; expected one of {allowed}", v.get_ref())))
}

/// Parses and validates a flat TOML experiment description. Every error
/// carries the 1-based line it refers to.
pub fn parse_spec(text: &str, default_name: &str) -> Result<ExperimentSpec> {
    let loc = Locator { text };
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Spec {
        line: e.span().map_or(1, |s| loc.line(s)),
        message: e.message().trim().to_string(),
    })?;
    let scheme: SchemeKind = raw
        .scheme
        .get_ref()
        .parse()
        .or_else(|_| loc.err(raw.scheme.span(), format!("unknown scheme {:?}; expected pr, ar, fr or pb", raw.scheme.get_ref())))?;
    let n = loc.count(&raw.n, "n", 1)?;
    let q = loc.count(&raw.q, "q", 1)?;
    let l = loc.count(&raw.l, "l", 1)?;
    ChannelDims::new(n, q, l).or_else(|e| loc.err(raw.q.span(), e.to_string()))?;
    let k = match &raw.k {
        Some(v) => loc.count(v, "k", 1)?,
        None => 1,
    };
    if matches!(scheme, SchemeKind::Pr | SchemeKind::Pb) && k != 1 {
        let span = raw.k.as_ref().map_or(raw.scheme.span(), |v| v.span());
        return loc.err(span, format!("{scheme} uses a single sub-surface; k must be 1"));
    }
    let partition = match &raw.partition {
        Some(v) => {
            if v.get_ref().iter().any(|&x| x < 1) {
                return loc.err(v.span(), "partition labels are 1-based sub-surface indices");
            }
            Some(v.get_ref().iter().map(|&x| x as usize).collect::<Vec<_>>())
        }
        None => None,
    };
    let plan = match &partition {
        Some(labels) => PartitionPlan::from_assignment(labels, k)
            .or_else(|e| loc.err(raw.partition.as_ref().unwrap().span(), e.to_string()))?,
        None => {
            let span = raw.k.as_ref().map_or(raw.scheme.span(), |v| v.span());
            PartitionPlan::contiguous(q, k).or_else(|e| loc.err(span, e.to_string()))?
        }
    };
    if plan.q() != q {
        return loc.err(raw.partition.as_ref().unwrap().span(), format!("partition lists {} elements, q = {q}", plan.q()));
    }
    let snr = raw.snr_db.get_ref();
    if snr.is_empty() || snr.iter().any(|x| !x.is_finite()) {
        return loc.err(raw.snr_db.span(), "snr_db must be a non-empty list of finite values");
    }
    let rate = *raw.rate.get_ref();
    if !(rate >= 0.0) || !rate.is_finite() {
        return loc.err(raw.rate.span(), format!("rate must be finite and >= 0, got {rate}"));
    }
    let evaluator = match &raw.evaluator {
        Some(v) => keyword(&loc, v, "evaluator", "mc, analytic, both")?,
        None => Evaluator::Both,
    };
    let analytic_method = match &raw.analytic_method {
        Some(v) => keyword(&loc, v, "analytic_method", "auto, closed-form, gil-pelaez, bound")?,
        None => AnalyticMethod::Auto,
    };
    let wants_mc = evaluator != Evaluator::Analytic;
    let trials = match &raw.trials {
        Some(v) => {
            if wants_mc && *v.get_ref() < 1 {
                return loc.err(v.span(), format!("trials must be at least 1 for Monte Carlo, got {}", v.get_ref()));
            }
            (*v.get_ref()).max(0) as u64
        }
        None if wants_mc => return loc.err(0..0, "trials is required when the Monte Carlo evaluator is selected"),
        None => 0,
    };
    let seed = match &raw.seed {
        Some(v) if *v.get_ref() < 0 => return loc.err(v.span(), "seed must be non-negative"),
        Some(v) => *v.get_ref() as u64,
        None => 1,
    };
    let spec = ExperimentSpec {
        name: raw.name.map_or_else(|| default_name.to_string(), |v| v.into_inner()),
        scheme,
        n,
        q,
        l,
        k,
        partition,
        snr_db: snr.clone(),
        rate_r: rate,
        trials,
        seed,
        output: raw.output.map(|v| PathBuf::from(v.into_inner())),
        evaluator,
        analytic_method,
    };
    let anchor = raw.evaluator.as_ref().map_or(raw.scheme.span(), |v| v.span());
    let group = spec.group().or_else(|e| loc.err(raw.scheme.span(), e.to_string()))?;
    super::validate_groups(std::slice::from_ref(&group)).or_else(|e| loc.err(anchor, e.to_string()))?;
    Ok(spec)
}

impl ExperimentSpec {
    pub fn dims(&self) -> Result<ChannelDims> {
        ChannelDims::new(self.n, self.q, self.l)
    }

    pub fn plan(&self) -> Result<PartitionPlan> {
        match &self.partition {
            Some(labels) => PartitionPlan::from_assignment(labels, self.k),
            None => PartitionPlan::contiguous(self.q, self.k),
        }
    }

    pub fn config(&self) -> Result<SchemeConfig> {
        let plan = self.plan()?;
        Ok(match self.scheme {
            SchemeKind::Pr => SchemeConfig::pr(self.q)?,
            SchemeKind::Pb => SchemeConfig::pb(self.q)?,
            SchemeKind::Ar => SchemeConfig::ar(plan),
            SchemeKind::Fr => SchemeConfig::fr(plan),
        })
    }

    /// The single-series group this description runs.
    pub fn group(&self) -> Result<Group> {
        let config = self.config()?;
        Ok(Group {
            dims: self.dims()?,
            series: vec![Series {
                label: config.kind().to_string(),
                config,
                mc: self.evaluator != Evaluator::Analytic,
                analytic: (self.evaluator != Evaluator::Mc).then_some(self.analytic_method),
            }],
            snr_db: self.snr_db.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "scheme = \"ar\"\nn = 1\nq = 60\nl = 1\nk = 2\nsnr_db = [0, 5]\nrate = 1.0\ntrials = 1000\nseed = 4\n";

    #[test]
    fn parses_a_complete_description() {
        let s = parse_spec(GOOD, "x").unwrap();
        assert_eq!((s.scheme, s.q, s.k, s.trials, s.seed), (SchemeKind::Ar, 60, 2, 1000, 4));
        assert_eq!(s.snr_db, vec![0.0, 5.0]);
        assert_eq!(s.evaluator, Evaluator::Both);
        assert_eq!(s.name, "x");
    }

    #[test]
    fn errors_point_at_the_offending_line() {
        let bad = GOOD.replace("trials = 1000", "trials = 0");
        assert!(matches!(parse_spec(&bad, "x"), Err(Error::Spec { line: 8, .. })));
        let bad = format!("{GOOD}colour = 3\n");
        assert!(matches!(parse_spec(&bad, "x"), Err(Error::Spec { line: 10, .. })));
        let bad = GOOD.replace("k = 2", "k = 7");
        assert!(matches!(parse_spec(&bad, "x"), Err(Error::Spec { line: 5, .. })));
        let bad = GOOD.replace("\"ar\"", "\"zz\"");
        assert!(matches!(parse_spec(&bad, "x"), Err(Error::Spec { line: 1, .. })));
    }

    #[test]
    fn evaluator_must_exist_for_the_scheme() {
        let pb = "scheme = \"pb\"\nn = 1\nq = 4\nl = 1\nsnr_db = [0]\nrate = 1\nevaluator = \"analytic\"\n";
        assert!(matches!(parse_spec(pb, "x"), Err(Error::Spec { line: 7, .. })));
        let fr = "scheme = \"fr\"\nn = 1\nq = 60\nl = 1\nk = 6\nsnr_db = [0]\nrate = 1\nevaluator = \"analytic\"\n";
        assert!(parse_spec(fr, "x").is_err());
        let mc_without_trials = "scheme = \"pr\"\nn = 1\nq = 4\nl = 1\nsnr_db = [0]\nrate = 1\n";
        assert!(parse_spec(mc_without_trials, "x").is_err());
    }
}
