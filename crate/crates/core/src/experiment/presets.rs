use super::output::{DmtRow, DmtTable};
use super::{run_groups, AnalyticMethod, Group, Metadata, Outcome, ResultTable, Series, TOOL_VERSION};
use crate::channel::{ChannelDims, PartitionPlan, SchemeConfig};
use crate::dmt::{check_partition_condition, cutset_curve, cutset_summary, dmt_ar, dmt_fr_lower_bound, dmt_pr, DmtCurve};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const PRESETS: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

const RATE: f64 = 1.0;
const DEFAULT_TRIALS: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 1;
const GP_NOTE: &str = "characteristic-function inversion is accurate to about 1e-10 absolute; smaller p_analytic values are at noise level";
const Q_SWEEP: [usize; 8] = [1, 2, 3, 4, 8, 16, 32, 60];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetOverrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub enum FigureOutput {
    Outage(Outcome),
    Dmt(DmtTable),
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn series(label: &str, config: SchemeConfig, mc: bool, analytic: Option<AnalyticMethod>) -> Series {
    Series {
        label: label.into(),
        config,
        mc,
        analytic,
    }
}

fn ar(q: usize, k: usize) -> Result<SchemeConfig> {
    Ok(SchemeConfig::ar(PartitionPlan::contiguous(q, k)?))
}

fn fr(q: usize, k: usize) -> Result<SchemeConfig> {
    Ok(SchemeConfig::fr(PartitionPlan::contiguous(q, k)?))
}

fn pr_sweep(snr_db: Vec<f64>) -> Result<Vec<Group>> {
    let mut groups = Vec::new();
    for nl in [1, 2] {
        for q in Q_SWEEP {
            let dims = ChannelDims::new(nl, q, nl)?;
            let mut s = vec![series("PR", SchemeConfig::pr(q)?, true, Some(AnalyticMethod::GilPelaez))];
            if dims.is_siso() {
                s.push(series("PR-approx", SchemeConfig::pr(q)?, false, Some(AnalyticMethod::ClosedForm)));
            }
            groups.push(Group {
                dims,
                series: s,
                snr_db: snr_db.clone(),
            });
        }
    }
    Ok(groups)
}

fn fig5() -> Result<(Vec<Group>, Vec<String>)> {
    let q = 60;
    let mut s = vec![series("PR", SchemeConfig::pr(q)?, true, Some(AnalyticMethod::GilPelaez))];
    for k in [2, 4] {
        s.push(series("AR", ar(q, k)?, true, Some(AnalyticMethod::GilPelaez)));
        s.push(series("AR-thm1", ar(q, k)?, false, Some(AnalyticMethod::ClosedForm)));
        s.push(series("FR", fr(q, k)?, true, Some(AnalyticMethod::ClosedForm)));
    }
    let groups = vec![Group {
        dims: ChannelDims::siso(q)?,
        series: s,
        snr_db: grid(0.0, 30.0, 2.5),
    }];
    let notes = vec![
        "SNR grid 0-30 dB in 2.5 dB steps (our choice)".into(),
        "PR and AR p_analytic: characteristic-function inversion; AR-thm1: CLT approximation; FR p_analytic: correlated-Rayleigh approximation".into(),
        GP_NOTE.into(),
    ];
    Ok((groups, notes))
}

fn fig6() -> Result<(Vec<Group>, Vec<String>)> {
    let q = 60;
    let mut s = vec![series("PR", SchemeConfig::pr(q)?, true, Some(AnalyticMethod::GilPelaez))];
    for k in [2, 4] {
        s.push(series("AR", ar(q, k)?, true, Some(AnalyticMethod::GilPelaez)));
        s.push(series("FR", fr(q, k)?, true, None));
        s.push(series("FR-bound", fr(q, k)?, false, Some(AnalyticMethod::Bound)));
    }
    let groups = vec![Group {
        dims: ChannelDims::new(2, q, 2)?,
        series: s,
        snr_db: grid(-20.0, -5.0, 1.25),
    }];
    let notes = vec![
        "SNR grid -20 to -5 dB in 1.25 dB steps (our choice; above -5 dB every series is below 1e-8)".into(),
        GP_NOTE.into(),
        "FR-bound: K independent copies of the full (2,60,2) channel".into(),
    ];
    Ok((groups, notes))
}

fn fig7() -> Result<(Vec<Group>, Vec<String>)> {
    let q = 16;
    let mut s = vec![series("PR", SchemeConfig::pr(q)?, true, Some(AnalyticMethod::GilPelaez))];
    for k in [2, 4] {
        s.push(series("AR", ar(q, k)?, true, Some(AnalyticMethod::GilPelaez)));
        s.push(series("FR", fr(q, k)?, true, Some(AnalyticMethod::ClosedForm)));
    }
    s.push(series("PB-mc-only", SchemeConfig::pb(q)?, true, None));
    let snr = grid(0.0, 25.0, 2.5);
    let groups = vec![
        Group {
            dims: ChannelDims::siso(q)?,
            series: s,
            snr_db: snr.clone(),
        },
        Group {
            dims: ChannelDims::siso(4)?,
            series: vec![series("PB-mc-only", SchemeConfig::pb(4)?, true, None)],
            snr_db: snr,
        },
    ];
    let notes = vec![
        "SNR grid 0-25 dB in 2.5 dB steps (our choice)".into(),
        "PB series are simulated only".into(),
        GP_NOTE.into(),
    ];
    Ok((groups, notes))
}

fn curve_rows(curve: &DmtCurve, dims: ChannelDims, k: usize, rows: &mut Vec<DmtRow>) {
    for &(r, d) in &curve.vertices {
        rows.push(DmtRow {
            curve: curve.label.split(' ').next().unwrap_or("").to_string(),
            n: dims.n(),
            q: dims.q(),
            l: dims.l(),
            k,
            m: dims.q() / k,
            r,
            d,
        });
    }
}

fn fig8() -> Result<DmtTable> {
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let d5 = ChannelDims::new(3, 5, 3)?;
    let d10 = ChannelDims::new(3, 10, 3)?;
    curve_rows(&dmt_pr(d5), d5, 1, &mut rows);
    curve_rows(&dmt_pr(d10), d10, 1, &mut rows);
    for k in [2, 5, 10] {
        let plan = PartitionPlan::contiguous(10, k)?;
        curve_rows(&dmt_ar(d10, &plan)?, d10, k, &mut rows);
        let mut fr = dmt_fr_lower_bound(d10, &plan)?;
        fr.label = "FR-bound".into();
        curve_rows(&fr, d10, k, &mut rows);
        notes.push(format!("m = {}: {}", 10 / k, check_partition_condition(d10, 10 / k)?));
    }
    let mut cut = cutset_curve(d10);
    cut.label = "cut-set".into();
    curve_rows(&cut, d10, 1, &mut rows);
    let s = cutset_summary(d10, RATE);
    notes.insert(0, format!("(3,10,3): d_max = {}, r_max = {}, partition window {:?}", s.d_max, s.r_max, s.partition_window));
    Ok(DmtTable {
        metadata: Metadata {
            tool_version: TOOL_VERSION.into(),
            name: "fig8".into(),
            seed: 0,
            trials: 0,
            status: "complete".into(),
            notes,
            spec: serde_json::json!({"preset": "fig8", "N": 3, "L": 3, "Q": [5, 10], "K": [1, 2, 5, 10]}),
        },
        rows,
    })
}

/// Dataset of one of the figure presets.
pub fn figure_preset(name: &str, overrides: &PresetOverrides) -> Result<FigureOutput> {
    let (groups, notes) = match name {
        "fig3" => (pr_sweep(grid(0.0, 30.0, 2.5))?, vec![
            "SNR grid 0-30 dB in 2.5 dB steps (our choice)".to_string(),
            format!("Q sweep {Q_SWEEP:?} (our choice)"),
            "PR p_analytic: characteristic-function inversion; PR-approx: SISO closed form".into(),
            GP_NOTE.into(),
        ]),
        "fig4" => (pr_sweep(vec![5.0])?, vec![
            format!("Q sweep {Q_SWEEP:?} (our choice)"),
            "PR p_analytic: characteristic-function inversion; PR-approx: SISO closed form".into(),
            GP_NOTE.into(),
        ]),
        "fig5" => fig5()?,
        "fig6" => fig6()?,
        "fig7" => fig7()?,
        "fig8" => return Ok(FigureOutput::Dmt(fig8()?)),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    let trials = overrides.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = overrides.seed.unwrap_or(DEFAULT_SEED);
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let (rows, failure) = run_groups(&groups, RATE, trials, seed)?;
    let status = match &failure {
        None => "complete".to_string(),
        Some(e) => format!("partial: {e}"),
    };
    Ok(FigureOutput::Outage(Outcome {
        table: ResultTable {
            metadata: Metadata {
                tool_version: TOOL_VERSION.into(),
                name: name.into(),
                seed,
                trials,
                status,
                notes,
                spec: serde_json::json!({"preset": name, "trials": trials, "seed": seed, "R": RATE}),
            },
            rows,
        },
        failure,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig8_is_deterministic_dmt_output() {
        let FigureOutput::Dmt(t) = figure_preset("fig8", &PresetOverrides::default()).unwrap() else {
            panic!("fig8 must be a DMT table");
        };
        let pr5: Vec<(usize, usize)> = t.rows.iter().filter(|r| r.curve == "PR" && r.q == 5).map(|r| (r.r, r.d)).collect();
        assert_eq!(pr5, vec![(0, 9), (1, 4), (2, 1), (3, 0)]);
        let fr10: Vec<&DmtRow> = t.rows.iter().filter(|r| r.curve == "FR-bound" && r.k == 10).collect();
        assert_eq!(fr10[0].d, 30);
        assert_eq!(fr10.last().unwrap().r, 3);
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        assert!(matches!(figure_preset("fig9", &PresetOverrides::default()), Err(Error::Config(_))));
    }

    #[test]
    fn grids() {
        assert_eq!(grid(0.0, 30.0, 2.5).len(), 13);
        assert_eq!(grid(-20.0, -5.0, 1.25).len(), 13);
    }
}
