use super::{Metadata, ResultTable};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const RESULT_COLUMNS: [&str; 14] = [
    "snr_db", "scheme", "N", "L", "Q", "K", "m", "R", "p_mc", "ci_low", "ci_high", "p_analytic", "trials", "seed",
];

/// One vertex of a DMT curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmtRow {
    pub curve: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    pub r: usize,
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmtTable {
    pub metadata: Metadata,
    pub rows: Vec<DmtRow>,
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

fn opt_u(v: Option<u64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn header(meta: &Metadata) -> Result<String> {
    let mut s = String::new();
    let spec = serde_json::to_string(&meta.spec).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(s, "# tool: {}", meta.tool_version).unwrap();
    writeln!(s, "# name: {}", meta.name).unwrap();
    writeln!(s, "# seed: {}", meta.seed).unwrap();
    writeln!(s, "# trials: {}", meta.trials).unwrap();
    writeln!(s, "# status: {}", meta.status).unwrap();
    for n in &meta.notes {
        writeln!(s, "# note: {n}").unwrap();
    }
    writeln!(s, "# spec: {spec}").unwrap();
    Ok(s)
}

/// CSV text of a result table, `#` header first.
pub fn result_csv(table: &ResultTable) -> Result<String> {
    let mut s = header(&table.metadata)?;
    s.push_str(&RESULT_COLUMNS.join(","));
    s.push('\n');
    for r in &table.rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.scheme,
            r.n,
            r.l,
            r.q,
            r.k,
            r.m,
            r.rate_r,
            opt_f(r.p_mc),
            opt_f(r.ci_low),
            opt_f(r.ci_high),
            opt_f(r.p_analytic),
            opt_u(r.trials),
            opt_u(r.seed)
        )
        .unwrap();
    }
    Ok(s)
}

/// CSV text of a DMT table.
pub fn dmt_csv(table: &DmtTable) -> Result<String> {
    let mut s = header(&table.metadata)?;
    s.push_str("curve,N,Q,L,K,m,r,d\n");
    for r in &table.rows {
        writeln!(s, "{},{},{},{},{},{},{},{}", r.curve, r.n, r.q, r.l, r.k, r.m, r.r, r.d).unwrap();
    }
    Ok(s)
}

fn companion(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_pair<T: Serialize>(path: &Path, csv: String, value: &T) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, csv)?;
    let json_path = companion(path);
    let mut json = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    json.push('\n');
    std::fs::write(&json_path, json)?;
    Ok(vec![path.to_path_buf(), json_path])
}

/// Writes `path` (CSV) and the same name with a `.json` extension.
pub fn write_table(table: &ResultTable, path: &Path) -> Result<Vec<PathBuf>> {
    write_pair(path, result_csv(table)?, table)
}

pub fn write_dmt_table(table: &DmtTable, path: &Path) -> Result<Vec<PathBuf>> {
    write_pair(path, dmt_csv(table)?, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ResultRow;

    fn meta() -> Metadata {
        Metadata {
            tool_version: "t".into(),
            name: "n".into(),
            seed: 3,
            trials: 10,
            status: "complete".into(),
            notes: vec!["grid is ours".into()],
            spec: serde_json::json!({"a": 1}),
        }
    }

    #[test]
    fn missing_values_are_empty_fields() {
        let t = ResultTable {
            metadata: meta(),
            rows: vec![ResultRow {
                snr_db: 2.5,
                scheme: "PR".into(),
                n: 1,
                l: 1,
                q: 4,
                k: 1,
                m: 4,
                rate_r: 1.0,
                p_mc: None,
                ci_low: None,
                ci_high: None,
                p_analytic: Some(0.25),
                trials: None,
                seed: None,
            }],
        };
        let csv = result_csv(&t).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[..6].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[7], RESULT_COLUMNS.join(","));
        assert_eq!(lines[8], "2.5,PR,1,1,4,1,4,1,,,,2.5e-1,,");
    }
}
