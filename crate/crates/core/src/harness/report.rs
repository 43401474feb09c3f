use std::fmt::Write as _;

use super::HarnessError;
use crate::domains::{Family, Setting};

pub const CSV_HEADER: &str = "method,domain,setting,ratio,accuracy,seconds";
const MISSING: &str = "-";

/// One cell of the results grid. `None` accuracy marks a method that cannot
/// handle the domain; `None` seconds also marks masked timing.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub domain: Family,
    pub setting: Setting,
    pub ratio: f64,
    /// Percent of held-out traces recognized correctly.
    pub accuracy: Option<f64>,
    /// Mean seconds per prediction.
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    /// Orders rows by method, setting, then ratio.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.method, a.domain, a.setting)
                .cmp(&(&b.method, b.domain, b.setting))
                .then(a.ratio.total_cmp(&b.ratio))
        });
    }

    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
        self.sort();
    }

    /// Copy with every timing replaced by the missing marker.
    pub fn without_timing(&self) -> EvalReport {
        EvalReport {
            rows: self
                .rows
                .iter()
                .map(|r| ReportRow {
                    seconds: None,
                    ..r.clone()
                })
                .collect(),
        }
    }

    pub fn accuracy(&self, method: &str, ratio: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && (r.ratio - ratio).abs() < 1e-12)
            .and_then(|r| r.accuracy)
    }

    pub fn seconds(&self, method: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.seconds)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| MISSING.to_string(), |x| x.to_string());
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.method,
                r.domain,
                r.setting,
                r.ratio,
                opt(r.accuracy),
                opt(r.seconds)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let err = |line: usize, msg: String| HarnessError::Format {
            file: "report".into(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(err(1, format!("expected header `{CSV_HEADER}`"))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(err(i + 1, format!("expected 6 fields, found {}", f.len())));
            }
            let num = |s: &str| -> Result<f64, HarnessError> {
                s.parse().map_err(|_| err(i + 1, format!("bad number `{s}`")))
            };
            let opt = |s: &str| -> Result<Option<f64>, HarnessError> {
                if s == MISSING {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            rows.push(ReportRow {
                method: f[0].to_string(),
                domain: f[1].parse().map_err(|e| err(i + 1, format!("{e}")))?,
                setting: f[2].parse().map_err(|e| err(i + 1, format!("{e}")))?,
                ratio: num(f[3])?,
                accuracy: opt(f[4])?,
                seconds: opt(f[5])?,
            });
        }
        Ok(EvalReport { rows })
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let header = ["method", "domain", "setting", "ratio", "acc%", "sec/pred"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.method.clone(),
                    r.domain.to_string(),
                    r.setting.to_string(),
                    format!("{:.1}", r.ratio),
                    r.accuracy.map_or_else(|| MISSING.into(), |a| format!("{a:.1}")),
                    r.seconds.map_or_else(|| MISSING.into(), |s| format!("{s:.6}")),
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |row: &[String]| {
            let parts: Vec<String> = row
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(j, (c, &w))| if j < 3 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&header.map(String::from));
        for row in &cells {
            line(row);
        }
        out
    }
}

/// Learning-curve points as CSV.
pub fn curve_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("n_traces,accuracy\n");
    for (n, a) in points {
        let _ = writeln!(out, "{n},{a}");
    }
    out
}
