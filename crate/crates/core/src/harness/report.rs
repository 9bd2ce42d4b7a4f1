//! Rendering benchmark records as CSV, JSON lines or grouped tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{fmt_num, BenchmarkRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" | "jsonl" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            other => Err(Error::Invalid(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn render_report(records: &[BenchmarkRecord], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(BenchmarkRecord::csv_header());
            out.push('\n');
            for r in records {
                out.push_str(&r.to_csv_row());
                out.push('\n');
            }
            out
        }
        ReportFormat::Json => {
            let mut out = String::new();
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("records serialise"));
                out.push('\n');
            }
            out
        }
        ReportFormat::Table => render_tables(records),
    }
}

/// Parse line-delimited JSON records.
pub fn parse_records(text: &str, origin: &str) -> Result<Vec<BenchmarkRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })
        })
        .collect()
}

fn quality(r: &BenchmarkRecord) -> String {
    if r.objective.is_none() {
        return r.status.as_str().to_string();
    }
    if !r.feasible {
        return format!("infeasible ({} violated)", r.violations);
    }
    let obj = r.objective.map(fmt_num).unwrap_or_default();
    match (r.rsq_percent, r.gap_percent) {
        (Some(q), _) => format!("{obj} (rsq {q:.1}%)"),
        (None, Some(g)) => format!("{obj} (gap {g:.2}%)"),
        _ => obj,
    }
}

fn render_tables(records: &[BenchmarkRecord]) -> String {
    let methods: Vec<&str> = {
        let mut m: Vec<&str> = records.iter().map(|r| r.method.as_str()).collect();
        m.sort_unstable();
        m.dedup();
        m
    };
    let mut by_instance: BTreeMap<&str, Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        by_instance.entry(&r.instance).or_default().push(r);
    }

    let mut out = String::new();
    let mut header = vec!["instance".to_string(), "best known".to_string()];
    header.extend(methods.iter().map(|m| m.to_string()));
    let mut rows = Vec::new();
    for (inst, recs) in &by_instance {
        let best = recs
            .iter()
            .find_map(|r| r.best_known)
            .map(fmt_num)
            .unwrap_or_else(|| "-".into());
        let mut row = vec![inst.to_string(), best];
        for m in &methods {
            let cell = recs
                .iter()
                .filter(|r| r.method == *m)
                .map(|r| quality(r))
                .collect::<Vec<_>>()
                .join("; ");
            row.push(if cell.is_empty() { "-".into() } else { cell });
        }
        rows.push(row);
    }
    write_table(&mut out, &header, &rows);

    out.push('\n');
    let header: Vec<String> = [
        "instance", "method", "qubits", "depth", "gates", "2q gates", "params", "opt s", "post s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let res = |f: fn(&crate::simulator::ResourceSummary) -> usize| {
                r.resources.as_ref().map_or("-".to_string(), |x| f(x).to_string())
            };
            let secs = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{s:.3}"));
            vec![
                r.instance.clone(),
                r.method.clone(),
                if r.resources.is_some() {
                    r.qubits.to_string()
                } else {
                    "-".into()
                },
                res(|x| x.depth),
                res(|x| x.gate_count),
                res(|x| x.two_qubit_gates),
                res(|x| x.parameters),
                secs(r.optimize_secs),
                secs(r.postprocess_secs),
            ]
        })
        .collect();
    write_table(&mut out, &header, &rows);
    out
}

fn write_table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |out: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}", w = *w))
            .collect();
        let _ = writeln!(out, "| {} |", parts.join(" | "));
    };
    line(out, header);
    let sep: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "|-{}-|", sep.join("-|-"));
    for row in rows {
        line(out, row);
    }
}

/// Write `records.jsonl`, `results.csv` and `summary.md` into `dir`.
pub fn write_report(records: &[BenchmarkRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (file, format) in [
        ("records.jsonl", ReportFormat::Json),
        ("results.csv", ReportFormat::Csv),
        ("summary.md", ReportFormat::Table),
    ] {
        let path = dir.join(file);
        fs::write(&path, render_report(records, format)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
