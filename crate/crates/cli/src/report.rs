//! Aggregate tables over persisted batch summaries.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;

use crate::run::Summary;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub label: String,
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub benchmark: String,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuartileRow {
    pub label: String,
    pub runs: usize,
    /// Runs whose final objective is at or below the threshold.
    pub top: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuartileTable {
    pub benchmark: String,
    pub pool: usize,
    /// 1-based nearest rank, `ceil(pool / 4)`.
    pub rank: usize,
    pub threshold: f64,
    pub rows: Vec<QuartileRow>,
}

pub fn load_summaries<P: AsRef<Path>>(dirs: &[P]) -> Result<Vec<Summary>> {
    dirs.iter().map(|d| Summary::load(d.as_ref())).collect()
}

type Groups = Vec<(String, Vec<f64>)>;

/// Final objectives per configuration label, merging batches that share a
/// label. Runs without a final value are skipped.
fn finals(summaries: &[Summary]) -> Result<(String, Groups)> {
    let Some(first) = summaries.first() else { bail!("no batch directories given") };
    let mut groups: Groups = Vec::new();
    for s in summaries {
        if s.benchmark != first.benchmark {
            bail!("mismatched benchmarks: {:?} and {:?}", first.benchmark, s.benchmark);
        }
        let idx = match groups.iter().position(|(l, _)| *l == s.label) {
            Some(i) => i,
            None => {
                groups.push((s.label.clone(), Vec::new()));
                groups.len() - 1
            }
        };
        groups[idx].1.extend(s.runs.iter().filter_map(|r| r.best));
    }
    Ok((first.benchmark.clone(), groups))
}

/// Mean, minimum and maximum final objective per configuration.
pub fn table(summaries: &[Summary]) -> Result<Table> {
    let (benchmark, groups) = finals(summaries)?;
    let mut rows = Vec::new();
    for (label, values) in groups {
        if values.is_empty() {
            bail!("configuration {label} has no completed run");
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(TableRow { label, runs: values.len(), mean, min, max });
    }
    Ok(Table { benchmark, rows })
}

/// Counts, per configuration, the runs in the lowest quartile of all pooled
/// finals. `only` restricts the rows, not the pool.
pub fn quartiles(summaries: &[Summary], only: Option<&[String]>) -> Result<QuartileTable> {
    let (benchmark, groups) = finals(summaries)?;
    let mut pool: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    if pool.is_empty() {
        bail!("no completed runs to pool");
    }
    pool.sort_by(f64::total_cmp);
    let rank = nearest_rank(pool.len(), 25);
    let threshold = pool[rank - 1];
    let rows = groups
        .into_iter()
        .filter(|(label, _)| only.is_none_or(|o| o.contains(label)))
        .map(|(label, values)| QuartileRow {
            runs: values.len(),
            top: values.iter().filter(|&&v| v <= threshold).count(),
            label,
        })
        .collect();
    Ok(QuartileTable { benchmark, pool: pool.len(), rank, threshold, rows })
}

/// 1-based rank of the `p`-th nearest-rank percentile in a pool of `n`.
pub fn nearest_rank(n: usize, p: usize) -> usize {
    (p * n).div_ceil(100).max(1)
}

impl Table {
    pub fn to_text(&self) -> String {
        let headers = ["configuration", "runs", "mean", "min", "max"];
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| [r.label.clone(), r.runs.to_string(), r.mean.to_string(), r.min.to_string(), r.max.to_string()])
            .collect();
        let mut out = format!("benchmark: {}\n", self.benchmark);
        out.push_str(&aligned(&headers, &cells));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("benchmark,configuration,runs,mean,min,max\n");
        for r in &self.rows {
            let _ =
                writeln!(out, "{},{},{},{},{},{}", csv(&self.benchmark), csv(&r.label), r.runs, r.mean, r.min, r.max);
        }
        out
    }
}

impl QuartileTable {
    pub fn to_text(&self) -> String {
        let headers = ["configuration", "runs", "top"];
        let cells: Vec<[String; 3]> =
            self.rows.iter().map(|r| [r.label.clone(), r.runs.to_string(), r.top.to_string()]).collect();
        let mut out = format!(
            "benchmark: {}\ntop quartile: nearest-rank 25th percentile = value {} at rank {} of {} pooled finals\n",
            self.benchmark, self.threshold, self.rank, self.pool
        );
        out.push_str(&aligned(&headers, &cells));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("benchmark,configuration,runs,top,threshold,rank,pool\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv(&self.benchmark),
                csv(&r.label),
                r.runs,
                r.top,
                self.threshold,
                self.rank,
                self.pool
            );
        }
        out
    }
}

fn csv(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn aligned<const N: usize>(headers: &[&str; N], rows: &[[String; N]]) -> String {
    let mut widths = headers.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: [&str; N]| {
        let parts: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(*headers);
    for row in rows {
        line(row.each_ref().map(String::as_str));
    }
    out
}
