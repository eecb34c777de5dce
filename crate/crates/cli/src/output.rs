//! CSV rows and the `report` aggregation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use jetmorse_core::metrics::harmonic;
use jetmorse_core::Verdict;
use serde::Serialize;

use crate::CliError;

pub const CSV_HEADER: &str = "metric_kind,k,n,r,q_mode,delta,N,seed,mean,stderr,prefactor,lower_bound,positive";

pub const PLOT_HEADER: &str = "metric_kind,k,n,r,q_mode,delta,N,mean,stderr,hk_n,mean_over_hk_n,closed_form";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub metric_kind: String,
    pub k: usize,
    pub n: usize,
    pub r: usize,
    pub q_mode: String,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub prefactor: f64,
    pub lower_bound: f64,
    pub positive: bool,
}

impl CsvRow {
    pub fn new(v: &Verdict, delta: f64, seed: u64) -> Self {
        let e = &v.estimate;
        CsvRow {
            metric_kind: e.metric_kind.short_name().to_string(),
            k: e.k,
            n: e.n,
            r: e.r,
            q_mode: e.q_mode.to_string(),
            delta,
            samples: e.samples,
            seed,
            mean: e.mean,
            stderr: e.stderr,
            prefactor: v.prefactor,
            lower_bound: v.lower_bound,
            positive: v.positive,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.metric_kind,
            self.k,
            self.n,
            self.r,
            self.q_mode,
            self.delta,
            self.samples,
            self.seed,
            self.mean,
            self.stderr,
            self.prefactor,
            self.lower_bound,
            self.positive
        )
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 13 {
            return Err(format!("expected 13 fields, found {}", f.len()));
        }
        fn num<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} {s:?}"))
        }
        Ok(CsvRow {
            metric_kind: f[0].to_string(),
            k: num(f[1], "k")?,
            n: num(f[2], "n")?,
            r: num(f[3], "r")?,
            q_mode: f[4].to_string(),
            delta: num(f[5], "delta")?,
            samples: num(f[6], "N")?,
            seed: num(f[7], "seed")?,
            mean: num(f[8], "mean")?,
            stderr: num(f[9], "stderr")?,
            prefactor: num(f[10], "prefactor")?,
            lower_bound: num(f[11], "lower_bound")?,
            positive: num(f[12], "positive")?,
        })
    }
}

pub fn csv_text(rows: &[CsvRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_line());
        out.push('\n');
    }
    out
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(CliError::Parse(format!("{}: missing header {CSV_HEADER:?}", path.display()))),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| CsvRow::parse(l).map_err(|e| CliError::Parse(format!("{} line {}: {e}", path.display(), i + 1))))
        .collect()
}

/// `PREFIX.ext` next to the prefix.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    write_text(path, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    #[serde(flatten)]
    pub row: CsvRow,
    pub hk_n: f64,
    pub mean_over_hk_n: f64,
    pub closed_form: Option<f64>,
}

impl PlotRow {
    pub fn new(row: CsvRow, closed_form: Option<f64>) -> Self {
        let hk_n = harmonic(row.k).powi(row.n as i32);
        PlotRow {
            mean_over_hk_n: row.mean / hk_n,
            hk_n,
            closed_form,
            row,
        }
    }
}

pub fn plot_text(rows: &[PlotRow]) -> String {
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for p in rows {
        let r = &p.row;
        let cf = p.closed_form.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.metric_kind, r.k, r.n, r.r, r.q_mode, r.delta, r.samples, r.mean, r.stderr, p.hk_n, p.mean_over_hk_n, cf
        );
    }
    out
}
