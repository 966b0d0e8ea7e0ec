//! Scenario runners, slope fits and machine-readable output.

mod checks;
mod config;
mod runs;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use checks::{propagator_hygiene, selftest, smoothing_operator, symbol_calculus, wick_identities, SelftestReport};
pub use config::{ExperimentConfig, GridConfig, OutputConfig, PotentialConfig, Scenario, Tolerances, MAX_POINTS};
pub use runs::{
    composition_sweep, ehrenfest_observable, heat_marginal_oracle, run, run_composition, run_counterexample, run_ehrenfest,
    run_ehrenfest_time, run_tdhf_vlasov, wick_pde_sweep,
};

pub const CSV_HEADER: &str = "h,t,metric,value,wall_time_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub h: f64,
    pub t: f64,
    pub metric: String,
    pub value: f64,
    pub wall_time_s: f64,
}

/// Least squares on (ln h, ln value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientSampling(format!("{} points; a slope fit needs 3", points.len())));
    }
    for &(h, v) in points {
        if !(v > 0.0) {
            return Err(Error::NonPositive(v));
        }
        if !(h > 0.0) {
            return Err(Error::NonPositive(h));
        }
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(h, v)| (h.ln(), v.ln())).collect();
    let (slope, intercept, r2) = linear_fit(&xy);
    Ok(SlopeFit { slope, intercept, r2, points: points.to_vec() })
}

/// Ordinary least squares y = a x + b; returns (a, b, r²).
pub fn linear_fit(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// One threshold: value must lie in [lo, hi].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, lo: Option<f64>, hi: Option<f64>) -> Self {
        let pass = value.is_finite() && lo.is_none_or(|l| value >= l) && hi.is_none_or(|u| value <= u);
        Check { name: name.into(), value, lo, hi, pass }
    }
    pub fn at_most(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Self::new(name, value, None, Some(hi))
    }
    pub fn at_least(name: impl Into<String>, value: f64, lo: f64) -> Self {
        Self::new(name, value, Some(lo), None)
    }
    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, value, Some(lo), Some(hi))
    }
    /// A boolean property, recorded as 1 (holds) or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Some(1.0), None)
    }

    pub fn line(&self) -> String {
        let bound = match (self.lo, self.hi) {
            (Some(l), Some(u)) => format!("in [{l}, {u}]"),
            (Some(l), None) => format!(">= {l}"),
            (None, Some(u)) => format!("<= {u}"),
            (None, None) => String::new(),
        };
        format!("{} {} = {:.6e} ({bound})", if self.pass { "ok  " } else { "FAIL" }, self.name, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub scenario: Scenario,
    pub config_hash: String,
    pub code_version: String,
    pub guards: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
}

/// The JSON summary: everything except the rows.
#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub metadata: &'a Metadata,
    pub fits: &'a [NamedFit],
    pub checks: &'a [Check],
    pub rows: usize,
    pub pass: bool,
}

impl SweepResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Rows of one metric, in h order then t order.
    pub fn series(&self, metric: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.metric == metric).collect()
    }

    /// The value of a metric at (h, t), matched exactly.
    pub fn value(&self, metric: &str, h: f64, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.metric == metric && r.h == h && r.t == t).map(|r| r.value)
    }

    pub fn fit(&self, name: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// CSV text, without wall times when `with_wall_time` is false (they are the only
    /// non-deterministic column).
    pub fn csv(&self, with_wall_time: bool) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let wall = if with_wall_time { format!("{:.3}", r.wall_time_s) } else { "0".into() };
            s.push_str(&format!("{},{},{},{},{}\n", r.h, r.t, r.metric, r.value, wall));
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let s = Summary { metadata: &self.metadata, fits: &self.fits, checks: &self.checks, rows: self.rows.len(), pass: self.passed() };
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }

    /// Write the CSV and the JSON summary; returns their paths.
    pub fn write(&self, out: &OutputConfig) -> Result<(PathBuf, PathBuf)> {
        let name = self.metadata.scenario.name();
        fs::create_dir_all(&out.dir).map_err(|e| Error::Io(format!("{}: {e}", out.dir.display())))?;
        let csv = out.dir.join(out.csv.clone().unwrap_or_else(|| format!("{name}.csv")));
        let json = out.dir.join(out.summary.clone().unwrap_or_else(|| format!("{name}_summary.json")));
        write_file(&csv, &self.csv(true))?;
        write_file(&json, &self.summary_json())?;
        Ok((csv, json))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// SHA-256 of the config with the fields that cannot change any value (output, jobs) reset.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output = ExperimentConfig::preset(cfg.scenario).output;
    c.jobs = 0;
    let text = serde_json::to_string(&c).expect("config serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Rows of one (h, scenario) cell with a running clock.
pub(crate) struct Recorder {
    h: f64,
    start: Instant,
    rows: Vec<Row>,
}

impl Recorder {
    pub fn new(h: f64) -> Self {
        Recorder { h, start: Instant::now(), rows: Vec::new() }
    }
    pub fn push(&mut self, t: f64, metric: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Invariant(format!("{metric} is not finite at h = {}, t = {t}", self.h)));
        }
        self.rows.push(Row { h: self.h, t, metric: metric.into(), value, wall_time_s: self.start.elapsed().as_secs_f64() });
        Ok(())
    }
    pub fn into_rows(self) -> Vec<Row> {
        self.rows
    }
}

/// Run `f` on a pool with `jobs` workers (0 = default pool).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(f);
            }
        }
    }
    let _ = jobs;
    f()
}
