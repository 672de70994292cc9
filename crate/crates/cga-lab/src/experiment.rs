//! Experiment orchestration: parameter sweeps, replicate fan-out, CSV
//! persistence and summary statistics.
//!
//! File contracts:
//!
//! * raw CSV columns: `experiment_id, kind, n, k, mu, seed, replicate, cap,
//!   iterations, evaluations, hit_optimum, premature_convergence`;
//! * trace CSV columns: `t, d_t, lower_count, upper_count, best_fitness`;
//! * summary CSV columns: `n, k, mu, replicates, hits, censored,
//!   median_iterations, mean_iterations, min_iterations, max_iterations,
//!   median_evaluations`.
//!
//! Output is canonical (sorted by group key, then replicate) so parallel
//! and serial execution of the same config produce identical bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{run_many, RunParams, RunRecord, TraceRow};
use crate::error::{LabError, Result};
use crate::frequency::{BoundaryMode, GridSpec};
use crate::objective::Objective;
use crate::potential::DriftEstimate;
use crate::verify::auto_mu;

/// Bulk-output encoding for raw run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Population-size rule: a fixed value or the OneMax-tuned default
/// `nearest_valid_mu(n, ceil(sqrt(n) ln n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuRule {
    Fixed(u64),
    Auto,
}

/// Objective selection for a sweep: OneMax or a list of jump sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSpec {
    OneMax,
    Jump { k_list: Vec<usize> },
}

/// Everything needed to reproduce a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub objective: ObjectiveSpec,
    pub n: usize,
    pub mu: MuRule,
    pub replicates: u64,
    pub cap: u64,
    pub master_seed: u64,
    pub boundary_mode: BoundaryMode,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// Resolves the mu rule and expands the objective grid; rejects invalid
    /// configurations before any run starts.
    pub fn resolve(&self) -> Result<(u64, Vec<Objective>)> {
        if self.experiment_id.is_empty() {
            return Err(LabError::InvalidParameter(
                "experiment_id must be nonempty".into(),
            ));
        }
        if self.replicates < 1 || self.cap < 1 {
            return Err(LabError::InvalidParameter(
                "replicates and cap must be positive".into(),
            ));
        }
        let mu = match self.mu {
            MuRule::Fixed(m) => m,
            MuRule::Auto => auto_mu(self.n)?,
        };
        if matches!(self.boundary_mode, BoundaryMode::Bounded) {
            GridSpec::new(self.n, mu)?;
        }
        let objectives = match &self.objective {
            ObjectiveSpec::OneMax => vec![Objective::one_max(self.n)],
            ObjectiveSpec::Jump { k_list } => {
                if k_list.is_empty() {
                    return Err(LabError::InvalidParameter(
                        "jump sweep needs a nonempty k list".into(),
                    ));
                }
                k_list
                    .iter()
                    .map(|&k| Objective::jump(self.n, k))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok((mu, objectives))
    }
}

/// One raw CSV row; the flat projection of a [`RunRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub experiment_id: String,
    pub kind: String,
    pub n: usize,
    pub k: usize,
    pub mu: u64,
    pub seed: u64,
    pub replicate: u64,
    pub cap: u64,
    pub iterations: u64,
    pub evaluations: u64,
    pub hit_optimum: bool,
    pub premature_convergence: bool,
}

impl RawRow {
    pub fn from_record(experiment_id: &str, rec: &RunRecord) -> Self {
        RawRow {
            experiment_id: experiment_id.to_string(),
            kind: rec.objective.kind_str().to_string(),
            n: rec.params.n,
            k: rec.objective.k_or_zero(),
            mu: rec.params.mu,
            seed: rec.params.master_seed,
            replicate: rec.params.replicate,
            cap: rec.params.cap,
            iterations: rec.iterations,
            evaluations: rec.evaluations,
            hit_optimum: rec.hit_optimum,
            premature_convergence: rec.premature_convergence,
        }
    }

    /// Iterations under the censored-as-cap convention: a run that never
    /// sampled the optimum counts as a lower bound of `cap`.
    fn effective_iterations(&self) -> u64 {
        if self.hit_optimum {
            self.iterations
        } else {
            self.cap
        }
    }
}

/// Aggregated statistics for one `(n, k, mu)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub k: usize,
    pub mu: u64,
    pub replicates: u64,
    pub hits: u64,
    pub censored: u64,
    pub median_iterations: u64,
    pub mean_iterations: f64,
    pub min_iterations: u64,
    pub max_iterations: u64,
    pub median_evaluations: u64,
}

/// Lower median of a sorted slice.
fn lower_median(sorted: &[u64]) -> u64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Order-insensitive aggregation by `(n, k, mu)` with the censored-as-cap
/// convention and the lower-median rule for even counts.
pub fn summarize(rows: &[RawRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, usize, u64), Vec<u64>> = BTreeMap::new();
    let mut hits: BTreeMap<(usize, usize, u64), u64> = BTreeMap::new();
    for row in rows {
        let key = (row.n, row.k, row.mu);
        groups
            .entry(key)
            .or_default()
            .push(row.effective_iterations());
        *hits.entry(key).or_default() += row.hit_optimum as u64;
    }
    groups
        .into_iter()
        .map(|((n, k, mu), mut iters)| {
            iters.sort_unstable();
            let replicates = iters.len() as u64;
            let h = hits[&(n, k, mu)];
            SummaryRow {
                n,
                k,
                mu,
                replicates,
                hits: h,
                censored: replicates - h,
                median_iterations: lower_median(&iters),
                mean_iterations: iters.iter().sum::<u64>() as f64 / replicates as f64,
                min_iterations: iters[0],
                max_iterations: *iters.last().unwrap(),
                median_evaluations: 2 * lower_median(&iters),
            }
        })
        .collect()
}

/// Runs the full grid, writes the raw file and the summary CSV, and returns
/// both tables. Deterministic under `master_seed`.
pub fn sweep(cfg: &ExperimentConfig) -> Result<(Vec<RawRow>, Vec<SummaryRow>)> {
    let (mu, objectives) = cfg.resolve()?;
    let mut rows = Vec::new();
    for obj in &objectives {
        let params = RunParams {
            n: cfg.n,
            mu,
            boundary_mode: cfg.boundary_mode,
            cap: cfg.cap,
            master_seed: cfg.master_seed,
            replicate: 0,
            trace_stride: None,
        };
        let records = run_many(&params, obj, cfg.replicates)?;
        rows.extend(
            records
                .iter()
                .map(|r| RawRow::from_record(&cfg.experiment_id, r)),
        );
    }
    rows.sort_by_key(|r| (r.n, r.k, r.mu, r.replicate));

    match cfg.format {
        OutputFormat::Csv => write_raw_csv(&cfg.out, &rows)?,
        OutputFormat::Json => write_raw_json(&cfg.out, &rows)?,
    }
    let summary = summarize(&rows);
    write_summary_csv(&summary_path(&cfg.out), &summary)?;
    Ok((rows, summary))
}

/// `runs.csv` -> `runs.summary.csv`.
pub fn summary_path(raw: &Path) -> PathBuf {
    let stem = raw
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "runs".into());
    raw.with_file_name(format!("{stem}.summary.csv"))
}

pub fn write_raw_csv(path: &Path, rows: &[RawRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))?;
    Ok(())
}

pub fn write_raw_json(path: &Path, rows: &[RawRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    serde_json::to_writer_pretty(file, rows)?;
    Ok(())
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawRow>> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))?;
    Ok(())
}

/// Trace CSV row with the pinned column names.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TraceCsvRow {
    t: u64,
    #[serde(rename = "D_t")]
    d_t: f64,
    lower_count: usize,
    upper_count: usize,
    best_fitness: i64,
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in trace {
        w.serialize(TraceCsvRow {
            t: row.t,
            d_t: row.d,
            lower_count: row.lower_count,
            upper_count: row.upper_count,
            best_fitness: row.best_fitness,
        })?;
    }
    w.flush().map_err(|e| LabError::io(path, e))?;
    Ok(())
}

/// Drift-probe CSV with the pinned column order.
#[derive(Debug, Clone, Serialize)]
struct DriftCsvRow {
    n: usize,
    mu: u64,
    k: usize,
    c: f64,
    d_target: f64,
    profile: String,
    replicates: u64,
    exact: bool,
    mean: f64,
    std_error: f64,
}

pub fn write_drift_csv<W: std::io::Write>(writer: W, rows: &[DriftEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(DriftCsvRow {
            n: row.n,
            mu: row.mu,
            k: row.k,
            c: row.c,
            d_target: row.d_target,
            profile: row
                .profile
                .map(|p| p.as_str().to_string())
                .unwrap_or_else(|| "custom".into()),
            replicates: row.replicates,
            exact: row.exact,
            mean: row.mean,
            std_error: row.std_error,
        })?;
    }
    w.flush()
        .map_err(|e| LabError::io(PathBuf::from("<writer>"), e))?;
    Ok(())
}

/// Convenience used by config parsing: `"auto"` or an integer.
pub fn parse_mu_rule(s: &str) -> Result<MuRule> {
    if s.eq_ignore_ascii_case("auto") {
        Ok(MuRule::Auto)
    } else {
        s.parse::<u64>()
            .map(MuRule::Fixed)
            .map_err(|_| LabError::InvalidParameter(format!("invalid mu rule '{s}'")))
    }
}

/// Resolves a mu rule for a given dimension.
pub fn resolve_mu(rule: MuRule, n: usize) -> Result<u64> {
    match rule {
        MuRule::Fixed(m) => Ok(m),
        MuRule::Auto => auto_mu(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn row(k: usize, replicate: u64, iterations: u64, hit: bool) -> RawRow {
        RawRow {
            experiment_id: "t".into(),
            kind: "jump".into(),
            n: 20,
            k,
            mu: 20,
            seed: 7,
            replicate,
            cap: 1000,
            iterations,
            evaluations: 2 * iterations,
            hit_optimum: hit,
            premature_convergence: false,
        }
    }

    #[test]
    fn median_conventions() {
        let rows: Vec<RawRow> = [3u64, 5, 7]
            .iter()
            .enumerate()
            .map(|(i, &it)| row(2, i as u64, it, true))
            .collect();
        let s = summarize(&rows);
        assert_eq!(s[0].median_iterations, 5);

        let rows: Vec<RawRow> = [3u64, 5, 7, 9]
            .iter()
            .enumerate()
            .map(|(i, &it)| row(2, i as u64, it, true))
            .collect();
        let s = summarize(&rows);
        assert_eq!(s[0].median_iterations, 5, "lower median for even counts");
        assert_eq!(s[0].median_evaluations, 10);
    }

    #[test]
    fn censored_runs_count_as_cap() {
        let rows = vec![row(2, 0, 900, false), row(2, 1, 100, true)];
        let s = summarize(&rows);
        assert_eq!(s[0].hits, 1);
        assert_eq!(s[0].censored, 1);
        // Censored run contributes cap = 1000, so sorted = [100, 1000].
        assert_eq!(s[0].median_iterations, 100);
        assert_eq!(s[0].max_iterations, 1000);
    }

    #[test]
    fn all_censored_group_medians_at_cap() {
        let rows = vec![row(2, 0, 1000, false), row(2, 1, 1000, false)];
        let s = summarize(&rows);
        assert_eq!(s[0].median_iterations, 1000);
        assert_eq!(s[0].censored, 2);
    }

    #[test]
    fn summarize_groups_and_sorts() {
        let rows = vec![
            row(8, 0, 10, true),
            row(2, 0, 20, true),
            row(8, 1, 30, true),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].k, 2);
        assert_eq!(s[1].k, 8);
        assert_eq!(s[1].replicates, 2);
        assert_eq!(s[1].hits + s[1].censored, s[1].replicates);
    }

    #[test]
    fn sweep_is_deterministic_and_round_trips() {
        let dir = tempdir().unwrap();
        let out = dir.path().join("runs.csv");
        let cfg = ExperimentConfig {
            experiment_id: "demo".into(),
            objective: ObjectiveSpec::Jump { k_list: vec![1, 2] },
            n: 10,
            mu: MuRule::Fixed(25),
            replicates: 6,
            cap: 200_000,
            master_seed: 41,
            boundary_mode: BoundaryMode::Bounded,
            out: out.clone(),
            format: OutputFormat::Csv,
        };
        let (rows, summary) = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(summary.len(), 2);
        let bytes1 = std::fs::read(&out).unwrap();
        sweep(&cfg).unwrap();
        let bytes2 = std::fs::read(&out).unwrap();
        assert_eq!(bytes1, bytes2, "same config, same bytes");

        let parsed = read_raw_csv(&out).unwrap();
        assert_eq!(parsed, rows);
        assert_eq!(summarize(&parsed), summary);

        let header = String::from_utf8(bytes1).unwrap();
        assert!(header.starts_with(
            "experiment_id,kind,n,k,mu,seed,replicate,cap,iterations,evaluations,hit_optimum,premature_convergence"
        ));
        assert!(out.with_file_name("runs.summary.csv").exists());
    }

    #[test]
    fn empty_k_list_rejected() {
        let cfg = ExperimentConfig {
            experiment_id: "demo".into(),
            objective: ObjectiveSpec::Jump { k_list: vec![] },
            n: 10,
            mu: MuRule::Fixed(25),
            replicates: 1,
            cap: 10,
            master_seed: 1,
            boundary_mode: BoundaryMode::Bounded,
            out: PathBuf::from("/tmp/never-written.csv"),
            format: OutputFormat::Csv,
        };
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn mu_rule_parsing() {
        assert_eq!(parse_mu_rule("auto").unwrap(), MuRule::Auto);
        assert_eq!(parse_mu_rule("25").unwrap(), MuRule::Fixed(25));
        assert!(parse_mu_rule("later").is_err());
    }
}
