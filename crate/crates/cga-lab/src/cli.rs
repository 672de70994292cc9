//! Command-line interface.
//!
//! Subcommands: `run` (single run, optional trace), `scale` (sweep),
//! `drift` (drift probes at constructed states), `verify <claim-id>`,
//! `oracle <name>` (dump exact distributions as CSV).
//!
//! Exit codes: 0 success / claim passed, 1 claim failed, 2 invalid
//! arguments or execution error.
//!
//! `CGA_LAB_OUT_DIR`, when set, prefixes relative output paths.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use crate::engine::{run, RunParams};
use crate::error::{LabError, Result};
use crate::experiment::{
    parse_mu_rule, resolve_mu, sweep, write_drift_csv, write_raw_csv, write_raw_json,
    write_trace_csv, ExperimentConfig, MuRule, ObjectiveSpec, OutputFormat, RawRow,
};
use crate::frequency::{BoundaryMode, GridSpec};
use crate::objective::Objective;
use crate::oracle::{
    boundary_flip_law, counterexample_delta_law, ea_step_distance_law, poisson_binomial,
    DiscreteDistribution,
};
use crate::potential::{construct_state, estimate_drift, PotentialParams, StateProfile};
use crate::verify::{run_claim, ClaimOverrides, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundaryModeArg {
    Bounded,
    Free,
}

impl From<BoundaryModeArg> for BoundaryMode {
    fn from(v: BoundaryModeArg) -> Self {
        match v {
            BoundaryModeArg::Bounded => BoundaryMode::Bounded,
            BoundaryModeArg::Free => BoundaryMode::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileArg {
    Balanced,
    BoundaryMix,
    Both,
}

#[derive(Parser, Debug)]
#[command(
    name = "cga-lab",
    version,
    about = "Simulation and verification laboratory for the compact genetic algorithm \
             on OneMax and jump functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem dimension.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Jump size, or a comma-separated list for sweeps (omit for OneMax).
    #[arg(long, global = true)]
    k: Option<String>,

    /// Hypothetical population size, or "auto".
    #[arg(long, global = true)]
    mu: Option<String>,

    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Replicates per grid point.
    #[arg(long, global = true)]
    replicates: Option<u64>,

    /// Iteration cap per run.
    #[arg(long, global = true)]
    cap: Option<u64>,

    /// Potential rescaling constant.
    #[arg(long, global = true)]
    c: Option<f64>,

    /// State profile for drift probes.
    #[arg(long, global = true, value_enum)]
    profile: Option<ProfileArg>,

    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Bulk output format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Frequency boundary handling.
    #[arg(long = "boundary-mode", global = true, value_enum)]
    boundary_mode: Option<BoundaryModeArg>,

    /// Trace decimation stride (record every s-th iteration).
    #[arg(long, global = true)]
    stride: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a single run and print its record as JSON.
    Run,
    /// Sweep jump sizes with replicate fan-out; write raw and summary files.
    Scale,
    /// Probe one-step potential drift at constructed states.
    Drift {
        /// Comma-separated distance targets, e.g. "6,8,10".
        #[arg(long = "d-targets")]
        d_targets: String,
        /// Exact enumeration instead of Monte Carlo (n <= 12).
        #[arg(long)]
        exact: bool,
    },
    /// Run one claim check; exit 0 on pass, 1 on fail.
    Verify {
        /// One of: L1 L2 L3 L4 L5 L6 sleepy opt-bound T1-drift T1-scaling
        /// CE-drift CE-freq.
        claim_id: String,
    },
    /// Dump an exact distribution as CSV (value,probability).
    Oracle {
        /// One of: poisson-binomial, boundary-flip, delta, ea-step, binomial.
        name: String,
        /// Comma-separated frequencies for poisson-binomial / delta.
        #[arg(long)]
        freqs: Option<String>,
        /// Lower-boundary count for boundary-flip.
        #[arg(long)]
        ell: Option<usize>,
        /// Parent one-bit count for ea-step.
        #[arg(long)]
        norm1: Option<usize>,
        /// Success probability for binomial.
        #[arg(long)]
        p: Option<f64>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Run => cmd_run(&cli),
        Command::Scale => cmd_scale(&cli),
        Command::Drift { d_targets, exact } => cmd_drift(&cli, d_targets, *exact),
        Command::Verify { claim_id } => cmd_verify(&cli, claim_id),
        Command::Oracle {
            name,
            freqs,
            ell,
            norm1,
            p,
        } => cmd_oracle(&cli, name, freqs.as_deref(), *ell, *norm1, *p),
    }
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| LabError::InvalidParameter(format!("invalid list entry '{t}'")))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| LabError::InvalidParameter(format!("invalid list entry '{t}'")))
        })
        .collect()
}

fn require_n(cli: &Cli) -> Result<usize> {
    cli.n
        .ok_or_else(|| LabError::InvalidParameter("--n is required".into()))
}

fn mu_rule(cli: &Cli) -> Result<MuRule> {
    match cli.mu.as_deref() {
        None => Ok(MuRule::Auto),
        Some(s) => parse_mu_rule(s),
    }
}

fn out_path(cli: &Cli) -> Result<PathBuf> {
    let out = cli
        .out
        .clone()
        .ok_or_else(|| LabError::InvalidParameter("--out is required".into()))?;
    Ok(apply_out_dir(out))
}

/// Relative paths are placed under `CGA_LAB_OUT_DIR` when it is set.
fn apply_out_dir(path: PathBuf) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("CGA_LAB_OUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path
}

fn single_objective(cli: &Cli, n: usize) -> Result<Objective> {
    match cli.k.as_deref() {
        None => Ok(Objective::one_max(n)),
        Some(s) => {
            let ks = parse_usize_list(s)?;
            if ks.len() != 1 {
                return Err(LabError::InvalidParameter(
                    "this command takes a single --k value".into(),
                ));
            }
            Objective::jump(n, ks[0])
        }
    }
}

fn cmd_run(cli: &Cli) -> Result<u8> {
    let n = require_n(cli)?;
    let mu = resolve_mu(mu_rule(cli)?, n)?;
    let boundary_mode: BoundaryMode = cli
        .boundary_mode
        .map(Into::into)
        .unwrap_or(BoundaryMode::Bounded);
    if matches!(boundary_mode, BoundaryMode::Bounded) {
        GridSpec::new(n, mu)?;
    }
    let obj = single_objective(cli, n)?;
    let params = RunParams {
        n,
        mu,
        boundary_mode,
        cap: cli.cap.unwrap_or(1_000_000),
        master_seed: cli.seed.unwrap_or(DEFAULT_SEED),
        replicate: 0,
        trace_stride: cli.stride,
    };
    let record = run(&params, &obj)?;

    if let Some(out) = cli.out.clone() {
        let out = apply_out_dir(out);
        let row = RawRow::from_record("run", &record);
        match cli.format {
            Some(FormatArg::Json) => write_raw_json(&out, &[row])?,
            _ => write_raw_csv(&out, &[row])?,
        }
        if let Some(trace) = &record.trace {
            let stem = out
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            write_trace_csv(&out.with_file_name(format!("{stem}.trace.csv")), trace)?;
        }
    } else if cli.stride.is_some() {
        return Err(LabError::InvalidParameter(
            "--stride requires --out for the trace file".into(),
        ));
    }

    // Trace stays in the files; keep stdout compact.
    let mut printable = record.clone();
    printable.trace = None;
    println!("{}", serde_json::to_string_pretty(&printable)?);
    Ok(0)
}

fn cmd_scale(cli: &Cli) -> Result<u8> {
    let n = require_n(cli)?;
    let objective = match cli.k.as_deref() {
        None => ObjectiveSpec::OneMax,
        Some(s) => ObjectiveSpec::Jump {
            k_list: parse_usize_list(s)?,
        },
    };
    let cfg = ExperimentConfig {
        experiment_id: format!("scale-n{n}"),
        objective,
        n,
        mu: mu_rule(cli)?,
        replicates: cli.replicates.unwrap_or(50),
        cap: cli.cap.unwrap_or(1_000_000),
        master_seed: cli.seed.unwrap_or(DEFAULT_SEED),
        boundary_mode: cli
            .boundary_mode
            .map(Into::into)
            .unwrap_or(BoundaryMode::Bounded),
        out: out_path(cli)?,
        format: match cli.format {
            Some(FormatArg::Json) => OutputFormat::Json,
            _ => OutputFormat::Csv,
        },
    };
    let (_, summary) = sweep(&cfg)?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for row in &summary {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| LabError::io("<stdout>", e))?;
    Ok(0)
}

fn cmd_drift(cli: &Cli, d_targets: &str, exact: bool) -> Result<u8> {
    let n = require_n(cli)?;
    let mu = resolve_mu(mu_rule(cli)?, n)?;
    let spec = GridSpec::new(n, mu)?;
    let k = match cli.k.as_deref() {
        Some(s) => {
            let ks = parse_usize_list(s)?;
            if ks.len() != 1 {
                return Err(LabError::InvalidParameter(
                    "drift probes take a single --k".into(),
                ));
            }
            ks[0]
        }
        None => return Err(LabError::InvalidParameter("--k is required".into())),
    };
    let params = PotentialParams::new(k, cli.c.unwrap_or(0.05))?;
    let obj = Objective::jump(n, k)?;
    let profiles: Vec<StateProfile> = match cli.profile.unwrap_or(ProfileArg::Both) {
        ProfileArg::Balanced => vec![StateProfile::Balanced],
        ProfileArg::BoundaryMix => vec![StateProfile::BoundaryMix],
        ProfileArg::Both => vec![StateProfile::Balanced, StateProfile::BoundaryMix],
    };
    let replicates = cli.replicates.unwrap_or(10_000);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);

    let mut rows = Vec::new();
    for (di, &d) in parse_f64_list(d_targets)?.iter().enumerate() {
        let target = Ratio::approximate_float(d)
            .ok_or_else(|| LabError::InvalidParameter(format!("invalid distance target {d}")))?;
        for (pi, &profile) in profiles.iter().enumerate() {
            let f = construct_state(&spec, target, profile)?;
            let mut est = if exact {
                crate::potential::exact_drift(&f, &obj, &params)?
            } else {
                let probe_seed = crate::rng::mix64(seed ^ ((di as u64) << 16 | pi as u64));
                estimate_drift(&f, &obj, &params, replicates, probe_seed)?
            };
            est.d_target = d;
            est.profile = Some(profile);
            rows.push(est);
        }
    }

    match cli.out.clone() {
        Some(out) => {
            let out = apply_out_dir(out);
            let file = std::fs::File::create(&out).map_err(|e| LabError::io(&out, e))?;
            write_drift_csv(file, &rows)?;
        }
        None => write_drift_csv(std::io::stdout(), &rows)?,
    }
    Ok(0)
}

fn cmd_verify(cli: &Cli, claim_id: &str) -> Result<u8> {
    let overrides = ClaimOverrides {
        seed: cli.seed,
        n: cli.n,
        mu: match cli.mu.as_deref() {
            None => None,
            Some(s) => match parse_mu_rule(s)? {
                MuRule::Fixed(m) => Some(m),
                MuRule::Auto => None,
            },
        },
        k: None,
        k_list: match cli.k.as_deref() {
            None => None,
            Some(s) => Some(parse_usize_list(s)?),
        },
        c: cli.c,
        replicates: cli.replicates,
        cap: cli.cap,
    };
    // A single k value feeds single-k claims; longer lists feed sweeps.
    let overrides = match &overrides.k_list {
        Some(ks) if ks.len() == 1 => ClaimOverrides {
            k: Some(ks[0]),
            ..overrides
        },
        _ => overrides,
    };
    let report = run_claim(claim_id, &overrides)?;
    println!("{}", report.to_json());
    Ok(if report.passed { 0 } else { 1 })
}

fn print_distribution<W: std::io::Write>(mut w: W, dist: &DiscreteDistribution) -> Result<()> {
    writeln!(w, "value,probability").map_err(|e| LabError::io("<writer>", e))?;
    for v in dist.support_min()..=dist.support_max() {
        writeln!(w, "{},{}", v, dist.pmf(v)).map_err(|e| LabError::io("<writer>", e))?;
    }
    Ok(())
}

fn cmd_oracle(
    cli: &Cli,
    name: &str,
    freqs: Option<&str>,
    ell: Option<usize>,
    norm1: Option<usize>,
    p: Option<f64>,
) -> Result<u8> {
    let need_freqs = || -> Result<Vec<f64>> {
        freqs
            .map(parse_f64_list)
            .transpose()?
            .ok_or_else(|| LabError::InvalidParameter("--freqs is required".into()))
    };
    let dist = match name {
        "poisson-binomial" => poisson_binomial(&need_freqs()?)?,
        "delta" => counterexample_delta_law(&need_freqs()?)?,
        "boundary-flip" => {
            let n = require_n(cli)?;
            let ell = ell.ok_or_else(|| {
                LabError::InvalidParameter("--ell is required for boundary-flip".into())
            })?;
            boundary_flip_law(ell, n)?
        }
        "ea-step" => {
            let n = require_n(cli)?;
            let obj = single_objective(cli, n)?;
            let norm1 = norm1.ok_or_else(|| {
                LabError::InvalidParameter("--norm1 is required for ea-step".into())
            })?;
            ea_step_distance_law(norm1, &obj)?
        }
        "binomial" => {
            let n = require_n(cli)?;
            let p =
                p.ok_or_else(|| LabError::InvalidParameter("--p is required for binomial".into()))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(LabError::InvalidParameter(format!(
                    "probability must lie in [0,1], got {p}"
                )));
            }
            poisson_binomial(&vec![p; n])?
        }
        other => {
            return Err(LabError::InvalidParameter(format!(
                "unknown oracle '{other}'; use poisson-binomial, boundary-flip, delta, \
                 ea-step or binomial"
            )))
        }
    };
    match cli.out.clone() {
        Some(out) => {
            let out = apply_out_dir(out);
            let file = std::fs::File::create(&out).map_err(|e| LabError::io(&out, e))?;
            print_distribution(file, &dist)?;
        }
        None => print_distribution(std::io::stdout(), &dist)?,
    }
    Ok(0)
}
