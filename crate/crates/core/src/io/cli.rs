//! `qwalk simulate | compare | fit-overlap`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{Format, KindName, PairSourceName, RunConfig};
use super::output::{self, OutputDoc, Payload};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentSpec};
use crate::metrics::{bhattacharyya_probs, Convention};
use crate::par::Exec;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Time-bin quantum walk click statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its distribution.
    Simulate(SimulateArgs),
    /// Bhattacharyya similarity of two distribution files.
    Compare(CompareArgs),
    /// Overlap reproducing a target HOM visibility.
    FitOverlap(FitArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Overrides `experiment.kind`.
    #[arg(value_enum)]
    pub kind: Option<KindName>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent and the config names none.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Cross-check against the Fock oracle; fails above `oracle.tolerance`.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, conflicts_with = "unheralded")]
    pub heralded: bool,
    #[arg(long)]
    pub unheralded: bool,
    /// Replace the TMSV pair source by its squashed classical counterpart.
    #[arg(long)]
    pub classical_source: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Report (Σ√pq)² instead of Σ√pq.
    #[arg(long)]
    pub squared: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `experiment.hom_target_visibility`.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Reads `QWALK_THREADS`; `1` forces the sequential path.
pub fn exec_from_env() -> Result<Exec> {
    let Ok(v) = std::env::var("QWALK_THREADS") else {
        return Ok(Exec::default());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("QWALK_THREADS = {v:?} is not a positive integer")))?;
    if n == 1 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        // A second initialization (tests calling run twice) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(Exec::Parallel)
}

/// Applies command-line overrides and returns the resolved configuration.
pub fn resolve(args: &SimulateArgs) -> Result<RunConfig> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(k) = args.kind {
        cfg.experiment.kind = k;
    }
    if let Some(p) = &args.out {
        cfg.output.path = p.display().to_string();
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if args.oracle {
        cfg.oracle.enabled = true;
    }
    if args.heralded {
        cfg.detection.heralded = true;
    }
    if args.unheralded {
        cfg.detection.heralded = false;
    }
    if args.classical_source {
        cfg.sources.pair_source = PairSourceName::Squashed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Computes the document for a resolved configuration.
pub fn simulate(cfg: &RunConfig, exec: Exec) -> Result<OutputDoc> {
    let spec = ExperimentSpec { exec, ..cfg.spec()? };
    let payload = match cfg.experiment.kind {
        KindName::Hom => Payload::Hom(experiments::hom_scan(&spec, &cfg.experiment.hom_overlaps)?),
        KindName::StepEvolution => Payload::Distributions(
            experiments::step_evolution(&spec, cfg.experiment.n_max)?
                .into_iter()
                .enumerate()
                .map(|(i, d)| (Some(i + 1), d))
                .collect(),
        ),
        _ => {
            let fold = cfg.fold().expect("fold kinds");
            Payload::Distributions(vec![(None, experiments::run_fold_kind(&spec, fold)?)])
        }
    };
    Ok(OutputDoc {
        kind: cfg.experiment.kind,
        heralded: cfg.detection.heralded,
        config: cfg.clone(),
        payload,
    })
}

/// Largest `|Gaussian − Fock|` over everything the configured run computes.
pub fn oracle_check(cfg: &RunConfig, exec: Exec) -> Result<f64> {
    let spec = ExperimentSpec { exec, ..cfg.spec()? };
    let opts = cfg.oracle_options();
    match cfg.experiment.kind {
        KindName::Hom => {
            let mut worst: f64 = 0.0;
            for &o in &cfg.experiment.hom_overlaps {
                let g = experiments::hom_coincidence(&spec, o)?;
                let f = experiments::hom_coincidence_oracle(&spec, o, &opts)?;
                worst = worst.max((g - f).abs());
            }
            Ok(worst)
        }
        KindName::StepEvolution => {
            let fold = cfg.fold().expect("validated step kind");
            let mut worst: f64 = 0.0;
            for n in 1..=cfg.experiment.n_max {
                let s = spec.with_walk(spec.walk.prefix(n)?);
                worst = worst.max(experiments::oracle_deviation(&s, fold, &opts)?);
            }
            Ok(worst)
        }
        _ => experiments::oracle_deviation(&spec, cfg.fold().expect("fold kinds"), &opts),
    }
}

fn write_or_print(path: &str, text: &str, stdout: &mut dyn std::io::Write) -> Result<()> {
    if path.is_empty() {
        stdout.write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    }
    Ok(())
}

/// Similarity of two distribution files, one value per step.
pub fn compare_files(a: &Path, b: &Path, convention: Convention) -> Result<Vec<(Option<usize>, f64)>> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())));
    let (da, db) = (output::parse(&read(a)?)?, output::parse(&read(b)?)?);
    if da.kind != db.kind || da.steps.len() != db.steps.len() {
        return Err(Error::LabelMismatch);
    }
    da.steps
        .iter()
        .zip(&db.steps)
        .map(|((sa, (la, pa)), (sb, (lb, pb)))| {
            if sa != sb || la != lb {
                return Err(Error::LabelMismatch);
            }
            Ok((*sa, bhattacharyya_probs(pa, pb, convention)?.value))
        })
        .collect()
}

/// Runs a parsed command. Diagnostics go to `stderr`, results to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> Result<()> {
    let exec = exec_from_env()?;
    match cli.command {
        Command::Simulate(args) => {
            let cfg = resolve(&args)?;
            let doc = simulate(&cfg, exec)?;
            if cfg.oracle.enabled {
                let dev = oracle_check(&cfg, exec)?;
                writeln!(
                    stderr,
                    "oracle: max |gaussian - fock| = {dev:.3e} (tolerance {:.1e}, cutoff {})",
                    cfg.oracle.tolerance, cfg.oracle.cutoff
                )?;
                if !(dev < cfg.oracle.tolerance) {
                    return Err(Error::OracleMismatch {
                        deviation: dev,
                        tolerance: cfg.oracle.tolerance,
                    });
                }
            }
            write_or_print(&cfg.output.path, &doc.render(cfg.output.format), stdout)
        }
        Command::Compare(args) => {
            let conv = if args.squared {
                Convention::BhattacharyyaSquared
            } else {
                Convention::Bhattacharyya
            };
            let values = compare_files(&args.a, &args.b, conv)?;
            for (step, v) in values {
                match step {
                    Some(s) if s > 0 => writeln!(stdout, "step {s}: {v:.6}")?,
                    _ => writeln!(stdout, "{v:.6}")?,
                }
            }
            Ok(())
        }
        Command::FitOverlap(args) => {
            let cfg = load_config(args.config.as_deref())?;
            let target = args.target.unwrap_or(cfg.experiment.hom_target_visibility);
            let spec = ExperimentSpec { exec, ..cfg.spec()? };
            let o = experiments::fit_overlap(&spec, target, args.tol)?;
            let v = experiments::hom_visibility(&spec, o)?;
            writeln!(stdout, "overlap = {o:.6}")?;
            writeln!(stdout, "visibility = {v:.6}")?;
            Ok(())
        }
    }
}

/// Error line printed on failure.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}
