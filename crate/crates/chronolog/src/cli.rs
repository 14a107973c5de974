//! Command-line interface.
//!
//! Four subcommands cover the pipeline: `analyze` exports cost functions,
//! `calibrate` fits a platform profile, `predict` combines the two, and
//! `evaluate` scores the bundled benchmarks against live measurements.
//! Exit codes: 0 success, 1 runtime failure, 2 input or validation error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use fs2::FileExt;

use crate::analysis::{predicate_cost, BoundKind};
use crate::bench::bundled_benchmarks;
use crate::calibrate::{
    builtin_calibration_suite, calibrate_builtins, collect_samples, default_sizes, fit_model,
    CollectOptions, PlatformProfile,
};
use crate::lang::parse_program;
use crate::lang::program::{Diagnostic, Mode, Program, Severity};
use crate::lang::term::PredSig;
use crate::metric::CostModel;
use crate::predict::{evaluate, predict_time, EvalOptions};

#[derive(Parser)]
#[command(
    name = "chronolog",
    version,
    about = "Predicts execution times of deterministic logic programs from static cost analysis and a one-time platform calibration"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive per-metric cost functions for a program's entry points.
    Analyze {
        /// Program source file.
        program: PathBuf,
        /// Cost model signature, e.g. "step,giunif" or "step,is/2".
        #[arg(long)]
        model: Option<String>,
        /// Write the export here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the calibration suite on this machine and fit event constants.
    Calibrate {
        /// Cost model signature to fit.
        #[arg(long)]
        model: Option<String>,
        /// Timing samples per suite cell.
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Comma-separated list sizes for the suite programs.
        #[arg(long)]
        sizes: Option<String>,
        /// Seed for input generation; generated and recorded when absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Profile output path.
        #[arg(long, default_value = "profile.toml")]
        out: PathBuf,
    },
    /// Estimate execution times for a program from a saved profile.
    Predict {
        /// Program source file.
        program: PathBuf,
        /// Profile written by `calibrate`.
        #[arg(long)]
        profile: PathBuf,
        /// Model signature; defaults to the profile's first fit.
        #[arg(long)]
        model: Option<String>,
        /// Comma-separated input sizes, one estimate per value.
        #[arg(long)]
        sizes: String,
        /// Entry predicate as name/arity; defaults to the first entry.
        #[arg(long)]
        entry: Option<String>,
    },
    /// Measure the bundled benchmarks and score model predictions.
    Evaluate {
        /// Profile written by `calibrate`.
        #[arg(long)]
        profile: PathBuf,
        /// Model signature to score; repeatable. Step-only is always added.
        #[arg(long)]
        model: Vec<String>,
        /// Seed for input generation; generated and recorded when absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Timing samples per generated input.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Records,
}

/// Failures split by exit code.
enum CliError {
    /// Bad input or configuration; exit 2.
    Input(String),
    /// The pipeline itself failed; exit 1.
    Runtime(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Entry point for the `chronolog` binary; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Analyze { program, model, out } => cmd_analyze(&program, model.as_deref(), out.as_deref()),
        Cmd::Calibrate {
            model,
            reps,
            sizes,
            seed,
            out,
        } => cmd_calibrate(model.as_deref(), reps, sizes.as_deref(), seed, &out),
        Cmd::Predict {
            program,
            profile,
            model,
            sizes,
            entry,
        } => cmd_predict(&program, &profile, model.as_deref(), &sizes, entry.as_deref()),
        Cmd::Evaluate {
            profile,
            model,
            seed,
            reps,
            out,
            format,
        } => cmd_evaluate(&profile, &model, seed, reps, out.as_deref(), format),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Runtime(msg)) => {
            eprintln!("chronolog: error: {msg}");
            1
        }
        Err(CliError::Input(msg)) => {
            eprintln!("chronolog: error: {msg}");
            2
        }
    }
}

fn read_program(path: &Path) -> Result<Program, CliError> {
    let src = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_program(&src).map_err(|diags| CliError::Input(render_diagnostics(path, &diags)))
}

fn render_diagnostics(path: &Path, diags: &[Diagnostic]) -> String {
    let mut out = format!("{} failed to parse:", path.display());
    for d in diags {
        let sev = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &d.pos {
            Some(p) => out.push_str(&format!("\n  {sev} at line {}: {}", p.line, d.message)),
            None => out.push_str(&format!("\n  {sev}: {}", d.message)),
        }
    }
    out
}

fn parse_model(s: Option<&str>) -> Result<CostModel, CliError> {
    match s {
        Some(sig) => CostModel::parse_signature(sig).map_err(CliError::input),
        None => Ok(CostModel::full()),
    }
}

fn parse_size_list(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|e| CliError::Input(format!("bad size `{x}`: {e}")))
        })
        .collect()
}

fn parse_pred_sig(s: &str) -> Result<PredSig, CliError> {
    let (name, arity) = s
        .rsplit_once('/')
        .ok_or_else(|| CliError::Input(format!("bad predicate `{s}`, expected name/arity")))?;
    let arity: usize = arity
        .parse()
        .map_err(|e| CliError::Input(format!("bad arity in `{s}`: {e}")))?;
    Ok(PredSig::new(name, arity))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generated_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn host_name() -> String {
    fs::read_to_string("/proc/sys/kernel/hostname")
        .map(|s| s.trim().to_string())
        .ok()
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

/// Held while timing runs; a second timing command on the same machine
/// fails fast instead of polluting both runs' measurements.
struct TimingLock {
    file: fs::File,
    path: PathBuf,
}

impl TimingLock {
    fn acquire() -> Result<Self, CliError> {
        let path = std::env::temp_dir().join("chronolog-timing.lock");
        let file = fs::OpenOptions::new()
            .create(true)
            .write(true)
            .open(&path)
            .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
        file.try_lock_exclusive().map_err(|_| {
            CliError::Runtime(format!(
                "another timing run holds {}; wait for it to finish",
                path.display()
            ))
        })?;
        Ok(TimingLock { file, path })
    }
}

impl Drop for TimingLock {
    fn drop(&mut self) {
        let _ = fs2::FileExt::unlock(&self.file);
        let _ = fs::remove_file(&self.path);
    }
}

fn cmd_analyze(program: &Path, model: Option<&str>, out: Option<&Path>) -> Result<(), CliError> {
    let prog = read_program(program)?;
    let model = parse_model(model)?;
    let entries = prog.entry_sigs();
    if entries.is_empty() {
        return Err(CliError::Input(format!(
            "{} declares no entry points",
            program.display()
        )));
    }
    let mut text = format!("program: {}\nmodel: {}\n", program.display(), model.signature());
    for sig in &entries {
        let costs = predicate_cost(&prog, sig, BoundKind::Exact).map_err(CliError::input)?;
        text.push_str(&format!("\n{sig}\n"));
        for comp in &model.components {
            text.push_str(&format!("  {comp}: {}\n", costs.cost(comp)));
        }
    }
    write_or_print(out, &text)
}

fn cmd_calibrate(
    model: Option<&str>,
    reps: usize,
    sizes: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CliError> {
    let model = parse_model(model)?;
    let sizes = match sizes {
        Some(s) => parse_size_list(s)?,
        None => default_sizes(),
    };
    if sizes.is_empty() || reps == 0 {
        return Err(CliError::Input("need at least one size and one rep".into()));
    }
    let suite = builtin_calibration_suite().map_err(CliError::runtime)?;
    if suite.len() * sizes.len() <= model.len() {
        return Err(CliError::Input(format!(
            "{} programs x {} sizes yields too few samples for {} constants",
            suite.len(),
            sizes.len(),
            model.len()
        )));
    }
    let seed = generated_seed(seed);
    println!("host: {}", host_name());
    println!("seed: {seed}");

    let _lock = TimingLock::acquire()?;
    let opts = CollectOptions {
        sizes,
        reps,
        inner_iters: CollectOptions::default().inner_iters,
        seed,
    };
    let samples = collect_samples(&suite, &CostModel::full(), &opts).map_err(CliError::runtime)?;
    let fit = fit_model(&samples, &model).map_err(CliError::runtime)?;
    let builtins = calibrate_builtins(64).map_err(CliError::runtime)?;

    let mut profile = PlatformProfile::new(&host_name(), seed);
    profile.add_fit(&fit);
    if model != CostModel::step_only() {
        // The baseline every evaluation is scored against.
        let step = fit_model(&samples, &CostModel::step_only()).map_err(CliError::runtime)?;
        profile.add_fit(&step);
    }
    profile.builtins = builtins;
    profile.save(out).map_err(CliError::runtime)?;

    let ks = fit
        .k
        .iter()
        .zip(&fit.model.components)
        .map(|(k, c)| format!("{c}={k:.2}"))
        .collect::<Vec<_>>()
        .join("  ");
    println!("fit: {ks}");
    println!("S: {:.2} ns over {} samples", fit.s, fit.m);
    for w in &fit.warnings {
        println!("warning: {w}");
    }
    println!("profile written to {}", out.display());
    Ok(())
}

fn cmd_predict(
    program: &Path,
    profile: &Path,
    model: Option<&str>,
    sizes: &str,
    entry: Option<&str>,
) -> Result<(), CliError> {
    let prog = read_program(program)?;
    let platform = PlatformProfile::load(profile).map_err(CliError::input)?;
    let sizes = parse_size_list(sizes)?;

    let fit = match model {
        Some(sig) => {
            let model = CostModel::parse_signature(sig).map_err(CliError::input)?;
            platform.find_fit(&model).ok_or_else(|| {
                let have = platform
                    .fits
                    .iter()
                    .map(|f| f.signature.clone())
                    .collect::<Vec<_>>()
                    .join("; ");
                CliError::Input(format!(
                    "profile has no fit for `{}`; it holds: {have}",
                    model.signature()
                ))
            })?
        }
        None => platform
            .fits
            .first()
            .ok_or_else(|| CliError::Input("profile holds no fits".into()))?,
    };
    let model = CostModel::parse_signature(&fit.signature).map_err(CliError::input)?;

    let sig = match entry {
        Some(e) => parse_pred_sig(e)?,
        None => prog
            .entry_sigs()
            .into_iter()
            .next()
            .ok_or_else(|| CliError::Input(format!("{} declares no entry points", program.display())))?,
    };
    let pred = prog
        .lookup(&sig)
        .ok_or_else(|| CliError::Input(format!("no predicate {sig} in {}", program.display())))?;
    let modes = pred.modes().to_vec();
    if modes.len() != sig.arity {
        return Err(CliError::Input(format!("{sig} lacks a mode declaration")));
    }
    let costs = predicate_cost(&prog, &sig, BoundKind::Exact).map_err(CliError::input)?;

    println!("predicate: {sig}  model: {}", model.signature());
    for n in sizes {
        let size_args: Vec<Option<i64>> = modes
            .iter()
            .map(|m| if *m == Mode::In { Some(n) } else { None })
            .collect();
        let est = predict_time(&model, &fit.k, &platform.builtins, &costs, &size_args)
            .map_err(CliError::runtime)?;
        println!("n={n} estimate_ns={est:.1}");
    }
    Ok(())
}

fn cmd_evaluate(
    profile: &Path,
    models: &[String],
    seed: Option<u64>,
    reps: usize,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let platform = PlatformProfile::load(profile).map_err(CliError::input)?;
    let mut model_list = Vec::new();
    if models.is_empty() {
        for fit in &platform.fits {
            model_list.push(CostModel::parse_signature(&fit.signature).map_err(CliError::input)?);
        }
    }
    for sig in models {
        model_list.push(CostModel::parse_signature(sig).map_err(CliError::input)?);
    }
    if reps == 0 {
        return Err(CliError::Input("need at least one rep".into()));
    }
    let seed = generated_seed(seed);
    eprintln!("seed: {seed}");

    let benchmarks = bundled_benchmarks();
    let opts = EvalOptions {
        runs_per_input: reps,
        seed,
        ..EvalOptions::default()
    };
    let _lock = TimingLock::acquire()?;
    let report = evaluate(&benchmarks, &platform, &model_list, &opts).map_err(|e| {
        match e {
            crate::predict::PredictError::MissingFit(_) => CliError::input(e),
            other => CliError::runtime(other),
        }
    })?;
    let text = match format {
        Format::Table => report.render_table(),
        Format::Records => report.render_records(),
    };
    write_or_print(out, &text)
}
