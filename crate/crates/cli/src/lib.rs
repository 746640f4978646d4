//! `nlkg-kam` command line: `build`, `norm`, `kam-run`, `resonance`, `verify`.
//!
//! Exit codes: 0 success, 1 domain error or failed check, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nlkg_kam::config::{check_writable, RunConfig};
use nlkg_kam::hamalg::{norm, norm_plus, parse_hamiltonian, write_hamiltonian, NormContext};
use nlkg_kam::kam::{run_kam_with, KamStatus};
use nlkg_kam::nlkg::build_hamiltonian;
use nlkg_kam::report::{write_trace_csv, RunReport};
use nlkg_kam::resonance::{estimate_resonant_measure, EllBudget};
use nlkg_kam::verify::{format_table, run_suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "nlkg-kam", version, about = "KAM iteration for the truncated nonlinear Klein-Gordon equation")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build H = N + R from a model config and write it in the text format.
    Build(BuildArgs),
    /// Print the weighted norm and the plus norm of a Hamiltonian file.
    Norm(NormArgs),
    /// Run the KAM iteration and write a JSON report.
    KamRun(KamRunArgs),
    /// Monte Carlo estimate of the resonant fraction of frequency space.
    Resonance(ResonanceArgs),
    /// Run the property suite and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Model config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file for H = N + R (default: the config's `hamiltonian`, else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the perturbation R alone to this file.
    #[arg(long)]
    pub remainder: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    /// Hamiltonian file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Analyticity parameter ρ.
    #[arg(long)]
    pub rho: f64,
    /// Override the decay parameter r stored in the file.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Args, Debug)]
pub struct KamRunArgs {
    /// Model config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Nonresonance constant γ (overrides the config).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of KAM steps (overrides the config).
    #[arg(long)]
    pub steps: Option<u32>,
    /// JSON report path (default: the config's `out`, else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step CSV trace.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResonanceArgs {
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Nonresonance constant γ.
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Largest support of ℓ.
    #[arg(long, default_value_t = 3)]
    pub support: usize,
    /// Largest |ℓ_n|.
    #[arg(long, default_value_t = 3)]
    pub height: u32,
    /// Largest n₃*(ℓ).
    #[arg(long, default_value_t = 8)]
    pub n3max: u32,
    /// Largest |n| in the support (default: --n3max).
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smaller samples; runtime budgets not enforced.
    #[arg(long)]
    pub quick: bool,
    /// Also write the outcomes as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_DOMAIN,
        message: e.to_string(),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| domain(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn writable(p: &Option<PathBuf>) -> Result<(), Failure> {
    p.as_deref().map_or(Ok(()), |p| check_writable(p).map_err(domain))
}

fn build(a: &BuildArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::load(&a.config).map_err(domain)?;
    let out = a.out.clone().or(cfg.hamiltonian.clone());
    writable(&out)?;
    writable(&a.remainder)?;
    let (n, r) = build_hamiltonian(&cfg.model()).map_err(domain)?;
    let h = n.add(&r).map_err(domain)?;
    write_output(out.as_deref(), &write_hamiltonian(&h))?;
    if let Some(p) = &a.remainder {
        write_output(Some(p), &write_hamiltonian(&r))?;
    }
    Ok(EXIT_OK)
}

fn norm_cmd(a: &NormArgs) -> Result<i32, Failure> {
    let text = fs::read_to_string(&a.input).map_err(|e| domain(format!("cannot read {}: {e}", a.input.display())))?;
    let h = parse_hamiltonian(&text).map_err(domain)?;
    let m = h.meta();
    let ctx = NormContext::new(m.sigma, a.rho, a.r.unwrap_or(m.r), m.c).map_err(domain)?;
    let plus = norm_plus(&h.expand_j().map_err(domain)?, &ctx).map_err(domain)?;
    println!("terms {}", h.len());
    println!("norm {:e}", norm(&h, &ctx));
    println!("norm_plus {plus:e}");
    Ok(EXIT_OK)
}

fn kam_run(a: &KamRunArgs) -> Result<i32, Failure> {
    let mut cfg = RunConfig::load(&a.config).map_err(domain)?;
    if let Some(g) = a.gamma {
        cfg.gamma = g;
    }
    if let Some(s) = a.steps {
        cfg.steps = s;
    }
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if a.csv.is_some() {
        cfg.csv = a.csv.clone();
    }
    cfg.validate().map_err(domain)?;
    let kam = run_kam_with(&cfg.model(), cfg.kam_options()).map_err(domain)?;
    let status = kam.status;
    if let Some(p) = &cfg.csv {
        let f = fs::File::create(p).map_err(|e| domain(format!("cannot write {}: {e}", p.display())))?;
        write_trace_csv(&kam.trace, f).map_err(domain)?;
    }
    let message = kam.error_message.clone();
    let report = RunReport { config: cfg, kam };
    let json = report.to_json().map_err(domain)?;
    write_output(report.config.out.as_deref(), &(json + "\n"))?;
    if status == KamStatus::Completed {
        Ok(EXIT_OK)
    } else {
        eprintln!("kam-run: {status:?}: {}", message.unwrap_or_default());
        Ok(EXIT_DOMAIN)
    }
}

fn resonance(a: &ResonanceArgs) -> Result<i32, Failure> {
    writable(&a.out)?;
    let budget = EllBudget {
        max_support: a.support,
        max_height: a.height,
        max_n3star: a.n3max,
        n_max: a.n_max,
    };
    let est = estimate_resonant_measure(a.c, a.gamma, &budget, a.samples, a.seed).map_err(domain)?;
    let json = serde_json::to_string_pretty(&est).map_err(domain)?;
    write_output(a.out.as_deref(), &(json + "\n"))?;
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs) -> Result<i32, Failure> {
    writable(&a.json)?;
    let checks = run_suite(&SuiteOptions {
        seed: a.seed,
        quick: a.quick,
    });
    print!("{}", format_table(&checks));
    if let Some(p) = &a.json {
        write_output(Some(p), &serde_json::to_string_pretty(&checks).map_err(domain)?)?;
    }
    Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_DOMAIN })
}

pub fn run(cli: &Cli) -> Result<i32, Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure {
                code: EXIT_USAGE,
                message: "--threads must be at least 1".into(),
            });
        }
        // fails only if the pool is already set, as in repeated in-process calls
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Build(a) => build(a),
        Command::Norm(a) => norm_cmd(a),
        Command::KamRun(a) => kam_run(a),
        Command::Resonance(a) => resonance(a),
        Command::Verify(a) => verify(a),
    }
}

pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
