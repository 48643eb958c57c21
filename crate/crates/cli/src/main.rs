use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lae_isac::agent::SchemeKind;
use lae_isac::experiment::{
    average_runs, gradient_suite, load_config, report, run_repeats, save_agent, save_config, sweep, Axis, RunConfig, RunOptions,
    FD_STEP, FD_TOL,
};
use std::path::{Path, PathBuf};
use std::time::Duration;

const SEED_ENV: &str = "LAE_ISAC_SEED";

#[derive(Parser)]
#[command(name = "lae-isac", version, about = "Train and evaluate joint beamforming and UAV trajectory learners")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one scheme and write metrics, plots and checkpoints.
    Run(RunArgs),
    /// Train every listed scheme across the M or T axis.
    Sweep(SweepArgs),
    /// Compare analytic and finite-difference gradients of the learner.
    Gradcheck {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; missing keys take the full-scale defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    /// Overridden by LAE_ISAC_SEED when that is set.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Stop gracefully once this many seconds have passed, keeping partial metrics.
    #[arg(long)]
    max_wall_seconds: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scheme: Option<SchemeKind>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    axis: Axis,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',', default_value = "deeplsc,cne,cer,w,ac2")]
    schemes: Vec<SchemeKind>,
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_ENV}={s} is not an unsigned integer"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{SEED_ENV}: {e}"),
    }
}

fn resolve(c: &Common) -> Result<(RunConfig, RunOptions)> {
    let mut cfg = match &c.config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(e) = c.episodes {
        cfg.episodes = e;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = seed_from_env()? {
        cfg.seed = s;
    }
    let max_wall = match c.max_wall_seconds {
        Some(s) if !(s >= 0.0 && s.is_finite()) => bail!("--max-wall-seconds must be a non-negative number, got {s}"),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    cfg.validate()?;
    Ok((cfg, RunOptions { max_wall }))
}

fn mkdir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let (mut cfg, opts) = resolve(&a.common)?;
    if let Some(s) = a.scheme {
        cfg.scheme = s;
    }
    if a.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let out = &a.common.out;
    mkdir(out)?;
    save_config(&out.join("config.toml"), &cfg)?;
    let runs = run_repeats(&cfg, a.repeats, opts)?;
    let ckpt = out.join("checkpoints");
    mkdir(&ckpt)?;
    for (k, r) in runs.iter().enumerate() {
        let seed = lae_isac::rng::repeat_seed(cfg.seed, k as u64);
        save_agent(&ckpt, &format!("repeat{k}"), &r.agent, seed, r.metrics.len() as u64)?;
        if a.repeats > 1 {
            report(&r.metrics, &RunConfig { seed, ..cfg.clone() }, &out.join(format!("repeat{k}")))?;
        }
    }
    let metrics: Vec<_> = runs.into_iter().map(|r| r.metrics).collect();
    let merged = if metrics.len() == 1 { metrics.into_iter().next().expect("one run") } else { average_runs(&metrics) };
    let summary = report(&merged, &cfg, out)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if summary.truncated {
        eprintln!("stopped early at the wall-clock budget after {} episodes", summary.episodes);
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let (cfg, opts) = resolve(&a.common)?;
    if a.schemes.is_empty() {
        bail!("--schemes must name at least one scheme");
    }
    let out = &a.common.out;
    mkdir(out)?;
    save_config(&out.join("config.toml"), &cfg)?;
    let table = sweep(&cfg, a.axis, &a.schemes, opts)?;
    let text = table.render();
    std::fs::write(out.join("sweep.txt"), &text)?;
    std::fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&table)?)?;
    print!("{text}");
    Ok(())
}

fn cmd_gradcheck(seed: u64) -> Result<()> {
    let mut ok = true;
    for (name, rep) in gradient_suite(seed)? {
        let verdict = if rep.passed() { "ok" } else { "FAILED" };
        println!(
            "{name:<16} {verdict:<6} checked {:>5}  max rel error {:.3e}  kinks {}  (h {FD_STEP:e}, tol {FD_TOL:e})",
            rep.checked,
            rep.max_rel_error,
            rep.kinks.len()
        );
        ok &= rep.passed();
    }
    if !ok {
        bail!("gradient check failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Gradcheck { seed } => cmd_gradcheck(seed),
    }
}
