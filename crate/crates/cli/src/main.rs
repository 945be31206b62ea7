//! `kinfluid`: runs, ε-sweeps, diagnostics from snapshots and rate refits.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinfluid::harness::{
    check_tolerances, diagnose_snapshots, read_summary, refit_summary, run_epns, run_sweep, run_vpns, vpns_csv,
    write_epns_outputs, write_summary, write_sweep_outputs, write_vpns_outputs, ExperimentConfig, HarnessError, Mode,
};

#[derive(Parser)]
#[command(name = "kinfluid", version, about = "Kinetic-fluid hydrodynamic-limit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment the config describes.
    Run(RunArgs),
    /// Run an epsilon sweep and fit rates.
    Sweep(RunArgs),
    /// Recompute diagnostics from the snapshots in --out.
    Diag {
        #[arg(long)]
        out: PathBuf,
    },
    /// Refit rates from the sweep summary in --out.
    Fit {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// key=value or section.key=value; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Exit with status 4 when a configured tolerance is not met.
    #[arg(long)]
    check: bool,
}

fn init_threads() -> Result<(), HarnessError> {
    let Ok(raw) = std::env::var("EPNS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| HarnessError::Config(format!("EPNS_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn run(args: &RunArgs, force_sweep: bool) -> Result<(), HarnessError> {
    let mut overrides = args.overrides.clone();
    if force_sweep {
        overrides.push("mode=\"sweep\"".into());
    }
    let cfg = ExperimentConfig::load(&args.config, &overrides)?;
    let metrics = match cfg.mode {
        Mode::Vpns | Mode::KineticOnly => {
            let r = run_vpns(&cfg)?;
            write_vpns_outputs(&r, &cfg, &args.out)?;
            let last = r.records.last().expect("at least the initial record");
            println!(
                "t = {:.4}  mass = {:.12e}  F = {:.6e}  residual = {:.3e}  mod = {:.3e}",
                last.t,
                last.mass,
                last.free_energy,
                last.entropy_residual,
                last.mod_energy + last.coulomb_mod
            );
            r.metrics()
        }
        Mode::Epns => {
            let r = run_epns(&cfg)?;
            write_epns_outputs(&r, &cfg, &args.out)?;
            let last = r.rows.last().expect("at least the initial row");
            println!("t = {:.4}  energy residual = {:.3e}  tracker = {:.6e}", last.t, last.energy_residual, last.tracker_s);
            r.metrics()
        }
        Mode::Sweep => {
            let (summary, err) = run_sweep(&cfg);
            write_sweep_outputs(&summary, &cfg, &args.out)?;
            if let Some(e) = err {
                return Err(e);
            }
            for (name, fit) in &summary.fits {
                println!("{name}: slope = {:.4}  r2 = {:.4}", fit.slope, fit.r2);
            }
            summary.metrics()
        }
    };
    if args.check {
        check_tolerances(&metrics, &cfg.output.tolerances)?;
        println!("check passed ({} tolerances)", cfg.output.tolerances.len());
    }
    Ok(())
}

fn diag(dir: &Path) -> Result<(), HarnessError> {
    let r = diagnose_snapshots(dir)?;
    let side = kinfluid::spectral::read_sidecar(&dir.join("kinetic.snap"))?;
    let sigma = side.attributes.get("sigma").copied().unwrap_or(1.0);
    let text = vpns_csv(&[r], sigma);
    std::fs::write(dir.join("diag.csv"), &text)?;
    print!("{text}");
    Ok(())
}

fn fit(dir: &Path) -> Result<(), HarnessError> {
    let path = dir.join("summary.json");
    let refit = refit_summary(&read_summary(&path)?)?;
    write_summary(&path, &refit)?;
    if let Some(fits) = refit.get("fits").and_then(|f| f.as_object()) {
        for (name, f) in fits {
            println!("{name}: slope = {:.4}  r2 = {:.4}", f["slope"].as_f64().unwrap_or(f64::NAN), f["r2"].as_f64().unwrap_or(f64::NAN));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Run(a) => run(a, false),
        Command::Sweep(a) => run(a, true),
        Command::Diag { out } => diag(out),
        Command::Fit { out } => fit(out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kinfluid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
