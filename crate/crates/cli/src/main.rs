use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use tappert_core::config::RunConfig;
use tappert_core::harness::{self, experiment_catalog, Runner};
use tappert_core::snapshot::write_atomic;
use tappert_core::ExperimentSpec;

#[derive(Parser, Debug)]
#[command(name = "tappert", version, about = "Waveguide ABC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings applied after the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the experiment catalogue.
    List,
    /// Run the truncated simulation and write `snap_<step>.txt` files.
    Run(Common),
    /// Run the truncated/extended pair and write `errors.csv`.
    Compare(Common),
    /// Time the boundary kinds and write `timing.csv`.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        early: usize,
        #[arg(long, default_value_t = 1000)]
        late: usize,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
    },
}

fn load(common: &Common) -> Result<(ExperimentSpec, PathBuf)> {
    let mut cfg = RunConfig::load(&common.config)?;
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    let spec = cfg.resolve()?;
    let out = common
        .out
        .clone()
        .or(cfg.out_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    Ok((spec, out))
}

fn write(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn list() {
    for e in experiment_catalog() {
        println!("{:<16} {}", e.name, e.description);
    }
}

fn run(common: &Common) -> Result<()> {
    let (spec, out) = load(common)?;
    let prep = spec.prepare()?;
    let mut count = 0usize;
    Runner::new(&prep, true)?.run_with(prep.steps, spec.stride, |snap| {
        snap.write(out.join(snap.file_name()))?;
        count += 1;
        Ok(())
    })?;
    println!(
        "{}: {} steps, tau = {:.6e}, {count} snapshots in {}",
        spec.name,
        prep.steps,
        prep.tau(),
        out.display()
    );
    Ok(())
}

fn compare(common: &Common) -> Result<()> {
    let (spec, out) = load(common)?;
    let series = harness::compare(&spec)?;
    let path = out.join("errors.csv");
    write(&path, &series.to_csv())?;
    match series.last() {
        Some(s) => println!(
            "{}: t = {:.4}, E = {}, e = {:.6e} -> {}",
            spec.name,
            s.time,
            s.relative.map_or("nan".to_string(), |v| format!("{v:.6e}")),
            s.max_abs,
            path.display()
        ),
        None => bail!("comparison produced no samples"),
    }
    Ok(())
}

fn bench(common: &Common, early: usize, late: usize, repeats: usize) -> Result<()> {
    let (spec, out) = load(common)?;
    let report = harness::timing_report(&spec, early, late, repeats)?;
    write(&out.join("timing.csv"), &report.to_csv())?;
    print!("{}", report.to_table());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => {
            list();
            Ok(())
        }
        Command::Run(c) => run(c),
        Command::Compare(c) => compare(c),
        Command::Bench {
            common,
            early,
            late,
            repeats,
        } => bench(common, *early, *late, *repeats),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
