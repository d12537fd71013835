use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bcdsr::experiment::{run_table, sweep, write_sweep, Axis, SweepPlan, SweepResults};
use bcdsr::mobility::MobilityModel;
use bcdsr::plot::{emit_plot_data, Figure, ALL_FIGURES};
use bcdsr::protocol::ProtocolKind;
use bcdsr::ScenarioConfig;

#[derive(Parser)]
#[command(name = "bcdsr", version, about = "FANET routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario once per configured seed.
    Run {
        config: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for config.toml, metrics.csv and per-seed traces;
        /// metrics go to stdout without it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one axis over seeds 1..=k.
    Sweep {
        config: PathBuf,
        /// network_size or data_rate.
        #[arg(long)]
        axis: String,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Comma-separated protocols; all by default.
        #[arg(long, value_delimiter = ',')]
        protocols: Vec<String>,
        /// Comma-separated mobility models; the config's by default.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        /// Parent of the content-named output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Write figure series from a sweep's results.
    Emit {
        /// results.csv or the sweep directory holding it.
        results: PathBuf,
        /// fig5, fig6a..fig6d, fig7a..fig7d, or all.
        #[arg(long)]
        figure: String,
        /// Output directory; defaults to the results' directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run_cmd(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let cfg = load(config)?;
    let seeds = match seed {
        Some(s) => vec![s],
        None => cfg.seeds.clone(),
    };
    if seeds.is_empty() {
        bail!("no seeds to run");
    }
    let mut runs = Vec::new();
    for s in seeds {
        let output = bcdsr::run(&cfg, s).with_context(|| format!("seed {s}"))?;
        runs.push((s, output));
    }
    let table = run_table(&cfg, &runs);
    let Some(dir) = out else {
        print!("{table}");
        return Ok(());
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.toml"), cfg.echo())?;
    std::fs::write(dir.join("metrics.csv"), table)?;
    for (s, output) in &runs {
        if let Some(traces) = &output.traces {
            let sub = dir.join(format!("seed-{s}"));
            traces.write_to(&sub).with_context(|| format!("writing {}", sub.display()))?;
        }
    }
    println!("{}", dir.display());
    Ok(())
}

fn sweep_cmd(
    config: &Path,
    axis: &str,
    seeds: u64,
    protocols: &[String],
    models: &[String],
    out: &Path,
) -> Result<()> {
    let cfg = load(config)?;
    let axis = Axis::parse(axis).with_context(|| format!("unknown axis `{axis}` (network_size, data_rate)"))?;
    let mut plan = SweepPlan::new(cfg, axis, seeds);
    if !protocols.is_empty() {
        plan.protocols = protocols
            .iter()
            .map(|p| ProtocolKind::parse(p).with_context(|| format!("unknown protocol `{p}`")))
            .collect::<Result<_>>()?;
    }
    if !models.is_empty() {
        plan.models = models
            .iter()
            .map(|m| MobilityModel::parse(m).with_context(|| format!("unknown mobility model `{m}`")))
            .collect::<Result<_>>()?;
    }
    let results = sweep(&plan)?;
    let dir = write_sweep(out, &plan, &results)?;
    println!("{}", dir.display());
    Ok(())
}

fn emit_cmd(results: &Path, figure: &str, out: Option<PathBuf>) -> Result<()> {
    let csv = if results.is_dir() { results.join("results.csv") } else { results.to_path_buf() };
    let text = std::fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
    let parsed = SweepResults::parse(&text).map_err(anyhow::Error::msg).with_context(|| format!("parsing {}", csv.display()))?;
    let ids: Vec<&str> = if figure == "all" { ALL_FIGURES.to_vec() } else { vec![figure] };
    let dir = out.unwrap_or_else(|| csv.parent().map(Path::to_path_buf).unwrap_or_default());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for id in ids {
        let fig = Figure::parse(id).with_context(|| format!("unknown figure `{id}`"))?;
        let series = emit_plot_data(&parsed, fig)?;
        let path = dir.join(format!("{id}.csv"));
        std::fs::write(&path, series).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => run_cmd(&config, seed, out),
        Command::Sweep { config, axis, seeds, protocols, models, out } => {
            sweep_cmd(&config, &axis, seeds, &protocols, &models, &out)
        }
        Command::Emit { results, figure, out } => emit_cmd(&results, &figure, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
