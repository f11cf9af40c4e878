use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use railframe::episode::{load_episodes, save_episodes};
use railframe::harness::{
    aggregate, gen_dataset, read_records, run_grid, train_strategy, write_records, write_report, ExperimentConfig,
    GridKind, HaltPolicy,
};
use railframe::policy::Checkpoint;
use railframe::representation::{RepresentationStrategy, StrategyKind};
use railframe::Execution;

#[derive(Parser)]
#[command(name = "railframe", version, about = "Rail-frame representation benchmark")]
struct Cli {
    /// Experiment configuration (JSON, as printed by `dump-config`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect expert demonstrations in environments A and B.
    GenData {
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a chunked policy under one representation strategy.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        strategy: StrategyKind,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        chunk: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on the ID/OOD grid in environment B.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value = "quick")]
        grid: GridKind,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        halt_policy: Option<HaltPolicy>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate every `records_*.csv` in a directory into tables and a chart.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
    },
    /// Print the default (or loaded) configuration as one JSON line.
    DumpConfig,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };

    match cli.command {
        Command::GenData { episodes, seed, out } => {
            let data = gen_dataset(&cfg, episodes, seed, exec)?;
            save_episodes(&data, &out)?;
            let steps: usize = data.iter().map(|e| e.len()).sum();
            println!("wrote {} episodes ({steps} steps) to {}", data.len(), out.display());
        }
        Command::Train {
            data,
            strategy,
            steps,
            chunk,
            seed,
            out,
        } => {
            if let Some(seed) = seed {
                cfg.training.seed = seed;
            }
            let episodes = load_episodes(&data)?;
            let trained = train_strategy(&episodes, &RepresentationStrategy::new(strategy), &cfg, steps, chunk, exec)?;
            trained.checkpoint.save(&out)?;
            let curve_path = out.with_extension("curve.csv");
            write_curve(&curve_path, &trained.curve)?;
            let last = trained.curve.last().map_or(f64::NAN, |p| p.loss);
            println!(
                "trained {strategy} for {} steps, final loss {last:.5}; wrote {} and {}",
                trained.curve.len(),
                out.display(),
                curve_path.display()
            );
        }
        Command::Eval {
            ckpt,
            grid,
            seeds,
            halt_policy,
            out,
        } => {
            if let Some(p) = halt_policy {
                cfg.eval.halt_policy = p;
            }
            let seeds = seeds.unwrap_or_else(|| cfg.eval.seeds.clone());
            if seeds.is_empty() {
                bail!("--seeds must name at least one seed");
            }
            let ckpt = Checkpoint::load(&ckpt)?;
            let spec = cfg.grid.select(grid, cfg.eval.quick_stride);
            let records = run_grid(&ckpt, &spec, &cfg, &seeds, exec)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let path = out.join(format!("records_{}.csv", ckpt.strategy.kind.token()));
            write_records(&records, &path)?;
            print_table(&aggregate(&records)?);
            println!("wrote {} records to {}", records.len(), path.display());
        }
        Command::Report { dir } => {
            let mut records = Vec::new();
            for path in record_files(&dir)? {
                records.extend(read_records(&path)?);
            }
            let table = aggregate(&records)?;
            write_report(&table, &records, &dir)?;
            print_table(&table);
            println!("wrote report for {} records to {}", records.len(), dir.display());
        }
        Command::DumpConfig => println!("{}", cfg.to_json_line()),
    }
    Ok(())
}

fn record_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("records_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn write_curve(path: &Path, curve: &[railframe::policy::CurvePoint]) -> Result<()> {
    let mut text = String::from("step,lr,loss\n");
    for p in curve {
        text.push_str(&format!("{},{:e},{}\n", p.step, p.lr, p.loss));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_table(table: &railframe::harness::ReportTable) {
    let cell = |s: Option<railframe::harness::SplitStats>| {
        s.map_or_else(|| "-".to_string(), |s| format!("{:.2} ± {:.2} ({:.1}%)", s.mean, s.sd, 100.0 * s.success))
    };
    println!("{:<12} {:<24} {:<24} {:<24}", "strategy", "ID", "OOD", "total");
    for row in &table.rows {
        println!(
            "{:<12} {:<24} {:<24} {:<24}",
            row.strategy,
            cell(row.id),
            cell(row.ood),
            cell(row.total)
        );
    }
}
