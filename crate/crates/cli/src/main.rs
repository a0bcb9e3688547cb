use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use portfolio_cli::{config, generate, report, run};

#[derive(Parser)]
#[command(name = "portfolio", version, about = "Heterogeneous island portfolio experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment file.
    Run {
        config: PathBuf,
        /// Output root; overrides the file and the environment.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mean, min and max final objective per configuration.
    ReportTable {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Runs per configuration within the lowest quartile of all finals.
    ReportQuartiles {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Configurations to list; every configuration still feeds the pool.
        #[arg(long, value_delimiter = ';')]
        only: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Random bin packing instance with volumes in (0, 1).
    GenerateBpp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Check an experiment file without running it.
    ValidateConfig { config: PathBuf },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config: path, output } => {
            let mut plan = config::load(&path)?;
            if let Some(root) = output {
                plan.output_root = root;
            }
            let batch = run::run_batch(&plan, |r| {
                let best = r.best.map_or("-".to_string(), |b| b.to_string());
                match &r.aborted {
                    None => eprintln!("run {} seed {}: best {best}", r.run, r.seed),
                    Some(why) => eprintln!("run {} seed {}: best {best} (aborted: {why})", r.run, r.seed),
                }
            })?;
            println!("{}", batch.display());
        }
        Command::ReportTable { dirs, format } => {
            let t = report::table(&report::load_summaries(&dirs)?)?;
            print!("{}", render(format, t.to_text(), t.to_csv()));
        }
        Command::ReportQuartiles { dirs, only, format } => {
            let q = report::quartiles(&report::load_summaries(&dirs)?, only.as_deref())?;
            print!("{}", render(format, q.to_text(), q.to_csv()));
        }
        Command::GenerateBpp { n, seed, out } => {
            let inst = generate::random_bpp(n, seed)?;
            fs::write(&out, inst.to_text()).with_context(|| format!("cannot write {}", out.display()))?;
        }
        Command::ValidateConfig { config: path } => {
            let plan = config::load(&path)?;
            println!("ok: {} {} with {} run(s)", plan.benchmark, plan.label, plan.seeds.len());
        }
    }
    Ok(())
}

fn render(format: Format, text: String, csv: String) -> String {
    match format {
        Format::Text => text,
        Format::Csv => csv,
    }
}
