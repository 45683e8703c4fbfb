use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meta_sched::experiment::{cmd_compare, cmd_run, cmd_sweep, CompareOptions, RunOptions, SweepOptions};

#[derive(Parser)]
#[command(name = "meta-sched", version, about = "Learned objective sampling on a synthetic multi-objective trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sampler on one seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every sampler on every seed and compare against a reference.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Reference sampler for paired comparisons.
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat the comparison over a grid of entropy weights and meta lengths.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "lambda", value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[arg(long = "meta-length", value_delimiter = ',')]
        meta_lengths: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => cmd_run(&RunOptions { config, seed, out }).map(|dir| {
            println!("wrote {}", dir.display());
        }),
        Command::Compare { config, reference, out } => {
            cmd_compare(&CompareOptions { config, reference, out }).map(|summary| {
                for s in summary.samplers {
                    println!(
                        "{}\tmean {:.6}\tstd {:.6}\twin_rate {:.3}",
                        s.label, s.mean_terminal_summed_loss, s.std_terminal_summed_loss, s.win_rate
                    );
                }
            })
        }
        Command::Sweep {
            config,
            lambdas,
            meta_lengths,
            out,
        } => cmd_sweep(&SweepOptions {
            config,
            lambdas,
            meta_lengths,
            out,
        })
        .map(|cells| println!("ran {} cells", cells.len())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
