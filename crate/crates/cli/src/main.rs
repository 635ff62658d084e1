//! `deleda` command-line runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use deleda::engine::Checkpoint;
use deleda::evaluation::Evaluator;
use deleda::experiment::{self, ExperimentConfig, ExperimentData};
use deleda::lda::{self, DirichletParams, TopicMatrix};
use deleda::network;
use deleda::rng::{self, streams};
use deleda::{Error, Result};

const OUTPUT_ENV: &str = "DELEDA_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "deleda",
    version,
    about = "Decentralized LDA experiments via gossip-averaged online EM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config file (`key = value` lines). Defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides a config entry, e.g. `--set mode=async`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; takes precedence over DELEDA_OUTPUT_DIR and `output.dir`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write ground truth, node shards, test set and graph.
    Generate(ConfigArgs),
    /// Train one mode and write trajectory.csv, checkpoint.txt and report.txt.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Continue from a checkpoint written by an earlier run of the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint against a generated data directory.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Directory written by `generate`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 20)]
        particles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        smoothing: f64,
    },
    /// Summarize trajectory CSVs against the first one.
    Compare {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Also report the first iteration with lp_rel_error at or below this value.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print λ2 and the spectral gap of the expected averaging matrix.
    Spectral {
        #[arg(long, value_enum, default_value_t = TopologyArg::Complete)]
        topology: TopologyArg,
        #[arg(long, short, default_value_t = 50)]
        n: usize,
        #[arg(long, short, default_value_t = 4)]
        k: usize,
        #[arg(long, short, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Complete,
    Ring,
    WattsStrogatz,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

impl ConfigArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let base = match &self.config {
            Some(path) => read(path)?,
            None => String::new(),
        };
        let mut text = String::new();
        let keys: Vec<&str> = self
            .overrides
            .iter()
            .map(|o| {
                o.split_once('=')
                    .map(|(k, _)| k.trim())
                    .ok_or_else(|| Error::Config(format!("override `{o}` is not KEY=VALUE")))
            })
            .collect::<Result<_>>()?;
        for line in base.lines() {
            let key = line
                .split('#')
                .next()
                .unwrap_or("")
                .split('=')
                .next()
                .unwrap_or("")
                .trim();
            if !keys.contains(&key) {
                text.push_str(line);
                text.push('\n');
            }
        }
        for o in &self.overrides {
            text.push_str(o);
            text.push('\n');
        }
        let mut cfg = ExperimentConfig::from_text(&text)?;
        if let Some(out) = self
            .out
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        {
            cfg.output_dir = out;
        }
        let dir = cfg.output_dir.clone();
        Ok((cfg, dir))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let (cfg, dir) = args.load()?;
            let data = ExperimentData::generate(&cfg)?;
            let graph = match cfg.mode {
                deleda::engine::Mode::Centralized => None,
                _ => Some(cfg.topology.build(cfg.n_nodes, cfg.master_seed)?),
            };
            data.write(&dir, graph.as_ref())?;
            fs::write(dir.join("config.txt"), cfg.to_text())?;
            println!(
                "wrote {} shards and {} test documents to {}",
                data.shards.len(),
                data.test_docs.len(),
                dir.display()
            );
        }
        Command::Train { config, resume } => {
            let (cfg, dir) = config.load()?;
            let cp = resume.map(|p| Checkpoint::from_text(&read(&p)?)).transpose()?;
            log::info!("training {} for {} iterations", cfg.mode, cfg.iterations);
            let out = experiment::run_experiment_from(&cfg, cp.as_ref())?;
            out.write(&dir)?;
            fs::write(dir.join("config.txt"), cfg.to_text())?;
            print!("{}", experiment::format_report(&out.final_report));
        }
        Command::Eval {
            checkpoint,
            data,
            particles,
            seed,
            smoothing,
        } => {
            let cp = Checkpoint::from_text(&read(&checkpoint)?)?;
            let beta_star = TopicMatrix::from_text(&read(&data.join("beta_star.txt"))?)?;
            let alpha_star = DirichletParams::from_text(&read(&data.join("alpha_star.txt"))?)?;
            let test = lda::parse_corpus(&read(&data.join("test.txt"))?)?;
            let betas = cp
                .nodes
                .iter()
                .map(|n| lda::m_step(&n.stats, smoothing))
                .collect::<Result<Vec<_>>>()?;
            let evaluator = Evaluator::new(test.docs, beta_star, alpha_star, particles, seed)?;
            print!("{}", experiment::format_report(&evaluator.evaluate(&betas)?));
        }
        Command::Compare { csv, threshold } => {
            let runs = csv
                .iter()
                .map(|p| Ok((p.display().to_string(), experiment::read_csv(&read(p)?)?)))
                .collect::<Result<Vec<_>>>()?;
            print!("{}", experiment::format_summary(&experiment::compare_runs(&runs)?));
            if let Some(t) = threshold {
                for (name, rows) in &runs {
                    match experiment::iterations_to_threshold(rows, t) {
                        Some(it) => println!("{name}: reaches {t} at iteration {it}"),
                        None => println!("{name}: never reaches {t}"),
                    }
                }
            }
        }
        Command::Spectral {
            topology,
            n,
            k,
            p,
            seed,
        } => {
            let graph = match topology {
                TopologyArg::Complete => network::complete_graph(n)?,
                TopologyArg::Ring => network::ring_lattice(n, k)?,
                TopologyArg::WattsStrogatz => network::watts_strogatz(n, k, p, &mut rng::stream(seed, streams::GRAPH))?,
            };
            let sg = network::spectral_gap(&graph)?;
            println!("lambda2 = {}\ngap = {}", sg.lambda2, sg.gap);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
