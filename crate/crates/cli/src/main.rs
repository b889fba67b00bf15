//! `hcr`: generate corpora, preprocess images, train, evaluate, sweep,
//! recognize single files and run the HTTP service.

use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use hcr_core::dataset::CODE_BITS;
use hcr_core::experiment::{self, SweepSpec};
use hcr_core::pipeline::{self, PipelineConfig};
use hcr_core::skeleton;
use hcr_core::train::{self, TrainConfig};
use hcr_core::{pnm, synth, Dataset, Mlp, Threshold};
use hcr_service::ServeConfig;

#[derive(Parser, Debug)]
#[command(name = "hcr", version, about = "Handwritten Farsi character recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic labeled corpus
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        per_class: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Smooth, binarize, thin and normalize an image into a 30x30 glyph
    Prep {
        #[arg(long = "in")]
        input: PathBuf,
        /// Glyph text file; printed to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// `otsu` or a fixed level 0-255 (ink is darker than the level)
        #[arg(long, default_value = "otsu", value_parser = parse_threshold)]
        threshold: Threshold,
        /// Emit the 10x10 pooled glyph instead
        #[arg(long)]
        pool: bool,
    },
    /// Train a network on a corpus and write it with a CSV report
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u32).range(1..))]
        hidden: u32,
        #[arg(long, default_value_t = 900, value_parser = parse_input_size)]
        input: usize,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the accuracy of a model on a corpus
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Split a corpus, train every hidden count x seed and print a results table
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [12u32, 24, 36],
              value_parser = clap::value_parser!(u32).range(1..))]
        hidden: Vec<u32>,
        /// Number of seeds per hidden count, starting at --seed
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 900, value_parser = parse_input_size)]
        input: usize,
        /// Fraction of the corpus used for training
        #[arg(long, default_value_t = 0.5)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        #[command(flatten)]
        train: TrainArgs,
        /// Also write the rows as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recognize the character in an image
    Recognize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the HTTP service
    Serve {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Live corpus that collected samples are appended to
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = hcr_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory with the built drawpad
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.2)]
    eta: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Stop once the mean pattern error drops below this
    #[arg(long, default_value_t = 0.05)]
    mse: f64,
}

impl TrainArgs {
    fn config(&self, seed: u64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            eta: self.eta,
            alpha: self.alpha,
            max_epochs: self.epochs,
            mse_threshold: self.mse,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    if s.eq_ignore_ascii_case("otsu") {
        return Ok(Threshold::Otsu);
    }
    s.parse::<u8>()
        .map(Threshold::Fixed)
        .map_err(|_| format!("expected `otsu` or a level 0-255, got {s:?}"))
}

fn parse_input_size(s: &str) -> Result<usize, String> {
    match s {
        "900" => Ok(900),
        "100" => Ok(100),
        _ => Err(format!("input size must be 900 (30x30) or 100 (10x10), got {s:?}")),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::load(path).with_context(|| format!("reading corpus {}", path.display()))
}

fn load_model(path: &Path) -> Result<Mlp> {
    Mlp::load(path).with_context(|| format!("reading model {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { out, per_class, seed } => {
            let corpus = synth::corpus(per_class as usize, seed)?;
            corpus.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} samples to {}", corpus.len(), out.display());
        }
        Command::Prep {
            input,
            out,
            threshold,
            pool,
        } => {
            let img = pnm::read(&input).with_context(|| format!("reading image {}", input.display()))?;
            let mut glyph = pipeline::preprocess(&img, threshold)?;
            if pool {
                glyph = skeleton::pool(&glyph)?;
            }
            match out {
                Some(path) => std::fs::write(&path, glyph.to_string())
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{glyph}"),
            }
        }
        Command::Train {
            data,
            hidden,
            input,
            train: args,
            seed,
            out,
        } => {
            let corpus = load_dataset(&data)?;
            let cfg = args.config(seed)?;
            let net = Mlp::init(input, hidden as usize, CODE_BITS, seed)?;
            let (net, report) = train::train(net, &corpus, &cfg)?;
            net.save(&out).with_context(|| format!("writing {}", out.display()))?;
            let report_path = train::report_path(&out);
            std::fs::write(&report_path, report.to_csv())
                .with_context(|| format!("writing {}", report_path.display()))?;
            println!(
                "{} epochs ({}), final E {:.6}, train accuracy {:.1}%",
                report.epochs_run,
                report.stop_reason.as_str(),
                report.mse_per_epoch.last().copied().unwrap_or(f64::NAN),
                report.final_train_accuracy * 100.0
            );
            println!("wrote {} and {}", out.display(), report_path.display());
        }
        Command::Eval { data, model } => {
            let corpus = load_dataset(&data)?;
            let net = load_model(&model)?;
            let accuracy = train::evaluate(&net, &corpus)?;
            println!("accuracy {:.1}%", accuracy * 100.0);
        }
        Command::Sweep {
            data,
            hidden,
            seeds,
            seed,
            input,
            split,
            split_seed,
            train: args,
            csv,
        } => {
            let corpus = load_dataset(&data)?;
            let (train_set, test_set) = corpus.split(split, split_seed)?;
            let spec = SweepSpec {
                hidden_counts: hidden.iter().map(|&h| h as usize).collect(),
                cfg: args.config(0)?,
                input_size: input,
                seeds: (seed..seed + seeds).collect(),
            };
            let rows = experiment::run_sweep(&spec, &train_set, &test_set)?;
            println!(
                "{} train / {} test samples, {} seed(s) per row",
                train_set.len(),
                test_set.len(),
                seeds
            );
            print!("{}", experiment::render_table(&rows, spec.input_size));
            if let Some(path) = csv {
                std::fs::write(&path, experiment::to_csv(&rows))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Recognize { input, model } => {
            let net = load_model(&model)?;
            let cfg = PipelineConfig::for_model(&net)?;
            let img = pnm::read(&input).with_context(|| format!("reading image {}", input.display()))?;
            let rec = pipeline::recognize(&img, &cfg)?;
            println!("{} ({}, label {})", rec.label.letter(), rec.label.name(), rec.label.index());
            let outputs: Vec<String> = rec.outputs.iter().map(|o| format!("{o:.4}")).collect();
            println!("outputs {}", outputs.join(" "));
        }
        Command::Serve {
            model,
            data,
            port,
            host,
            assets,
        } => {
            if let Some(dir) = &assets {
                if !dir.is_dir() {
                    bail!("assets directory {} does not exist", dir.display());
                }
            }
            env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
            let cfg = ServeConfig {
                model,
                data,
                addr: SocketAddr::new(host, port),
                assets,
            };
            tokio::runtime::Runtime::new()?.block_on(hcr_service::serve(cfg))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::FAILURE,
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
