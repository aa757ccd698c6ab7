use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tin::config::{ModeName, Overrides};
use tin::pipeline;
use tin_core::data::EpochLog;

#[derive(Parser)]
#[command(name = "tin", version, about = "Interactiveness-aware HOI detection pipeline", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic train and test manifests.
    Synth(Common),
    /// Train and write the checkpoint and loss curves.
    Train(Common),
    /// Score the test split and dump predictions.
    Infer(Common),
    /// Evaluate dumped predictions.
    Eval(Common),
    /// Dump the LIS curve and the part-pattern table.
    Inspect(Common),
    /// synth, train, infer and eval in one go.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    /// Discriminator training sets, comma separated.
    #[arg(long = "d-train", value_name = "A[,B]", value_delimiter = ',')]
    d_train: Option<Vec<String>>,
    /// Classifier training set; also the test set.
    #[arg(long = "c-train", value_name = "X")]
    c_train: Option<String>,
    /// NIS threshold.
    #[arg(long, value_name = "R")]
    alpha: Option<f64>,
    #[arg(long = "no-nis")]
    no_nis: bool,
    #[arg(long = "no-lis")]
    no_lis: bool,
    #[arg(long = "shared-part-classifier")]
    shared_part_classifier: bool,
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    /// Directory holding the manifests; defaults to --out.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Run directory.
    #[arg(long, value_name = "DIR", default_value = "tin-run")]
    out: PathBuf,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            mode: self.mode,
            d_train: self.d_train.clone(),
            c_train: self.c_train.clone(),
            alpha: self.alpha,
            no_nis: self.no_nis,
            no_lis: self.no_lis,
            shared_part_classifier: self.shared_part_classifier,
            epochs: self.epochs,
        }
    }

    fn data_dir(&self) -> PathBuf {
        self.data.clone().unwrap_or_else(|| self.out.clone())
    }
}

fn progress(stage: &str, l: &EpochLog) {
    eprintln!(
        "{stage} epoch {:>3}  L_D {:.4}  L_C {:.4}  pairs {}  lr {:.2e}",
        l.epoch, l.loss_d, l.loss_c, l.samples, l.lr
    );
}

fn run(cli: Cli) -> tin::Result<()> {
    let (Command::Synth(c) | Command::Train(c) | Command::Infer(c) | Command::Eval(c) | Command::Inspect(c) | Command::Run(c)) =
        &cli.command;
    let mut file = pipeline::config_file(c.config.as_deref())?;
    c.overrides().apply(&mut file);
    let cfg = file.to_run_config()?;
    let (data, out) = (c.data_dir(), c.out.clone());
    match cli.command {
        Command::Synth(_) => {
            for p in pipeline::synth(&cfg, &data)? {
                println!("{}", p.display());
            }
        }
        Command::Train(_) => {
            pipeline::train(&cfg, &data, &out, progress)?;
            println!("{}", out.join(pipeline::CHECKPOINT).display());
        }
        Command::Infer(_) => {
            pipeline::infer(&cfg, &data, &out)?;
            print!("{}", std::fs::read_to_string(out.join(pipeline::SUPPRESSION)).unwrap_or_default());
        }
        Command::Eval(_) => {
            pipeline::eval(&cfg, &data, &out)?;
            print!("{}", std::fs::read_to_string(out.join(pipeline::EVAL_TABLE)).unwrap_or_default());
        }
        Command::Inspect(_) => {
            for p in pipeline::inspect(&cfg, &data, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Run(_) => {
            pipeline::synth(&cfg, &data)?;
            pipeline::train(&cfg, &data, &out, progress)?;
            pipeline::infer(&cfg, &data, &out)?;
            pipeline::eval(&cfg, &data, &out)?;
            print!("{}", std::fs::read_to_string(out.join(pipeline::EVAL_TABLE)).unwrap_or_default());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
