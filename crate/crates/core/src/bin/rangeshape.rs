//! Command-line front end. Exit status: 0 success, 1 error, 2 empty report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rangeshape::mc::McSetup;
use rangeshape::pipeline::{self, Outcome, Overrides, PipelineConfig, ProbValidation};
use rangeshape::sim::LineMode;

#[derive(Parser)]
#[command(
    name = "rangeshape",
    version,
    about = "Polygon shape estimation from location-unknown distance sensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Lines crossing the disk Ω
    Through,
    /// Lines whose sensing strip reaches Ω
    Monitor,
}

impl From<Mode> for LineMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Through => LineMode::ThroughOmega,
            Mode::Monitor => LineMode::MonitorOmega,
        }
    }
}

#[derive(Args, Default)]
struct Tuning {
    /// Override the scenario's random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Sensor line distribution
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Standard deviation, in radians, of the noise on the slope angle atan(s)
    #[arg(long = "noise-eps-s")]
    noise_eps_s: Option<f64>,
    /// Probability that a report is lost
    #[arg(long = "noise-eps-l")]
    noise_eps_l: Option<f64>,
    /// Minimum members for a class to be kept
    #[arg(long = "min-support")]
    min_support: Option<usize>,
    /// TOML file with segmentation and estimator thresholds
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Tuning {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            mode: self.mode.map(Into::into),
            epsilon_s: self.noise_eps_s,
            epsilon_l: self.noise_eps_l,
            min_support: self.min_support,
        }
    }

    fn config(&self) -> rangeshape::Result<PipelineConfig> {
        self.config
            .as_deref()
            .map_or(Ok(PipelineConfig::default()), PipelineConfig::load)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate sensor traces for a scenario
    Simulate {
        /// Scenario TOML file
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Extract observations from traces
    Analyze {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        known: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Estimate lengths, angles and the shape from observations
    Estimate {
        #[arg(long)]
        observations: PathBuf,
        #[arg(long)]
        known: PathBuf,
        /// Ground-truth scenario for error reporting
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// simulate, analyze and estimate in one go
    Pipeline {
        /// Scenario TOML file
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Compare detection probabilities with Monte Carlo frequencies
    ValidateProb {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "monitor")]
        mode: Mode,
    },
    /// Draw a report's best shape or a scenario polygon as SVG
    Plot {
        /// report.json or a scenario .toml
        input: PathBuf,
        /// Ground-truth scenario to overlay
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// SVG file to write
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_workers() -> Result<(), String> {
    let Ok(v) = std::env::var("RANGESHAPE_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("RANGESHAPE_WORKERS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("RANGESHAPE_WORKERS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli, args: Vec<String>) -> rangeshape::Result<Outcome> {
    match cli.command {
        Command::Simulate { scenario, out, tuning } => {
            pipeline::cmd_simulate(&scenario, &tuning.overrides(), &out, args)
        }
        Command::Analyze {
            traces,
            known,
            out,
            tuning,
        } => pipeline::cmd_analyze(&traces, &known, &tuning.config()?, &tuning.overrides(), &out, args),
        Command::Estimate {
            observations,
            known,
            scenario,
            out,
            tuning,
        } => pipeline::cmd_estimate(
            &observations,
            &known,
            scenario.as_deref(),
            &tuning.config()?,
            &tuning.overrides(),
            &out,
            args,
        ),
        Command::Pipeline { scenario, out, tuning } => {
            pipeline::cmd_pipeline(&scenario, &tuning.config()?, &tuning.overrides(), &out, args)
        }
        Command::ValidateProb {
            out,
            samples,
            seed,
            mode,
        } => {
            let mut setup = McSetup::new(samples, seed);
            setup.mode = mode.into();
            let v = ProbValidation {
                setup,
                ..Default::default()
            };
            pipeline::cmd_validate_prob(&v, &out, args)
        }
        Command::Plot { input, scenario, out } => {
            pipeline::cmd_plot(&input, scenario.as_deref(), &out)?;
            Ok(Outcome {
                outputs: vec![out],
                ..Default::default()
            })
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if let Err(e) = init_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli, args) {
        Ok(o) => {
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            for p in &o.outputs {
                println!("{}", p.display());
            }
            match o.report {
                Some(r) if r.is_empty() => {
                    eprintln!("warning: empty report (no observations to estimate from)");
                    ExitCode::from(2)
                }
                Some(r) => {
                    print!("{}", r.to_text());
                    ExitCode::SUCCESS
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
