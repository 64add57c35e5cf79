//! `weylgap`: batch driver for the gap-constant, model-manifold and Morse
//! experiments. Every command prints one JSON report (or a CSV table where
//! noted) and exits 0 on success, 2 when a checked property is violated and
//! 1 on usage or solver errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "weylgap", version, about = "Weyl gap constants, model obstructions and Morse audits")]
struct Cli {
    /// Worker threads (default: machine parallelism).
    #[arg(long, env = "WEYLGAP_WORKERS", global = true)]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    LogUniform,
    Gaussian,
}

impl From<Distribution> for weylgap::gap::SampleDistribution {
    fn from(d: Distribution) -> Self {
        match d {
            Distribution::LogUniform => Self::LogUniform,
            Distribution::Gaussian => Self::Gaussian,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the gap constant and certify it by sampling.
    Epsilon(EpsilonArgs),
    /// Derived constants c(n), c1(n) and the identity coefficients.
    Constants(ConstantsArgs),
    /// Obstruction report for a product of spheres and flat tori.
    Model(ModelArgs),
    /// Total curvature by index from both sides, plus the Morse audit.
    Morse(MorseArgs),
    /// Sample the gap inequality on spectra or along a hypersurface.
    Gapcheck(GapcheckArgs),
    /// Random sweeps of the minimal-hypersurface identities.
    Identities(IdentitiesArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct EpsilonArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub grad_tol: f64,
    #[arg(long, value_enum, default_value_t = Distribution::LogUniform)]
    pub distribution: Distribution,
}

/// Where `ε̂(n)` comes from when a command needs it.
#[derive(Args, Debug, Serialize)]
pub struct EpsilonSource {
    /// A report from `epsilon` or `constants`, or a bare estimate object.
    #[arg(long, conflicts_with = "epsilon_hat")]
    pub epsilon_file: Option<PathBuf>,
    #[arg(long)]
    pub epsilon_hat: Option<f64>,
    /// Seed for estimating `ε̂` when neither of the above is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub source: EpsilonSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremArg {
    Main,
    Mhs,
    Th3,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArgs {
    /// e.g. `S1(1)xS1(1)xS2(r=10)` or `T2(vol=5)xS2(r=3)`.
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_enum, default_value_t = TheoremArg::All)]
    pub theorem: TheoremArg,
    #[command(flatten)]
    pub source: EpsilonSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Both,
    Direction,
    Normal,
}

#[derive(Args, Debug, Serialize)]
pub struct MorseArgs {
    /// e.g. `ellipsoid:1,1,1,1,2`, `tube:R=2,r=1,n=4`, `rgraph:eps=0.3,P=quadric:1,-1,1,-1,0`.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 20_000)]
    pub directions: usize,
    /// Normal-bundle samples (default: same as `--directions`).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    pub side: SideArg,
    #[arg(long, default_value_t = 24)]
    pub grid_starts: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub dedupe_radius: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub degeneracy_tol: f64,
    #[arg(long, default_value_t = 0.1)]
    pub max_rejection_rate: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct GapcheckArgs {
    /// Dimension for the spectral check; inferred from `--spec` otherwise.
    #[arg(long)]
    pub n: Option<usize>,
    /// Check pointwise along this hypersurface instead of on random spectra.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Distribution::LogUniform)]
    pub distribution: Distribution,
    #[command(flatten)]
    pub source: EpsilonSource,
}

#[derive(Args, Debug, Serialize)]
pub struct IdentitiesArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 5, 6, 7, 8])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// What a command hands back to `main`.
pub struct Outcome {
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub violated: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 || rayon::ThreadPoolBuilder::new().num_threads(w).build_global().is_err() {
            eprintln!("error: cannot start {w} workers");
            return ExitCode::from(1);
        }
    }
    let started = Instant::now();
    let result = match &cli.command {
        Command::Epsilon(a) => commands::epsilon(a),
        Command::Constants(a) => commands::constants(a),
        Command::Model(a) => commands::model(a),
        Command::Morse(a) => commands::morse(a),
        Command::Gapcheck(a) => commands::gapcheck(a),
        Command::Identities(a) => commands::identities(a),
    };
    let mut outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match cli.format {
        Format::Json => {
            if let Some(obj) = outcome.json.as_object_mut() {
                let meta = weylgap::report::Meta::new(started.elapsed().as_secs_f64(), rayon::current_num_threads());
                obj.insert("meta".into(), serde_json::to_value(meta).expect("plain struct"));
            }
            serde_json::to_string_pretty(&outcome.json).expect("serializable report") + "\n"
        }
        Format::Csv => match outcome.csv.take() {
            Some(csv) => csv,
            None => {
                eprintln!("error: this command has no CSV output");
                return ExitCode::from(1);
            }
        },
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(if outcome.violated { 2 } else { 0 })
}
