//! Command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chernoff::cli::{run_command, EnvSelector, ExperimentConfig, OutputFormat};
use chernoff::envs::{ColumnRef, DatasetSpec};

#[derive(Parser)]
#[command(
    name = "chernoff",
    version,
    about = "Chernoff sampling simulator: active testing policies, active regression, \
             design solvers, and problem-constant diagnostics"
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo comparison of sequential testing policies on a finite environment.
    Test(CommonArgs),
    /// Monte-Carlo comparison of regression sampling rules on a parametric environment.
    Regress(CommonArgs),
    /// One-shot design computation (verification LP or min-eigenvalue design).
    Design(CommonArgs),
    /// Problem constants and predicted sample-complexity terms.
    Diagnose(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Built-in environment: example1 | three_group[:seed] |
    /// minimax:j=4,gamma=1.0[,n=5][,seed=0] | logistic_groups[:seed] |
    /// relu_net[:seed=0,n_points=50]
    #[arg(long)]
    env: Option<String>,

    /// CSV dataset for regression environments (rows become actions).
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Target column of --csv, by name or zero-based index.
    #[arg(long)]
    target: Option<String>,

    /// CSV of arm means for finite environments (rows = arms, header required).
    #[arg(long)]
    means_csv: Option<PathBuf>,

    /// True hypothesis column for --means-csv.
    #[arg(long, default_value_t = 0)]
    true_hyp: usize,

    /// Comma-separated policy list (test: cs,top2,eps_cs,uniform,batch_cs:B;
    /// regress: cs,eps_cs,uniform).
    #[arg(long)]
    policies: Option<String>,

    #[arg(long)]
    delta: Option<f64>,

    #[arg(long)]
    trials: Option<u64>,

    /// Rounds per regression run.
    #[arg(long)]
    horizon: Option<usize>,

    /// Master seed; every reported number is a function of (config, seed).
    #[arg(long)]
    seed: Option<u64>,

    /// Report path (JSON). With --format csv a tidy .csv is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,

    /// json | csv
    #[arg(long)]
    format: Option<String>,

    /// Worker threads for trials (0 = all cores). Reports do not depend on it.
    #[arg(long)]
    workers: Option<usize>,

    /// Safety cap on rounds per testing trial.
    #[arg(long)]
    max_rounds: Option<u64>,

    /// Hypothesis to verify (design command on finite environments).
    #[arg(long)]
    hyp: Option<usize>,

    /// Comma-separated evaluation point (design command on parametric
    /// environments); defaults to the ground truth.
    #[arg(long)]
    theta: Option<String>,

    /// Apply Caratheodory support reduction to the design output.
    #[arg(long, default_value_t = false)]
    sparsify: bool,
}

fn build_config(args: &CommonArgs) -> chernoff::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => {
            let env = resolve_env_flags(args)?;
            ExperimentConfig {
                env,
                policies: vec![],
                delta: 0.1,
                trials: 100,
                horizon: 500,
                master_seed: 0,
                out: None,
                format: OutputFormat::Json,
                workers: 0,
                max_rounds: 10_000_000,
                hyp: None,
                theta: None,
                sparsify: false,
            }
        }
    };
    if args.config.is_some() {
        if let Ok(env) = resolve_env_flags(args) {
            config.env = env;
        }
    }
    if let Some(p) = &args.policies {
        config.policies = p.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(d) = args.delta {
        config.delta = d;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(o) = &args.out {
        config.out = Some(o.clone());
    }
    if let Some(f) = &args.format {
        config.format = OutputFormat::parse(f)?;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(m) = args.max_rounds {
        config.max_rounds = m;
    }
    if let Some(h) = args.hyp {
        config.hyp = Some(h);
    }
    if let Some(theta) = &args.theta {
        let parsed: Result<Vec<f64>, _> =
            theta.split(',').map(|s| s.trim().parse::<f64>()).collect();
        config.theta = Some(parsed.map_err(|e| {
            chernoff::Error::Config(format!("bad --theta value: {e}"))
        })?);
    }
    if args.sparsify {
        config.sparsify = true;
    }
    config.validate()?;
    Ok(config)
}

fn resolve_env_flags(args: &CommonArgs) -> chernoff::Result<EnvSelector> {
    if let Some(path) = &args.csv {
        let target = args.target.clone().ok_or_else(|| {
            chernoff::Error::Config("--csv requires --target <column>".into())
        })?;
        let target_column = match target.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(target),
        };
        return Ok(EnvSelector::Csv {
            dataset: DatasetSpec {
                path: path.to_string_lossy().into_owned(),
                target_column,
                feature_columns: vec![],
                normalize: chernoff::envs::Normalize::None,
                noise_std: 0.5f64.sqrt(),
            },
        });
    }
    if let Some(path) = &args.means_csv {
        return Ok(EnvSelector::MeansCsv {
            path: path.to_string_lossy().into_owned(),
            true_hyp: args.true_hyp,
        });
    }
    match &args.env {
        Some(flag) => EnvSelector::parse_flag(flag),
        None => Err(chernoff::Error::Config(
            "select an environment with --env, --csv, or --means-csv (or use --config)".into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = CliArgs::parse();
    let (name, args) = match &cli.command {
        Command::Test(a) => ("test", a),
        Command::Regress(a) => ("regress", a),
        Command::Design(a) => ("design", a),
        Command::Diagnose(a) => ("diagnose", a),
    };
    let config = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_command(name, &config) {
        Ok((_, json)) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
