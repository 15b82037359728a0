//! Experiment harness: configuration, parallel Monte-Carlo execution, and
//! report serialization behind the `test`, `regress`, `design`, and
//! `diagnose` commands.
//!
//! Per-trial seeds are `hash(master_seed, policy label, trial index)`, so
//! policies never share streams, trial order is irrelevant, and reports are
//! byte-identical across reruns and worker counts.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{
    brute_force_design, solve_min_eig_design, solve_verification_lp, sparsify_design,
    DesignTarget, LpInstance,
};
use crate::diagnostics::{compute_constants, predicted_terms};
use crate::env::{MeansTable, TestEnv};
use crate::envs::{
    build_example1, build_logistic_groups, build_minimax, build_relu_net, build_three_group,
    ingest_csv, DatasetSpec,
};
use crate::history::TrialReport;
use crate::policies::{run_trial, PolicyConfig, PolicyKind, StoppingRule, DEFAULT_MAX_ROUNDS};
use crate::regression::{
    run_regression, ParamModel, RegressionEnv, RegressionMetrics, RegressionPolicy,
};
use crate::report::{
    summarize_regression, summarize_trials, tidy_csv_rows, ConstantsBlock, DesignBlock, RunReport,
};
use crate::rng::{derive_seed, stream_from_seed};
use crate::{Error, Result};

/// Environment selector shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSelector {
    Example1,
    ThreeGroup {
        #[serde(default)]
        seed: u64,
    },
    Minimax {
        j: usize,
        #[serde(default = "default_minimax_arms")]
        n: usize,
        gamma: f64,
        #[serde(default)]
        seed: u64,
    },
    LogisticGroups {
        #[serde(default)]
        seed: u64,
    },
    ReluNet {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_relu_points")]
        n_points: usize,
    },
    /// Linear regression environment ingested from a CSV dataset.
    Csv { dataset: DatasetSpec },
    /// Finite testing environment read from a CSV of means (rows = arms,
    /// columns = hypotheses, header required).
    MeansCsv { path: String, true_hyp: usize },
}

fn default_minimax_arms() -> usize {
    5
}

fn default_relu_points() -> usize {
    50
}

/// A resolved environment: finite testing or parametric regression.
pub enum ResolvedEnv {
    Testing(TestEnv),
    Regression(Box<ParamModel>, RegressionEnv),
}

impl EnvSelector {
    pub fn resolve(&self) -> Result<ResolvedEnv> {
        match self {
            EnvSelector::Example1 => Ok(ResolvedEnv::Testing(build_example1())),
            EnvSelector::ThreeGroup { seed } => Ok(ResolvedEnv::Testing(build_three_group(*seed))),
            EnvSelector::Minimax { j, n, gamma, seed } => {
                Ok(ResolvedEnv::Testing(build_minimax(*j, *n, *gamma, *seed)?))
            }
            EnvSelector::LogisticGroups { seed } => {
                let (model, env) = build_logistic_groups(*seed);
                Ok(ResolvedEnv::Regression(Box::new(model), env))
            }
            EnvSelector::ReluNet { seed, n_points } => {
                let (model, env) = build_relu_net(*seed, *n_points)?;
                Ok(ResolvedEnv::Regression(Box::new(model), env))
            }
            EnvSelector::Csv { dataset } => {
                let data = ingest_csv(dataset)?;
                Ok(ResolvedEnv::Regression(Box::new(data.model), data.env))
            }
            EnvSelector::MeansCsv { path, true_hyp } => {
                let table = read_means_csv(Path::new(path))?;
                Ok(ResolvedEnv::Testing(TestEnv::new(
                    table,
                    crate::env::NoiseSpec::gaussian_default(),
                    *true_hyp,
                )?))
            }
        }
    }

    /// Parses the `--env` flag grammar, e.g. `example1`, `three_group:7`,
    /// `minimax:j=4,gamma=1.0,n=5,seed=0`, `relu_net:seed=1,n_points=50`.
    pub fn parse_flag(s: &str) -> Result<Self> {
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let parse_kv = |args: Option<&str>| -> Result<Vec<(String, String)>> {
            let mut out = Vec::new();
            if let Some(args) = args {
                for part in args.split(',').filter(|p| !p.is_empty()) {
                    match part.split_once('=') {
                        Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
                        None => out.push(("seed".to_string(), part.trim().to_string())),
                    }
                }
            }
            Ok(out)
        };
        let kv = parse_kv(args)?;
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<Option<u64>> {
            get(key)
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| Error::Config(format!("bad integer for {key}: '{v}'")))
                })
                .transpose()
        };
        match head {
            "example1" => Ok(EnvSelector::Example1),
            "three_group" => Ok(EnvSelector::ThreeGroup {
                seed: num("seed")?.unwrap_or(0),
            }),
            "minimax" => Ok(EnvSelector::Minimax {
                j: num("j")?.unwrap_or(4) as usize,
                n: num("n")?.unwrap_or(default_minimax_arms() as u64) as usize,
                gamma: get("gamma")
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| Error::Config(format!("bad gamma '{v}'")))
                    })
                    .transpose()?
                    .unwrap_or(1.0),
                seed: num("seed")?.unwrap_or(0),
            }),
            "logistic_groups" => Ok(EnvSelector::LogisticGroups {
                seed: num("seed")?.unwrap_or(0),
            }),
            "relu_net" => Ok(EnvSelector::ReluNet {
                seed: num("seed")?.unwrap_or(0),
                n_points: num("n_points")?.unwrap_or(default_relu_points() as u64) as usize,
            }),
            other => Err(Error::Config(format!(
                "unknown environment '{other}' (CSV environments need a JSON config)"
            ))),
        }
    }
}

fn read_means_csv(path: &Path) -> Result<MeansTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut row = Vec::with_capacity(record.len());
        for cell in record.iter() {
            row.push(cell.trim().parse::<f64>().map_err(|_| {
                Error::Dataset(format!("non-numeric mean cell '{}'", cell.trim()))
            })?);
        }
        rows.push(row);
    }
    MeansTable::from_rows(&rows)
}

/// Output format: a JSON report, optionally with a tidy long-format CSV next
/// to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvSelector,
    /// Policy labels; the valid set depends on the command.
    #[serde(default)]
    pub policies: Vec<String>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// 0 means the rayon default.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    /// Hypothesis to verify (design command, finite environments).
    #[serde(default)]
    pub hyp: Option<usize>,
    /// Evaluation point (design command, parametric environments); defaults
    /// to the environment's ground truth.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    /// Apply Caratheodory support reduction to the design command's output.
    #[serde(default)]
    pub sparsify: bool,
}

fn default_delta() -> f64 {
    0.1
}

fn default_trials() -> u64 {
    100
}

fn default_horizon() -> usize {
    500
}

fn default_max_rounds() -> u64 {
    DEFAULT_MAX_ROUNDS
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        Ok(())
    }

    fn echo(&self, command: &str) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("command".to_string(), serde_json::Value::String(command.into()));
            // Worker count is execution machinery: reports must be identical
            // for any value, so it has no place in the echo.
            map.remove("workers");
        }
        Ok(v)
    }
}

fn run_pool<T: Send, F: Fn(u64) -> Result<T> + Sync>(
    workers: usize,
    trials: u64,
    f: F,
) -> Result<Vec<T>> {
    let indices: Vec<u64> = (0..trials).collect();
    let work = || -> Result<Vec<T>> { indices.par_iter().map(|&i| f(i)).collect() };
    if workers == 0 {
        work()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(work)
    }
}

fn write_report(report: &RunReport, config: &ExperimentConfig) -> Result<String> {
    let json = report.to_json_pretty()?;
    if let Some(path) = &config.out {
        fs::write(path, &json)?;
    }
    Ok(json)
}

fn write_tidy_csv(
    config: &ExperimentConfig,
    testing: Option<&[(String, Vec<TrialReport>)]>,
    regression: Option<&[(String, Vec<RegressionMetrics>)]>,
) -> Result<()> {
    if config.format != OutputFormat::Csv {
        return Ok(());
    }
    let Some(out) = &config.out else {
        return Err(Error::Config("--format csv requires --out".into()));
    };
    let csv_path = out.with_extension("csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["policy", "trial", "metric", "checkpoint", "value"])?;
    for (policy, trial, metric, checkpoint, value) in
        tidy_csv_rows(testing, regression)
    {
        w.write_record([
            policy,
            trial.to_string(),
            metric,
            checkpoint.to_string(),
            format!("{value}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn testing_env(config: &ExperimentConfig) -> Result<TestEnv> {
    match config.env.resolve()? {
        ResolvedEnv::Testing(env) => Ok(env),
        ResolvedEnv::Regression(..) => Err(Error::Config(
            "this command needs a finite testing environment".into(),
        )),
    }
}

/// `test`: Monte-Carlo comparison of the sequential testing policies.
pub fn cmd_test(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let env = testing_env(config)?;
    let labels = if config.policies.is_empty() {
        vec!["cs".to_string(), "uniform".to_string()]
    } else {
        config.policies.clone()
    };
    let kinds: Vec<PolicyKind> = labels
        .iter()
        .map(|s| PolicyKind::parse(s))
        .collect::<Result<_>>()?;
    let rule = StoppingRule::gaussian(env.means.hyp_count(), config.delta)?;

    let mut raw: Vec<(String, Vec<TrialReport>)> = Vec::with_capacity(kinds.len());
    for kind in &kinds {
        let label = kind.label();
        let reports = run_pool(config.workers, config.trials, |trial| {
            let policy = PolicyConfig {
                kind: *kind,
                max_rounds: config.max_rounds,
                seed: derive_seed(config.master_seed, &label, trial),
            };
            run_trial(&env, &policy, &rule)
        })?;
        raw.push((label, reports));
    }

    let mut report = RunReport::new("test", config.echo("test")?);
    let consts = compute_constants(&env.means, env.true_hyp)?;
    let terms = predicted_terms(&consts, env.means.hyp_count(), config.delta)?;
    report.constants = Some(ConstantsBlock::new(&consts, &terms));
    report.testing = Some(
        raw.iter()
            .map(|(label, reports)| summarize_trials(label.clone(), reports))
            .collect(),
    );
    write_tidy_csv(config, Some(&raw), None)?;
    Ok(report)
}

/// `regress`: Monte-Carlo comparison of the regression sampling rules.
pub fn cmd_regress(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let (model, env) = match config.env.resolve()? {
        ResolvedEnv::Regression(model, env) => (model, env),
        ResolvedEnv::Testing(_) => {
            return Err(Error::Config(
                "this command needs a parametric regression environment".into(),
            ))
        }
    };
    let labels = if config.policies.is_empty() {
        vec!["cs".to_string(), "uniform".to_string()]
    } else {
        config.policies.clone()
    };
    let policies: Vec<RegressionPolicy> = labels
        .iter()
        .map(|s| RegressionPolicy::parse(s))
        .collect::<Result<_>>()?;

    let mut raw: Vec<(String, Vec<RegressionMetrics>)> = Vec::with_capacity(policies.len());
    for policy in &policies {
        let label = policy.label().to_string();
        let model_ref = &model;
        let env_ref = &env;
        let runs = run_pool(config.workers, config.trials, |trial| {
            let mut rng =
                stream_from_seed(derive_seed(config.master_seed, &label, trial));
            run_regression(model_ref, env_ref, *policy, config.horizon, &mut rng)
        })?;
        raw.push((label, runs));
    }

    let mut report = RunReport::new("regress", config.echo("regress")?);
    report.regression = Some(
        raw.iter()
            .map(|(label, runs)| summarize_regression(label.clone(), runs))
            .collect(),
    );
    write_tidy_csv(config, None, Some(&raw))?;
    Ok(report)
}

/// `design`: one-shot design computation — the verification LP for finite
/// environments (at `hyp`), the min-eigenvalue design for parametric ones
/// (at `theta`, defaulting to the ground truth).
pub fn cmd_design(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let mut report = RunReport::new("design", config.echo("design")?);
    match config.env.resolve()? {
        ResolvedEnv::Testing(env) => {
            let hyp = config.hyp.unwrap_or(env.true_hyp);
            let inst = LpInstance::verification(&env.means, hyp)?;
            let sol = solve_verification_lp(&inst)?;
            let (sol, sparsified) = if config.sparsify {
                let reduced = sparsify_design(&sol.design, DesignTarget::Lp(&inst));
                let objective = inst.min_row_value(&reduced.probs);
                (
                    crate::design::DesignSolution {
                        design: reduced,
                        objective,
                        ..sol
                    },
                    true,
                )
            } else {
                (sol, false)
            };
            report.design = Some(DesignBlock::new(&sol, sparsified));
        }
        ResolvedEnv::Regression(model, env) => {
            let theta = config
                .theta
                .clone()
                .unwrap_or_else(|| env.theta_star.clone());
            if theta.len() != model.theta_len() {
                return Err(Error::Config(format!(
                    "theta has length {}, model expects {}",
                    theta.len(),
                    model.theta_len()
                )));
            }
            let inst = model.eig_instance(&theta)?;
            let sol = solve_min_eig_design(&inst, 2000, 1e-8)?;
            let (sol, sparsified) = if config.sparsify {
                let reduced = sparsify_design(&sol.design, DesignTarget::Eig(&inst));
                let objective = inst.min_eig_value(&reduced.probs);
                (
                    crate::design::DesignSolution {
                        design: reduced,
                        objective,
                        ..sol
                    },
                    true,
                )
            } else {
                (sol, false)
            };
            report.design = Some(DesignBlock::new(&sol, sparsified));
        }
    }
    Ok(report)
}

/// `diagnose`: problem constants and predicted sample-complexity terms.
pub fn cmd_diagnose(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let env = testing_env(config)?;
    let consts = compute_constants(&env.means, env.true_hyp)?;
    let terms = predicted_terms(&consts, env.means.hyp_count(), config.delta)?;
    let mut block = ConstantsBlock::new(&consts, &terms);
    block.notes.push(format!(
        "eta for the Gaussian noise model is a diagnostics-only proxy (16 * std^2 = {})",
        env.noise.eta
    ));
    let mut report = RunReport::new("diagnose", config.echo("diagnose")?);
    report.constants = Some(block);
    Ok(report)
}

/// Dispatches a command name; used by the binary and by integration tests.
pub fn run_command(command: &str, config: &ExperimentConfig) -> Result<(RunReport, String)> {
    let report = match command {
        "test" => cmd_test(config)?,
        "regress" => cmd_regress(config)?,
        "design" => cmd_design(config)?,
        "diagnose" => cmd_diagnose(config)?,
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    };
    let json = write_report(&report, config)?;
    Ok((report, json))
}

/// Smoke oracle used by an example; re-exported here so the binary stays thin.
pub fn grid_check_example1() -> Result<f64> {
    let env = build_example1();
    let inst = LpInstance::verification(&env.means, 0)?;
    let grid = brute_force_design(DesignTarget::Lp(&inst), 100)?;
    Ok(grid.objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(env: EnvSelector) -> ExperimentConfig {
        ExperimentConfig {
            env,
            policies: vec![],
            delta: 0.1,
            trials: 5,
            horizon: 12,
            master_seed: 7,
            out: None,
            format: OutputFormat::Json,
            workers: 0,
            max_rounds: 20_000,
            hyp: None,
            theta: None,
            sparsify: false,
        }
    }

    #[test]
    fn env_flag_grammar() {
        assert_eq!(
            EnvSelector::parse_flag("example1").unwrap(),
            EnvSelector::Example1
        );
        assert_eq!(
            EnvSelector::parse_flag("three_group:9").unwrap(),
            EnvSelector::ThreeGroup { seed: 9 }
        );
        assert_eq!(
            EnvSelector::parse_flag("minimax:j=6,gamma=0.5,n=3,seed=2").unwrap(),
            EnvSelector::Minimax {
                j: 6,
                n: 3,
                gamma: 0.5,
                seed: 2
            }
        );
        assert!(EnvSelector::parse_flag("bogus").is_err());
    }

    #[test]
    fn test_command_produces_summaries_and_constants() {
        let mut config = base_config(EnvSelector::Example1);
        config.policies = vec!["uniform".into(), "eps_cs".into()];
        let report = cmd_test(&config).unwrap();
        let testing = report.testing.unwrap();
        assert_eq!(testing.len(), 2);
        assert_eq!(testing[0].policy, "uniform");
        assert_eq!(testing[0].trials, 5);
        let consts = report.constants.unwrap();
        assert!((consts.d1 - 4e-6).abs() < 1e-12);
    }

    #[test]
    fn regress_command_runs_on_logistic_groups() {
        let mut config = base_config(EnvSelector::LogisticGroups { seed: 1 });
        config.policies = vec!["uniform".into()];
        config.trials = 2;
        config.horizon = 8;
        let report = cmd_regress(&config).unwrap();
        let curves = report.regression.unwrap();
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].checkpoints, vec![1, 2, 4, 8]);
    }

    #[test]
    fn design_command_finite_and_parametric() {
        let mut config = base_config(EnvSelector::Example1);
        config.hyp = Some(0);
        let block = cmd_design(&config).unwrap().design.unwrap();
        assert!((block.probs[0] - 1.0).abs() < 1e-9);
        assert_eq!(block.support, vec![0]);

        let config = base_config(EnvSelector::LogisticGroups { seed: 1 });
        let block = cmd_design(&config).unwrap().design.unwrap();
        assert_eq!(block.probs.len(), 50);
        assert!(block.objective > 0.0);
    }

    #[test]
    fn diagnose_command_flags_degenerate_envs() {
        let config = base_config(EnvSelector::ThreeGroup { seed: 0 });
        let report = cmd_diagnose(&config).unwrap();
        let block = report.constants.unwrap();
        assert_eq!(block.eta0, 0.0);
        assert_eq!(block.d1, 0.0);
        assert!(block.exploration_term.is_none());
        assert!(block.notes.iter().any(|n| n.contains("eta0 = 0")));
    }

    #[test]
    fn wrong_env_kind_is_a_config_error() {
        let config = base_config(EnvSelector::LogisticGroups { seed: 0 });
        assert!(matches!(cmd_test(&config), Err(Error::Config(_))));
        let config = base_config(EnvSelector::Example1);
        assert!(matches!(cmd_regress(&config), Err(Error::Config(_))));
    }

    #[test]
    fn reports_are_reproducible() {
        let mut config = base_config(EnvSelector::Example1);
        config.policies = vec!["uniform".into()];
        let a = cmd_test(&config).unwrap().to_json_pretty().unwrap();
        let b = cmd_test(&config).unwrap().to_json_pretty().unwrap();
        assert_eq!(a, b);
    }
}
