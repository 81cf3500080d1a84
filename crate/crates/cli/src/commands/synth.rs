//! `synth`: repeated train-and-average experiments on a corrupted
//! Gaussian mixture, compared against the Bayes rule.

use std::path::PathBuf;

use alpha_lab::harness::{
    run_synthetic_experiment, Averaging, CorruptionSpec, ExperimentConfig, Termination, TrainConfig,
};
use alpha_lab::AlphaParam;
use clap::ValueEnum;

use super::indexed_columns;
use crate::config::{load_corruption, load_gmm, FeatureMode};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, RunManifest, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// 2 negatives and 98 positives per training set.
    Imbalance,
    /// 20% of negative labels flipped.
    Noise,
    /// Balanced, uncorrupted training sets.
    Clean,
}

impl Scenario {
    pub fn corruption(self) -> CorruptionSpec {
        match self {
            Scenario::Imbalance => CorruptionSpec::imbalance(2, 98),
            Scenario::Noise => CorruptionSpec::flips(0.2, 0.0),
            Scenario::Clean => CorruptionSpec::clean(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Scenario::Imbalance => "imbalance",
            Scenario::Noise => "noise",
            Scenario::Clean => "clean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AveragingMode {
    Mean,
    Median,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long, value_delimiter = ',', default_value = "0.65,1,4")]
    pub alphas: Vec<AlphaParam>,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for `summary.csv` and `runs.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Mixture JSON file or `builtin:<name>`.
    #[arg(long, default_value = "builtin:symmetric")]
    pub gmm: String,
    /// Corruption JSON file replacing the scenario's default corruption.
    #[arg(long)]
    pub corruption: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FeatureMode::Raw)]
    pub features: FeatureMode,
    /// Append a constant feature so predictors carry an intercept.
    #[arg(long)]
    pub bias: bool,
    #[arg(long, value_enum, default_value_t = AveragingMode::Mean)]
    pub averaging: AveragingMode,
    /// Training-set size when the corruption requests no class counts.
    #[arg(long, default_value_t = 100)]
    pub train_size: usize,
    #[arg(long, default_value_t = 2000)]
    pub test_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub optimality: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iterations: usize,
}

pub fn run(args: Args) -> CliResult<()> {
    let mut manifest = RunManifest::new("synth", &args.out).config(&args.gmm).seed(args.seed);
    let spec = load_gmm(&args.gmm)?;
    let corruption = match &args.corruption {
        Some(path) => load_corruption(path)?,
        None => args.scenario.corruption(),
    };
    if args.alphas.is_empty() {
        return Err(CliError::Config("at least one alpha is required".into()));
    }
    let config = ExperimentConfig {
        train_size: args.train_size,
        test_size: args.test_size,
        features: args.features.config(args.bias),
        averaging: match args.averaging {
            AveragingMode::Mean => Averaging::Mean,
            AveragingMode::Median => Averaging::Median,
        },
        train: TrainConfig {
            learning_rate: args.learning_rate,
            optimality: args.optimality,
            max_iterations: args.max_iterations,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::new(args.alphas.clone(), args.runs, args.seed)
    };
    let summary = run_synthetic_experiment(&spec, &corruption, &config)?;
    let dim = summary.bayes_reference.len();

    let mut header: Vec<String> = [
        "alpha",
        "angle_deg",
        "accuracy",
        "accuracy_negative",
        "accuracy_positive",
        "relative_gain_pct",
        "gain_sign",
        "converged_runs",
        "runs",
    ]
    .map(String::from)
    .into();
    header.extend(indexed_columns("theta", dim));
    header.extend(indexed_columns("bayes", dim));
    let mut table = Table::new(header);
    for s in &summary.per_alpha {
        let mut row = vec![
            s.alpha.to_string(),
            num(s.angle_degrees()),
            num(s.accuracy),
            num(s.accuracy_negative),
            num(s.accuracy_positive),
            opt_num(s.relative_gain),
            s.gain_sign.map(|g| g.to_string()).unwrap_or_default(),
            s.converged_runs.to_string(),
            summary.runs.to_string(),
        ];
        row.extend(s.averaged_theta.iter().map(|&v| num(v)));
        row.extend(summary.bayes_reference.iter().map(|&v| num(v)));
        table.push(row);
    }

    let mut header: Vec<String> = [
        "run",
        "alpha",
        "termination",
        "iterations",
        "flipped",
        "accuracy_negative",
        "accuracy_positive",
    ]
    .map(String::from)
    .into();
    header.extend(indexed_columns("theta", dim));
    let mut runs = Table::new(header);
    for r in &summary.records {
        let mut row = vec![
            r.run.to_string(),
            r.alpha.to_string(),
            match r.termination {
                Termination::Converged => "converged",
                Termination::MaxIterations => "max_iterations",
            }
            .to_string(),
            r.iterations.to_string(),
            r.flipped.to_string(),
            num(r.accuracy_negative),
            num(r.accuracy_positive),
        ];
        row.extend(r.theta.iter().map(|&v| num(v)));
        runs.push(row);
    }

    manifest.note("scenario", args.scenario.name());
    if let Some(path) = &args.corruption {
        manifest.note("corruption", path.display());
    }
    manifest.note("features", args.features.name());
    manifest.note("bias", args.bias);
    manifest.note("learning_rate", num(args.learning_rate));
    manifest.note("optimality", num(args.optimality));
    manifest.note("max_iterations", args.max_iterations);
    table.write(&args.out.join("summary.csv"), &manifest)?;
    runs.write(&args.out.join("runs.csv"), &manifest)?;
    for s in &summary.per_alpha {
        eprintln!(
            "synth {}: alpha {} angle {:.3} deg, accuracy {:.4}, {}/{} runs converged",
            args.scenario.name(),
            s.alpha,
            s.angle_degrees(),
            s.accuracy,
            s.converged_runs,
            summary.runs
        );
    }
    Ok(())
}
