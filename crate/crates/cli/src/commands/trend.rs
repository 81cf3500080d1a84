//! `trend`: excess 0-1 risk of empirical α-risk minimizers as the sample
//! size grows.

use std::path::PathBuf;

use alpha_lab::generalization::optimality_trend;
use alpha_lab::harness::TrainConfig;
use alpha_lab::AlphaParam;

use super::audit_outcome;
use crate::config::{load_gmm, FeatureMode};
use crate::error::CliResult;
use crate::output::{num, RunManifest, Table};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Mixture JSON file or `builtin:<name>`.
    #[arg(long)]
    pub gmm: String,
    #[arg(long)]
    pub alpha: AlphaParam,
    /// Comma-separated training-set sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    #[arg(long)]
    pub runs: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FeatureMode::Raw)]
    pub features: FeatureMode,
    #[arg(long)]
    pub bias: bool,
    #[arg(long, default_value_t = 1.0)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub optimality: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iterations: usize,
}

pub fn run(args: Args, strict: bool) -> CliResult<()> {
    let mut manifest = RunManifest::new("trend", &args.out).config(&args.gmm).seed(args.seed);
    let spec = load_gmm(&args.gmm)?;
    let train = TrainConfig {
        learning_rate: args.learning_rate,
        optimality: args.optimality,
        max_iterations: args.max_iterations,
        ..TrainConfig::default()
    };
    let table = optimality_trend(
        &spec,
        args.alpha,
        &args.ns,
        args.runs,
        args.features.config(args.bias),
        &train,
        args.seed,
    )?;
    let mut out = Table::new(["n", "risk", "bayes_risk", "gap", "std_error", "unconverged_runs"]);
    for r in &table.rows {
        out.push(vec![
            r.n.to_string(),
            num(r.risk),
            num(r.bayes_risk),
            num(r.gap),
            num(r.std_error),
            r.unconverged_runs.to_string(),
        ]);
    }
    let non_increasing = table.is_non_increasing();
    manifest.note("alpha", args.alpha);
    manifest.note("runs", args.runs);
    manifest.note("features", args.features.name());
    manifest.note("bias", args.bias);
    manifest.note("learning_rate", num(args.learning_rate));
    manifest.note("conditional_on_linear_attainment", table.conditional_on_linear_attainment);
    manifest.note("non_increasing", non_increasing);
    out.write(&args.out, &manifest)?;
    for r in &table.rows {
        eprintln!("trend: n = {} gap {:.3e} +- {:.1e}", r.n, r.gap, r.std_error);
    }
    audit_outcome(strict, non_increasing, "excess risk is not non-increasing in n".into())
}
