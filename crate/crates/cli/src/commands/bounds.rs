//! `bounds`: generalization bounds for a grid of `(α, n)`, with an
//! optional Monte Carlo audit against a Gaussian mixture.

use std::path::PathBuf;

use alpha_lab::generalization::{
    rademacher_audit, rademacher_bound, uniform_discrepancy_audit, uniform_discrepancy_bound, AuditConfig,
    BoundAuditReport, BoundQuery,
};
use alpha_lab::AlphaParam;
use serde::Deserialize;

use super::audit_outcome;
use crate::config::{load_json, GmmSource};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, RunManifest, Table};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Query JSON file (see the configuration reference).
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Bound query: every combination of `alphas` and `n` is evaluated.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub alphas: Vec<AlphaParam>,
    pub r: f64,
    pub d: usize,
    pub n: Vec<usize>,
    pub delta: f64,
    #[serde(default)]
    pub audit: Option<AuditSettings>,
}

/// Monte Carlo audit settings; the mixture must have dimension `d`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSettings {
    pub gmm: GmmSource,
    pub trials: usize,
    #[serde(default = "default_thetas")]
    pub thetas: usize,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_slack")]
    pub se_slack: f64,
}

fn default_thetas() -> usize {
    200
}
fn default_population() -> usize {
    1_000_000
}
fn default_slack() -> f64 {
    3.0
}

fn ratio_for(report: &BoundAuditReport, alpha: AlphaParam) -> f64 {
    report
        .trials
        .iter()
        .filter(|t| t.alpha == alpha)
        .map(|t| t.measured / t.bound)
        .fold(0.0, f64::max)
}

struct AuditRow {
    trials: usize,
    rademacher: Option<(f64, f64)>,
    uniform: Option<(f64, f64)>,
}

pub fn run(args: Args, strict: bool) -> CliResult<()> {
    let mut manifest = RunManifest::new("bounds", &args.out).config(args.query.display().to_string());
    let query: Query = load_json(&args.query)?;
    if query.alphas.is_empty() || query.n.is_empty() {
        return Err(CliError::Config("query needs at least one alpha and one n".into()));
    }
    let audit_spec = match &query.audit {
        Some(a) => {
            let spec = a.gmm.resolve()?;
            if spec.dim() != query.d {
                return Err(CliError::Config(format!(
                    "audit mixture has dimension {}, query has d = {}",
                    spec.dim(),
                    query.d
                )));
            }
            Some((spec, a))
        }
        None => None,
    };

    let mut table = Table::new([
        "alpha",
        "r",
        "d",
        "n",
        "delta",
        "margin_radius",
        "rademacher_bound",
        "uniform_discrepancy_bound",
        "audit_trials",
        "rademacher_failure_rate",
        "rademacher_max_ratio",
        "uniform_failure_rate",
        "uniform_max_ratio",
    ]);
    let mut failures = Vec::new();
    for &n in &query.n {
        let audits: Vec<(AlphaParam, AuditRow)> = match &audit_spec {
            None => Vec::new(),
            Some((spec, a)) => {
                let config = AuditConfig {
                    r: query.r,
                    thetas: a.thetas,
                    population: a.population,
                    se_slack: a.se_slack,
                    ..AuditConfig::new(query.alphas.clone(), n, query.delta, a.trials, a.seed)
                };
                let rad = rademacher_audit(spec, &config)?;
                let uniform_alphas: Vec<AlphaParam> =
                    query.alphas.iter().copied().filter(|a| a.value() >= 1.0).collect();
                let uni = if uniform_alphas.is_empty() {
                    None
                } else {
                    Some(uniform_discrepancy_audit(spec, &AuditConfig { alphas: uniform_alphas, ..config.clone() })?)
                };
                query
                    .alphas
                    .iter()
                    .map(|&alpha| {
                        let uniform = uni
                            .as_ref()
                            .filter(|_| alpha.value() >= 1.0)
                            .map(|u| (u.failure_rate(alpha), ratio_for(u, alpha)));
                        let row = AuditRow {
                            trials: a.trials,
                            rademacher: Some((rad.failure_rate(alpha), ratio_for(&rad, alpha))),
                            uniform,
                        };
                        (alpha, row)
                    })
                    .collect()
            }
        };
        for &alpha in &query.alphas {
            let q = BoundQuery::new(alpha, query.r, query.d, n, query.delta)?;
            let rademacher = rademacher_bound(&q)?;
            let uniform = if alpha.value() >= 1.0 { Some(uniform_discrepancy_bound(&q)?) } else { None };
            let audit = audits.iter().find(|(a, _)| *a == alpha).map(|(_, r)| r);
            if let Some(row) = audit {
                for (name, part) in [("rademacher", row.rademacher), ("uniform discrepancy", row.uniform)] {
                    if let Some((rate, _)) = part {
                        if rate > query.delta {
                            failures.push(format!("{name} bound at alpha {alpha}, n {n}: failure rate {rate}"));
                        }
                    }
                }
            }
            table.push(vec![
                alpha.to_string(),
                num(query.r),
                query.d.to_string(),
                n.to_string(),
                num(query.delta),
                num(q.margin_radius()),
                num(rademacher),
                opt_num(uniform),
                audit.map(|r| r.trials.to_string()).unwrap_or_default(),
                opt_num(audit.and_then(|r| r.rademacher).map(|p| p.0)),
                opt_num(audit.and_then(|r| r.rademacher).map(|p| p.1)),
                opt_num(audit.and_then(|r| r.uniform).map(|p| p.0)),
                opt_num(audit.and_then(|r| r.uniform).map(|p| p.1)),
            ]);
        }
    }
    if let Some((_, a)) = &audit_spec {
        manifest.seed = Some(a.seed);
    }
    table.write(&args.out, &manifest)?;
    eprintln!("bounds: {} rows -> {}", table.len(), args.out.display());
    audit_outcome(strict, failures.is_empty(), failures.join("; "))
}
