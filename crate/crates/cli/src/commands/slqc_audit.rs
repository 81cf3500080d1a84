//! `slqc-audit`: builds a base certificate at `α₀` around the empirical
//! minimizer, evolves it to each target α pointwise, and re-verifies every
//! evolved and bootstrapped certificate at audit points of the ball.

use std::path::PathBuf;

use alpha_lab::harness::{sample_gmm, train_gd, FeatureConfig, TrainConfig};
use alpha_lab::logistic::{
    alpha_lipschitz_gradient, alpha_lipschitz_risk, min_eigenvalue, risk_gradient, second_moment,
    theta_lipschitz_constant, LabeledDataset,
};
use alpha_lab::numeric::norm;
use alpha_lab::slqc::{
    audit_points, bootstrap_slqc, check_slqc_at, evolve_slqc, gradient_floor, EvolutionInput, OracleFunction,
    SlqcCertificate, SlqcVerdict, ZERO_GRADIENT,
};
use alpha_lab::{AlphaParam, Error};
use rayon::prelude::*;

use super::{audit_outcome, indexed_columns};
use crate::config::load_gmm;
use crate::error::{CliError, CliResult};
use crate::output::{companion_path, num, RunManifest, Table};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Mixture JSON file or `builtin:<name>`; features are mapped into the unit cube.
    #[arg(long)]
    pub gmm: String,
    /// Starting α of the base certificate (at least 1).
    #[arg(long)]
    pub alpha0: AlphaParam,
    /// Comma-separated target α values; `inf` is accepted.
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<AlphaParam>,
    /// Number of audit points in the ball.
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Training-set size drawn from the mixture.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Radius of the parameter ball.
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    /// `ε₀` of the base certificate.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon0: f64,
    /// Fractions `λ ∈ (0, 1)` of the bootstrapped range to audit.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn verdict_name(v: &SlqcVerdict) -> &'static str {
    match v {
        SlqcVerdict::Condition1 { .. } => "condition1",
        SlqcVerdict::Condition2 { .. } => "condition2",
        SlqcVerdict::Fails(_) => "violation",
    }
}

/// Minimizer of the empirical `α₀`-risk over the ball, by projected
/// gradient descent with a step below the inverse smoothness on `[0, 1]^d`.
fn minimizer(data: &LabeledDataset, alpha0: AlphaParam, radius: f64) -> CliResult<Vec<f64>> {
    let config = TrainConfig {
        alpha: alpha0,
        learning_rate: 1.0 / data.dim() as f64,
        optimality: 1e-10,
        max_iterations: 2_000_000,
        radius,
        seed: 0,
    };
    let res = train_gd(data, &config)?;
    Ok(res.theta.into_vec())
}

struct PointAudit {
    rows: Vec<Vec<String>>,
    bootstrap_rows: Vec<Vec<String>>,
    checked: usize,
    violations: usize,
    bootstrap_checked: usize,
    bootstrap_violations: usize,
    base_failures: usize,
}

struct Setup<'a> {
    data: &'a LabeledDataset,
    alpha0: AlphaParam,
    theta0: &'a [f64],
    base: &'a SlqcCertificate,
    f0: &'a OracleFunction,
    targets: &'a [(AlphaParam, Option<OracleFunction>)],
    lambdas: &'a [f64],
    epsilon0: f64,
    kappa0: f64,
    radius: f64,
}

fn audit_point(s: &Setup, index: usize, theta: &[f64]) -> alpha_lab::Result<PointAudit> {
    let mut out = PointAudit {
        rows: Vec::new(),
        bootstrap_rows: Vec::new(),
        checked: 0,
        violations: 0,
        bootstrap_checked: 0,
        bootstrap_violations: 0,
        base_failures: 0,
    };
    let distance = norm(&theta.iter().zip(s.theta0).map(|(a, b)| a - b).collect::<Vec<_>>());
    let base = check_slqc_at(s.f0, theta, s.base)?;
    let g = norm(&risk_gradient(theta, s.data, s.alpha0)?);
    let input = EvolutionInput {
        alpha0: s.alpha0.value(),
        epsilon0: s.epsilon0,
        kappa0: s.kappa0,
        gradient: g.max(f64::MIN_POSITIVE),
        l: alpha_lipschitz_risk(theta).max(alpha_lipschitz_risk(s.theta0)),
        j: alpha_lipschitz_gradient(theta),
        r: s.radius,
    };
    let base_ok = base.holds();
    out.base_failures += usize::from(!base_ok);
    let usable = base_ok && g > ZERO_GRADIENT;
    let sup = input.single_step_sup();
    let prefix = |row: &mut Vec<String>| {
        row.push(index.to_string());
        row.extend(theta.iter().map(|&v| num(v)));
        row.push(num(distance));
        row.push(verdict_name(&base).to_string());
        row.push(num(g));
    };

    for (target, oracle) in s.targets {
        let mut row = Vec::new();
        prefix(&mut row);
        row.push(target.to_string());
        row.push(num(sup));
        let (status, cert_cols, verdict) = if !base_ok {
            ("base_fails", None, String::new())
        } else if !usable {
            ("zero_gradient", None, String::new())
        } else {
            match evolve_slqc(&input, *target) {
                Err(Error::RangeExceeded { .. }) => ("range_exceeded", None, String::new()),
                Err(e) => return Err(e),
                Ok(ev) => {
                    let cert = SlqcCertificate::from_radius(ev.epsilon, ev.rho, s.theta0.to_vec())?;
                    let f = oracle.as_ref().expect("oracle exists for finite targets");
                    let v = check_slqc_at(f, theta, &cert)?;
                    out.checked += 1;
                    out.violations += usize::from(!v.holds());
                    ("checked", Some((ev.epsilon, ev.kappa, ev.rho)), verdict_name(&v).to_string())
                }
            }
        };
        row.push(status.to_string());
        match cert_cols {
            Some((e, k, r)) => row.extend([num(e), num(k), num(r)]),
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        row.push(verdict);
        out.rows.push(row);
    }

    let floor = if usable { gradient_floor(s.data, s.alpha0.value(), theta)? } else { f64::NAN };
    for &lambda in s.lambdas {
        let mut row = vec![index.to_string(), num(lambda), num(floor)];
        if !base_ok || !(floor > ZERO_GRADIENT) {
            row.extend(["", "", "", ""].map(String::from));
            row.push(if base_ok { "no_gradient_floor" } else { "base_fails" }.to_string());
            row.push(String::new());
            out.bootstrap_rows.push(row);
            continue;
        }
        let bp = bootstrap_slqc(&EvolutionInput { gradient: floor, ..input }, lambda)?;
        let cert = SlqcCertificate::from_radius(bp.epsilon, bp.rho_lower_bound, s.theta0.to_vec())?;
        let f = OracleFunction::from_risk(s.data.clone(), AlphaParam::new(bp.alpha)?)?;
        let v = check_slqc_at(&f, theta, &cert)?;
        out.bootstrap_checked += 1;
        out.bootstrap_violations += usize::from(!v.holds());
        row.extend([num(bp.alpha), num(bp.epsilon), num(bp.epsilon_recursion_limit), num(bp.rho_lower_bound)]);
        row.push("checked".to_string());
        row.push(verdict_name(&v).to_string());
        out.bootstrap_rows.push(row);
    }
    Ok(out)
}

pub fn run(args: Args, strict: bool) -> CliResult<()> {
    if !(args.alpha0.value() >= 1.0) || args.alpha0.is_infinite() {
        return Err(CliError::Config(format!("alpha0 must be finite and at least 1, got {}", args.alpha0)));
    }
    if args.lambdas.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(CliError::Config("lambdas must lie in (0, 1)".into()));
    }
    if !(args.radius > 0.0) || !(args.epsilon0 > 0.0) || args.samples == 0 {
        return Err(CliError::Config("radius, epsilon0 and samples must be positive".into()));
    }
    let mut manifest = RunManifest::new("slqc-audit", &args.out).config(&args.gmm).seed(args.seed);
    let spec = load_gmm(&args.gmm)?;
    let data = sample_gmm(&spec, args.n, FeatureConfig::normalized(), args.seed)?;
    let d = data.dim();
    let min_eig = min_eigenvalue(&second_moment(&data)?);
    let theta0 = minimizer(&data, args.alpha0, args.radius)?;
    let kappa0 = theta_lipschitz_constant(args.alpha0, args.radius + 1.0, d)?;
    let base = SlqcCertificate::new(args.epsilon0, kappa0, theta0.clone())?;
    let f0 = OracleFunction::from_risk(data.clone(), args.alpha0)?;
    let targets: Vec<(AlphaParam, Option<OracleFunction>)> = args
        .targets
        .iter()
        .map(|&t| -> CliResult<_> {
            if t.value() < args.alpha0.value() {
                return Err(CliError::Config(format!("target {t} is below alpha0 {}", args.alpha0)));
            }
            let oracle = if t.is_infinite() { None } else { Some(OracleFunction::from_risk(data.clone(), t)?) };
            Ok((t, oracle))
        })
        .collect::<CliResult<_>>()?;
    let points = audit_points(&vec![0.0; d], args.radius, args.samples, args.seed);
    let setup = Setup {
        data: &data,
        alpha0: args.alpha0,
        theta0: &theta0,
        base: &base,
        f0: &f0,
        targets: &targets,
        lambdas: &args.lambdas,
        epsilon0: args.epsilon0,
        kappa0,
        radius: args.radius,
    };
    let audits: Vec<PointAudit> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| audit_point(&setup, i, p))
        .collect::<alpha_lab::Result<_>>()?;

    let mut header = vec!["point".to_string()];
    header.extend(indexed_columns("theta", d));
    header.extend(
        ["distance_to_theta0", "base_verdict", "gradient_norm", "target_alpha", "single_step_sup", "status"]
            .map(String::from),
    );
    header.extend(["epsilon", "kappa", "rho", "verdict"].map(String::from));
    let mut table = Table::new(header);
    let mut boot = Table::new([
        "point",
        "lambda",
        "gradient_floor",
        "alpha",
        "epsilon",
        "epsilon_recursion_limit",
        "rho_lower_bound",
        "status",
        "verdict",
    ]);
    let (mut checked, mut violations, mut bchecked, mut bviolations, mut base_failures) = (0, 0, 0, 0, 0);
    for a in audits {
        checked += a.checked;
        violations += a.violations;
        bchecked += a.bootstrap_checked;
        bviolations += a.bootstrap_violations;
        base_failures += a.base_failures;
        a.rows.into_iter().for_each(|r| table.push(r));
        a.bootstrap_rows.into_iter().for_each(|r| boot.push(r));
    }
    let range_exceeded = table_count(&table, "range_exceeded");

    manifest.note("alpha0", args.alpha0);
    manifest.note("n", args.n);
    manifest.note("radius", num(args.radius));
    manifest.note("epsilon0", num(args.epsilon0));
    manifest.note("kappa0", num(kappa0));
    manifest.note("theta0", theta0.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" "));
    manifest.note("second_moment_min_eigenvalue", num(min_eig));
    manifest.note("base_failures", base_failures);
    manifest.note("evolved_checked", checked);
    manifest.note("evolved_violations", violations);
    manifest.note("range_exceeded", range_exceeded);
    manifest.note("bootstrap_checked", bchecked);
    manifest.note("bootstrap_violations", bviolations);
    table.write(&args.out, &manifest)?;
    let boot_path = companion_path(&args.out, "bootstrap");
    boot.write(&boot_path, &manifest)?;
    eprintln!(
        "slqc-audit: {} points; base failures {base_failures}; evolved {checked} checked, {violations} violations, \
         {range_exceeded} beyond the admissible range; bootstrapped {bchecked} checked, {bviolations} violations",
        points.len()
    );
    audit_outcome(
        strict,
        violations == 0 && bviolations == 0 && base_failures == 0,
        format!(
            "{violations} evolved and {bviolations} bootstrapped certificate violations, {base_failures} base failures"
        ),
    )
}

fn table_count(table: &Table, status: &str) -> usize {
    table.count_where("status", status)
}
