//! Generalization bounds for the logistic model under alpha-loss, their
//! Monte Carlo audits, and the empirical asymptotic-optimality trend.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::harness::{
    bayes_risk, linear_rule_error, run_rng, FeatureConfig, FeatureMap, GmmSampler, GmmSpec,
    TrainConfig, train_gd, Termination,
};
use crate::logistic::{LabeledDataset, Sampler};
use crate::loss::{loss_sup_bound, margin_alpha_loss, margin_lipschitz_constant, sigmoid, Margin};
use crate::numeric::{dot, log_sigmoid, mean_and_se};

/// Parameters of a uniform deviation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub alpha: AlphaParam,
    pub r: f64,
    pub d: usize,
    pub n: usize,
    pub delta: f64,
}

impl BoundQuery {
    pub fn new(alpha: AlphaParam, r: f64, d: usize, n: usize, delta: f64) -> Result<Self> {
        let q = BoundQuery { alpha, r, d, n, delta };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Argument(format!("r must be positive and finite, got {}", self.r)));
        }
        if self.d == 0 || self.n == 0 {
            return Err(Error::Argument("d and n must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Argument(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// Largest attainable margin magnitude `r√d` for features in `[0, 1]^d`.
    pub fn margin_radius(&self) -> f64 {
        self.r * (self.d as f64).sqrt()
    }

    fn confidence_term(&self) -> f64 {
        (2.0 * (4.0 / self.delta).ln() / self.n as f64).sqrt()
    }
}

/// Rademacher bound `C·2r√d/√n + 4·D·√(2 log(4/δ)/n)` on
/// `sup_θ |R_α(θ) − R̂_α(θ)|` over the ball of radius `r`.
pub fn rademacher_bound(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    let r0 = q.margin_radius();
    let c = margin_lipschitz_constant(q.alpha, r0)?;
    let d = loss_sup_bound(q.alpha, r0)?;
    Ok(c * 2.0 * r0 / (q.n as f64).sqrt() + 4.0 * d * q.confidence_term())
}

/// Bound on `sup_θ |R_∞(θ) − R̂_α(θ)|` for `α ≥ 1`: the `α = ∞` Rademacher
/// term plus the saturation term `(log σ(−r√d))²/(2α)`.
pub fn uniform_discrepancy_bound(q: &BoundQuery) -> Result<f64> {
    q.validate()?;
    if !q.alpha.is_infinite() && q.alpha.value() < 1.0 {
        return Err(Error::Argument(format!(
            "uniform discrepancy bound needs alpha >= 1, got {}",
            q.alpha
        )));
    }
    let r0 = q.margin_radius();
    let rademacher = sigmoid(r0) * (2.0 * r0 / (q.n as f64).sqrt() + 4.0 * q.confidence_term());
    let saturation = log_sigmoid(-r0).powi(2) / 2.0 * q.alpha.inverse();
    Ok(rademacher + saturation)
}

/// Confidence level `δ` at which [`rademacher_bound`] equals `gap`
/// (capped at 1; 1 when the gap does not exceed the complexity term).
pub fn deviation_tail_probability(q: &BoundQuery, gap: f64) -> Result<f64> {
    q.validate()?;
    let r0 = q.margin_radius();
    let c = margin_lipschitz_constant(q.alpha, r0)?;
    let d = loss_sup_bound(q.alpha, r0)?;
    let excess = gap - c * 2.0 * r0 / (q.n as f64).sqrt();
    if excess <= 0.0 {
        return Ok(1.0);
    }
    let t = excess / (4.0 * d);
    Ok((4.0 * (-(q.n as f64) * t * t / 2.0).exp()).min(1.0))
}

/// Uniform draw from the closed ball of radius `r` in `R^d`.
pub fn uniform_in_ball<R: Rng + ?Sized>(d: usize, r: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = r * rng.random::<f64>().powf(1.0 / d as f64) / n;
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

/// Mean alpha-loss on `data` with its standard error.
pub fn risk_with_std_error(theta: &[f64], data: &LabeledDataset, alpha: AlphaParam) -> (f64, f64) {
    let losses: Vec<f64> = (0..data.len())
        .map(|i| margin_alpha_loss(alpha, Margin(data.y(i).sign() * dot(theta, data.x(i)))))
        .collect();
    mean_and_se(&losses)
}

/// Settings of a Monte Carlo generalization audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub alphas: Vec<AlphaParam>,
    pub r: f64,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    /// Number of random parameters over which the supremum is taken.
    pub thetas: usize,
    /// Size of the sample standing in for the population.
    pub population: usize,
    pub seed: u64,
    /// Standard errors of slack added to the measured deviation.
    #[serde(default = "default_slack")]
    pub se_slack: f64,
}

fn default_slack() -> f64 {
    3.0
}

impl AuditConfig {
    pub fn new(alphas: Vec<AlphaParam>, n: usize, delta: f64, trials: usize, seed: u64) -> Self {
        AuditConfig {
            alphas,
            r: 1.0,
            n,
            delta,
            trials,
            thetas: 200,
            population: 1_000_000,
            seed,
            se_slack: default_slack(),
        }
    }
}

/// One trial of an audit for one α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialAudit {
    pub trial: usize,
    pub alpha: AlphaParam,
    /// `max_θ (|measured deviation| + slack·SE)`.
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Outcome of an audit across trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundAuditReport {
    pub trials: Vec<TrialAudit>,
    pub delta: f64,
}

impl BoundAuditReport {
    /// Fraction of trials violating the bound, for one α.
    pub fn failure_rate(&self, alpha: AlphaParam) -> f64 {
        let rows: Vec<&TrialAudit> = self.trials.iter().filter(|t| t.alpha == alpha).collect();
        if rows.is_empty() {
            return 0.0;
        }
        rows.iter().filter(|t| !t.holds).count() as f64 / rows.len() as f64
    }

    /// Whether every α fails on at most a `δ` fraction of trials.
    pub fn within_confidence(&self) -> bool {
        let mut alphas: Vec<AlphaParam> = self.trials.iter().map(|t| t.alpha).collect();
        alphas.dedup();
        alphas.iter().all(|&a| self.failure_rate(a) <= self.delta)
    }

    pub fn max_ratio(&self) -> f64 {
        self.trials.iter().map(|t| t.measured / t.bound).fold(0.0, f64::max)
    }
}

struct PopulationTable {
    thetas: Vec<Vec<f64>>,
    /// `risk[a][t]` = (mean, SE) of the population estimate for alpha `a`, parameter `t`.
    risk: Vec<Vec<(f64, f64)>>,
}

fn population_table(
    sampler: &GmmSampler,
    alphas: &[AlphaParam],
    config: &AuditConfig,
) -> Result<PopulationTable> {
    let d = sampler.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let thetas: Vec<Vec<f64>> = (0..config.thetas).map(|_| uniform_in_ball(d, config.r, &mut rng)).collect();
    let population = sampler.sample(config.population, &mut rng)?;
    let risk = alphas
        .iter()
        .map(|&a| thetas.par_iter().map(|t| risk_with_std_error(t, &population, a)).collect())
        .collect();
    Ok(PopulationTable { thetas, risk })
}

fn audit_sampler(spec: &GmmSpec) -> Result<GmmSampler> {
    GmmSampler::new(spec, FeatureConfig { map: FeatureMap::default_box(), bias: false })
}

fn sup_deviation(
    table: &PopulationTable,
    alpha_index: usize,
    data: &LabeledDataset,
    empirical_alpha: AlphaParam,
    slack: f64,
) -> f64 {
    table
        .thetas
        .iter()
        .zip(&table.risk[alpha_index])
        .map(|(t, &(pop, pop_se))| {
            let (emp, _) = risk_with_std_error(t, data, empirical_alpha);
            (emp - pop).abs() + slack * pop_se
        })
        .fold(0.0, f64::max)
}

/// Audits [`rademacher_bound`]: for each trial draws `n` training samples
/// (features mapped into the unit cube) and compares the sup over random
/// parameters of `|R̂_α − R_α|` with the bound.
pub fn rademacher_audit(spec: &GmmSpec, config: &AuditConfig) -> Result<BoundAuditReport> {
    let sampler = audit_sampler(spec)?;
    let d = sampler.dim();
    let table = population_table(&sampler, &config.alphas, config)?;
    let trials: Vec<Vec<TrialAudit>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<TrialAudit>> {
            let mut rng = run_rng(config.seed ^ 0x5eed, trial);
            let data = sampler.sample(config.n, &mut rng)?;
            config
                .alphas
                .iter()
                .enumerate()
                .map(|(k, &alpha)| {
                    let bound = rademacher_bound(&BoundQuery::new(alpha, config.r, d, config.n, config.delta)?)?;
                    let measured = sup_deviation(&table, k, &data, alpha, config.se_slack);
                    Ok(TrialAudit { trial, alpha, measured, bound, holds: measured <= bound })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(BoundAuditReport { trials: trials.into_iter().flatten().collect(), delta: config.delta })
}

/// Audits [`uniform_discrepancy_bound`]: compares the empirical α-risk with
/// the population `∞`-risk, for every `α ≥ 1` in the config.
pub fn uniform_discrepancy_audit(spec: &GmmSpec, config: &AuditConfig) -> Result<BoundAuditReport> {
    let sampler = audit_sampler(spec)?;
    let d = sampler.dim();
    let table = population_table(&sampler, &[AlphaParam::INFINITY], config)?;
    let trials: Vec<Vec<TrialAudit>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<TrialAudit>> {
            let mut rng = run_rng(config.seed ^ 0x5eed, trial);
            let data = sampler.sample(config.n, &mut rng)?;
            config
                .alphas
                .iter()
                .map(|&alpha| {
                    let bound = uniform_discrepancy_bound(&BoundQuery::new(alpha, config.r, d, config.n, config.delta)?)?;
                    let measured = sup_deviation(&table, 0, &data, alpha, config.se_slack);
                    Ok(TrialAudit { trial, alpha, measured, bound, holds: measured <= bound })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(BoundAuditReport { trials: trials.into_iter().flatten().collect(), delta: config.delta })
}

/// One row of the optimality trend table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub n: usize,
    /// Mean exact 0-1 risk of the trained predictors.
    pub risk: f64,
    pub bayes_risk: f64,
    pub gap: f64,
    /// Standard error of the gap across runs.
    pub std_error: f64,
    pub unconverged_runs: usize,
}

/// Trend of the excess 0-1 risk of empirical α-risk minimizers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendTable {
    pub alpha: AlphaParam,
    pub rows: Vec<TrendRow>,
    /// The trend is meaningful only if the α-risk minimum over all
    /// functions is attained by a linear predictor; this is not checked.
    pub conditional_on_linear_attainment: bool,
}

impl TrendTable {
    /// Gap non-increasing in `n`, allowing one standard error (the larger of
    /// the two adjacent rows) at each step.
    pub fn is_non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].gap <= w[0].gap + w[0].std_error.max(w[1].std_error))
    }
}

/// Exact 0-1 risk under `spec` of the feature-space linear predictor `theta`.
pub fn predictor_error(spec: &GmmSpec, features: FeatureConfig, theta: &[f64]) -> Result<f64> {
    let d = spec.dim();
    let (w, b) = if features.bias { (&theta[..d], theta[d]) } else { (theta, 0.0) };
    let (w, b): (Vec<f64>, f64) = match features.map {
        FeatureMap::Raw => (w.to_vec(), b),
        FeatureMap::ClipBox { low, high } => {
            // Inside the box, ⟨w, (x − low)/(high − low)⟩ + b is affine in x.
            let s = high - low;
            (w.iter().map(|v| v / s).collect(), b - low * w.iter().sum::<f64>() / s)
        }
    };
    linear_rule_error(spec, &w, b)
}

/// For each `n`, trains `runs` empirical α-risk minimizers and reports the
/// mean exact 0-1 risk minus the Bayes risk.
pub fn optimality_trend(
    spec: &GmmSpec,
    alpha: AlphaParam,
    n_grid: &[usize],
    runs: usize,
    features: FeatureConfig,
    train: &TrainConfig,
    seed: u64,
) -> Result<TrendTable> {
    if runs == 0 || n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::Argument("trend needs runs >= 1 and positive sample sizes".into()));
    }
    let sampler = GmmSampler::new(spec, features)?;
    let bayes = bayes_risk(spec)?;
    let tc = TrainConfig { alpha, ..*train };
    let rows = n_grid
        .iter()
        .enumerate()
        .map(|(k, &n)| -> Result<TrendRow> {
            let outcomes: Vec<(f64, bool)> = (0..runs)
                .into_par_iter()
                .map(|run| -> Result<(f64, bool)> {
                    let mut rng = run_rng(seed.wrapping_add(k as u64), run);
                    let data = sampler.sample(n, &mut rng)?;
                    let res = train_gd(&data, &tc)?;
                    let err = predictor_error(spec, features, res.theta.as_slice())?;
                    Ok((err - bayes, res.termination == Termination::Converged))
                })
                .collect::<Result<_>>()?;
            let gaps: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
            let (gap, std_error) = mean_and_se(&gaps);
            Ok(TrendRow {
                n,
                risk: gap + bayes,
                bayes_risk: bayes,
                gap,
                std_error,
                unconverged_runs: outcomes.iter().filter(|o| !o.1).count(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(TrendTable { alpha, rows, conditional_on_linear_attainment: true })
}
