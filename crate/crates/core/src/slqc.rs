//! Strict local quasi-convexity (SLQC): pointwise certificate checks,
//! normalized gradient descent, and the evolution of certificates as α
//! grows, both in a single step and bootstrapped over many small steps.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::logistic::{empirical_alpha_risk, risk_and_gradient, LabeledDataset};
use crate::numeric::{dot, mean_and_se, norm, project_to_ball};

/// Gradient norms at or below this are treated as zero.
pub const ZERO_GRADIENT: f64 = 1e-12;
/// Absolute slack applied to the certificate inequalities.
pub const CHECK_SLACK: f64 = 1e-12;
/// Default number of audit points.
pub const DEFAULT_AUDIT_BUDGET: usize = 512;

/// An `(ε, κ, θ₀)` certificate with radius `ρ = ε/κ`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlqcCertificate {
    epsilon: f64,
    kappa: f64,
    theta0: Vec<f64>,
}

impl SlqcCertificate {
    pub fn new(epsilon: f64, kappa: f64, theta0: Vec<f64>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Argument(format!(
                "epsilon and kappa must be positive and finite, got ({epsilon}, {kappa})"
            )));
        }
        Ok(SlqcCertificate { epsilon, kappa, theta0 })
    }

    /// Builds a certificate from `ε` and the radius `ρ`.
    pub fn from_radius(epsilon: f64, rho: f64, theta0: Vec<f64>) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Argument(format!("radius must be positive, got {rho}")));
        }
        SlqcCertificate::new(epsilon, epsilon / rho, theta0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    pub fn rho(&self) -> f64 {
        self.epsilon / self.kappa
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A differentiable objective given by value and gradient evaluators.
#[derive(Clone)]
pub struct OracleFunction {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl fmt::Debug for OracleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleFunction").field("dim", &self.dim).finish_non_exhaustive()
    }
}

/// Tolerance of the finite-difference spot check at registration.
pub const REGISTRATION_TOLERANCE: f64 = 1e-5;

impl OracleFunction {
    /// Registers an objective, spot-checking the gradient against central
    /// differences of the value at a few fixed points.
    pub fn new<V, G>(dim: usize, value: V, gradient: G) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        let oracle = OracleFunction { dim, value: Arc::new(value), gradient: Arc::new(gradient) };
        let probes = [
            vec![0.0; dim],
            (0..dim).map(|i| 0.3 - 0.17 * i as f64).collect::<Vec<_>>(),
        ];
        for p in &probes {
            let err = oracle.finite_difference_error(p, 1e-5)?;
            if err > REGISTRATION_TOLERANCE {
                return Err(Error::Argument(format!(
                    "gradient disagrees with finite differences by {err:e} at {p:?}"
                )));
            }
        }
        Ok(oracle)
    }

    /// The empirical alpha-risk of a dataset as an oracle.
    pub fn from_risk(data: LabeledDataset, alpha: AlphaParam) -> Result<Self> {
        let d = data.dim();
        let data = Arc::new(data);
        let dv = Arc::clone(&data);
        OracleFunction::new(
            d,
            move |t| empirical_alpha_risk(t, &dv, alpha).unwrap_or(f64::NAN),
            move |t| {
                risk_and_gradient(t, &data, alpha)
                    .map(|(_, g)| g)
                    .unwrap_or_else(|_| vec![f64::NAN; t.len()])
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        (self.value)(theta)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        (self.gradient)(theta)
    }

    /// Largest relative deviation between the gradient and central differences.
    pub fn finite_difference_error(&self, theta: &[f64], step: f64) -> Result<f64> {
        self.check_dim(theta)?;
        let g = self.gradient(theta);
        let mut worst = 0.0f64;
        let mut t = theta.to_vec();
        for i in 0..self.dim {
            let orig = t[i];
            t[i] = orig + step;
            let up = self.value(&t);
            t[i] = orig - step;
            let down = self.value(&t);
            t[i] = orig;
            let fd = (up - down) / (2.0 * step);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
        Ok(worst)
    }

    fn check_dim(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: theta.len() });
        }
        Ok(())
    }
}

/// Which inequality of a certificate failed at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ViolationKind {
    /// Inside the `ρ`-ball the point must be `ε`-optimal, and it is not.
    InsideBallNotOptimal,
    ZeroGradient,
    /// `⟨−∇f(θ), θ₀ − θ⟩ < ρ‖∇f(θ)‖`.
    InnerProduct,
}

/// Outcome of a pointwise certificate check.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum SlqcVerdict {
    /// `f(θ) − f(θ₀) ≤ ε`.
    Condition1 { value_gap: f64 },
    /// The negative gradient points into the whole `ρ`-ball around `θ₀`.
    Condition2 { inner_product: f64, required: f64 },
    Fails(SlqcViolation),
}

impl SlqcVerdict {
    pub fn holds(&self) -> bool {
        !matches!(self, SlqcVerdict::Fails(_))
    }
}

/// Witness data for a failed check.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlqcViolation {
    pub kind: ViolationKind,
    pub value_gap: f64,
    pub distance: f64,
    pub gradient_norm: f64,
    pub inner_product: f64,
    pub required: f64,
}

/// Checks whether `f` satisfies the certificate at `theta`.
pub fn check_slqc_at(
    f: &OracleFunction,
    theta: &[f64],
    cert: &SlqcCertificate,
) -> Result<SlqcVerdict> {
    f.check_dim(theta)?;
    f.check_dim(cert.theta0())?;
    let value_gap = f.value(theta) - f.value(cert.theta0());
    if value_gap <= cert.epsilon() + CHECK_SLACK {
        return Ok(SlqcVerdict::Condition1 { value_gap });
    }
    let rho = cert.rho();
    let diff: Vec<f64> = cert.theta0().iter().zip(theta).map(|(a, b)| a - b).collect();
    let distance = norm(&diff);
    let g = f.gradient(theta);
    let gradient_norm = norm(&g);
    let inner_product = -dot(&g, &diff);
    let required = rho * gradient_norm;
    let violation = |kind| {
        Ok(SlqcVerdict::Fails(SlqcViolation {
            kind,
            value_gap,
            distance,
            gradient_norm,
            inner_product,
            required,
        }))
    };
    if distance <= rho {
        return violation(ViolationKind::InsideBallNotOptimal);
    }
    if gradient_norm <= ZERO_GRADIENT {
        return violation(ViolationKind::ZeroGradient);
    }
    if inner_product + CHECK_SLACK >= required {
        Ok(SlqcVerdict::Condition2 { inner_product, required })
    } else {
        violation(ViolationKind::InnerProduct)
    }
}

/// Normalized gradient descent settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NgdConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub initial: Vec<f64>,
}

impl NgdConfig {
    pub fn new(learning_rate: f64, iterations: usize, initial: Vec<f64>) -> Result<Self> {
        if !(learning_rate > 0.0) || iterations == 0 {
            return Err(Error::Argument(format!(
                "need learning_rate > 0 and iterations >= 1, got ({learning_rate}, {iterations})"
            )));
        }
        Ok(NgdConfig { learning_rate, iterations, initial })
    }

    /// Step size `ε/κ` and iteration count from a certificate.
    pub fn from_certificate(cert: &SlqcCertificate, initial: Vec<f64>) -> Result<Self> {
        let dist = norm(
            &initial.iter().zip(cert.theta0()).map(|(a, b)| a - b).collect::<Vec<_>>(),
        );
        NgdConfig::new(cert.rho(), ngd_iteration_bound(cert, dist)?, initial)
    }
}

/// A closed Euclidean ball used as an optimization domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn centered(d: usize, radius: f64) -> Self {
        Ball { center: vec![0.0; d], radius }
    }
}

/// Result of a normalized gradient descent run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NgdResult {
    pub best_theta: Vec<f64>,
    pub best_value: f64,
    /// One-based index of the returned iterate.
    pub best_iteration: usize,
    /// `f(θ_t)` for every visited iterate.
    pub values: Vec<f64>,
    /// True when a zero gradient ended the run before `T` iterates.
    pub stopped_early: bool,
}

/// Runs normalized gradient descent and returns the best visited iterate,
/// breaking ties by the earliest iteration.
pub fn ngd(f: &OracleFunction, config: &NgdConfig, domain: Option<&Ball>) -> Result<NgdResult> {
    f.check_dim(&config.initial)?;
    if let Some(b) = domain {
        f.check_dim(&b.center)?;
    }
    let mut theta = config.initial.clone();
    if let Some(b) = domain {
        project_to_ball(&mut theta, &b.center, b.radius);
    }
    let mut values = Vec::with_capacity(config.iterations);
    let mut best = (f64::INFINITY, theta.clone(), 0usize);
    let mut stopped_early = false;
    for t in 1..=config.iterations {
        let v = f.value(&theta);
        if v.is_nan() {
            return Err(Error::Numeric(format!("objective is NaN at iterate {t}: {theta:?}")));
        }
        values.push(v);
        if v < best.0 {
            best = (v, theta.clone(), t);
        }
        if t == config.iterations {
            break;
        }
        let g = f.gradient(&theta);
        let gn = norm(&g);
        if gn <= ZERO_GRADIENT {
            stopped_early = true;
            break;
        }
        for (th, gi) in theta.iter_mut().zip(&g) {
            *th -= config.learning_rate * gi / gn;
        }
        if let Some(b) = domain {
            project_to_ball(&mut theta, &b.center, b.radius);
        }
    }
    Ok(NgdResult {
        best_theta: best.1,
        best_value: best.0,
        best_iteration: best.2,
        values,
        stopped_early,
    })
}

/// Iterations `⌈κ²·dist²/ε²⌉` (at least one) that guarantee `ε`-optimality.
pub fn ngd_iteration_bound(cert: &SlqcCertificate, start_distance: f64) -> Result<usize> {
    if !(start_distance >= 0.0) {
        return Err(Error::Argument(format!(
            "start distance must be nonnegative, got {start_distance}"
        )));
    }
    let t = (start_distance / cert.rho()).powi(2).ceil();
    if t > usize::MAX as f64 / 2.0 {
        return Err(Error::Argument("iteration bound overflows".into()));
    }
    Ok((t as usize).max(1))
}

/// Pointwise constants that drive certificate evolution in α.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvolutionInput {
    pub alpha0: f64,
    pub epsilon0: f64,
    pub kappa0: f64,
    /// Gradient norm `‖∇R_{α₀}(θ)‖` (single step) or a uniform lower bound
    /// `g` over `α' ≥ α₀` (bootstrapping).
    pub gradient: f64,
    /// Lipschitz constant of the risk in `1/α`.
    pub l: f64,
    /// Lipschitz constant of the gradient in `1/α`.
    pub j: f64,
    /// Radius of the parameter ball.
    pub r: f64,
}

impl EvolutionInput {
    pub fn rho0(&self) -> f64 {
        self.epsilon0 / self.kappa0
    }

    fn validate(&self) -> Result<()> {
        let positive = [self.epsilon0, self.kappa0, self.gradient, self.j, self.r];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !(self.l >= 0.0) {
            return Err(Error::Argument(format!(
                "evolution constants must be positive and finite: {self:?}"
            )));
        }
        if !(self.alpha0 >= 1.0) || !self.alpha0.is_finite() {
            return Err(Error::Argument(format!(
                "starting alpha must lie in [1, inf), got {}",
                self.alpha0
            )));
        }
        Ok(())
    }

    /// Supremum of admissible targets for a single evolution step.
    pub fn single_step_sup(&self) -> f64 {
        let a0 = self.alpha0;
        a0 + a0 * a0 * self.gradient / (2.0 * self.j * (1.0 + self.r / self.rho0()))
    }
}

/// Certificate parameters after evolving to a larger α.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EvolvedParameters {
    pub alpha: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub rho: f64,
}

/// Single-step evolution of an `(ε₀, κ₀)` certificate from `α₀` to `alpha`.
pub fn evolve_slqc(input: &EvolutionInput, alpha: AlphaParam) -> Result<EvolvedParameters> {
    input.validate()?;
    let a0 = input.alpha0;
    let a = alpha.value();
    if a < a0 {
        return Err(Error::Argument(format!("target alpha {a} is below the start {a0}")));
    }
    let sup = input.single_step_sup();
    if a > a0 && a >= sup {
        return Err(Error::RangeExceeded { target: a, sup });
    }
    let rho0 = input.rho0();
    // (α − α₀)/(αα₀) written as 1/α₀ − 1/α so that α = ∞ is excluded above
    // and large α stays accurate.
    let delta_inv = 1.0 / a0 - alpha.inverse();
    let epsilon = input.epsilon0 + 2.0 * input.l * delta_inv;
    let shrink = (1.0 + 2.0 * input.r / rho0) * input.j * delta_inv
        / (input.gradient - input.j * delta_inv);
    let rho = rho0 * (1.0 - shrink);
    Ok(EvolvedParameters { alpha: a, epsilon, kappa: epsilon / rho, rho })
}

/// Bootstrapped certificate parameters at a fraction `λ` of the range.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BootstrapParameters {
    pub lambda: f64,
    pub alpha: f64,
    /// `ε_λ` in closed form with the `(1 + rκ₀/ε₀)` denominator.
    pub epsilon: f64,
    /// The limit `ε₀ + 2L(1/α₀ − 1/α_λ)` of the small-step recursion.
    pub epsilon_recursion_limit: f64,
    /// Strict lower bound `ρ₀(1 − λ)` on the radius.
    pub rho_lower_bound: f64,
}

/// Closed-form bootstrapped evolution for `λ ∈ (0, 1)`.
///
/// `input.gradient` must be a lower bound on `‖∇R_{α'}(θ)‖` for every
/// `α' ≥ α₀`. Note the asymmetry: `α_λ` carries `(1 + 2rκ₀/ε₀)` while
/// `ε_λ` carries `(1 + rκ₀/ε₀)`; both are kept.
pub fn bootstrap_slqc(input: &EvolutionInput, lambda: f64) -> Result<BootstrapParameters> {
    input.validate()?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Argument(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    let a0 = input.alpha0;
    let ratio = input.r / input.rho0();
    let base = a0 * a0 * input.gradient / input.j;
    let alpha = a0 + lambda * base / (1.0 + 2.0 * ratio);
    let step = (alpha - a0) / (alpha * a0);
    let epsilon = input.epsilon0 + 2.0 * lambda * input.l * step * base / (1.0 + ratio);
    let epsilon_recursion_limit = input.epsilon0 + 2.0 * input.l * step;
    Ok(BootstrapParameters {
        lambda,
        alpha,
        epsilon,
        epsilon_recursion_limit,
        rho_lower_bound: input.rho0() * (1.0 - lambda),
    })
}

/// How the gradient norm `G_{n−1}` is supplied to the recursion.
pub enum GradientMode<'a> {
    /// Substitute the uniform lower bound `g` at every step.
    Uniform,
    /// Evaluate `G(α)` at every step.
    PerStep(&'a (dyn Fn(f64) -> f64 + Sync)),
}

/// The small-step recursion for `(α_n, ε_n, ρ_n)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BootstrapSequences {
    pub steps: usize,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub rho: Vec<f64>,
    /// Largest `n` for which the radius is guaranteed positive.
    pub horizon: usize,
    input: EvolutionInput,
}

impl BootstrapSequences {
    /// Index `N_λ = ⌊λ·ρ₀/(ρ₀ + 2r)·α₀²g/J·N⌋`.
    pub fn lambda_index(&self, lambda: f64) -> usize {
        let i = &self.input;
        let rho0 = i.rho0();
        (lambda * rho0 / (rho0 + 2.0 * i.r) * i.alpha0 * i.alpha0 * i.gradient / i.j
            * self.steps as f64)
            .floor() as usize
    }

    /// `(α, ε, ρ)` at index `N_λ`.
    pub fn at_lambda(&self, lambda: f64) -> Result<(f64, f64, f64)> {
        let n = self.lambda_index(lambda);
        if n >= self.alpha.len() {
            return Err(Error::Argument(format!(
                "lambda index {n} lies beyond the computed sequence"
            )));
        }
        Ok((self.alpha[n], self.epsilon[n], self.rho[n]))
    }
}

/// Runs the recursion with step `1/N`, computing at least `N` steps and far
/// enough to cover the positivity horizon.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_sequences(
    alpha0: f64,
    epsilon0: f64,
    rho0: f64,
    g: f64,
    l: f64,
    j: f64,
    r: f64,
    steps: usize,
    mode: GradientMode<'_>,
) -> Result<BootstrapSequences> {
    if !(rho0 > 0.0) {
        return Err(Error::Argument(format!("rho0 must be positive, got {rho0}")));
    }
    let input = EvolutionInput {
        alpha0,
        epsilon0,
        kappa0: epsilon0 / rho0,
        gradient: g,
        l,
        j,
        r,
    };
    input.validate()?;
    let n_f = steps as f64;
    let required = j / (alpha0 * alpha0 * g);
    if !(n_f > required) {
        return Err(Error::Argument(format!(
            "step count N = {steps} must exceed J/(alpha0^2 g) = {required}"
        )));
    }
    let horizon = (alpha0 * alpha0 * g / (1.0 + 2.0 * r / rho0) / j * n_f).floor() as usize;
    let len = steps.max(horizon) + 1;
    let mut alpha = Vec::with_capacity(len);
    let mut epsilon = Vec::with_capacity(len);
    let mut rho = Vec::with_capacity(len);
    alpha.push(alpha0);
    epsilon.push(epsilon0);
    rho.push(rho0);
    for n in 1..len {
        let a_prev = alpha[n - 1];
        let a_n = alpha0 + n as f64 / n_f;
        let g_prev = match &mode {
            GradientMode::Uniform => g,
            GradientMode::PerStep(f) => f(a_prev),
        };
        let denom = a_n * a_prev * g_prev - j / n_f;
        if !(denom > 0.0) {
            return Err(Error::Numeric(format!(
                "recursion denominator is nonpositive at step {n}"
            )));
        }
        alpha.push(a_n);
        epsilon.push(epsilon[n - 1] + 2.0 * l / (a_n * a_prev * n_f));
        rho.push(rho[n - 1] - (rho[n - 1] + 2.0 * r) * j / denom / n_f);
    }
    Ok(BootstrapSequences { steps, alpha, epsilon, rho, horizon, input })
}

/// Deterministic audit points in a ball: half on concentric spheres, half
/// uniform in the volume.
pub fn audit_points(center: &[f64], radius: f64, budget: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shells = 4;
    let on_shells = budget / 2;
    let mut points = Vec::with_capacity(budget);
    let direction = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm(&v);
            if n > 1e-12 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    };
    for k in 0..on_shells {
        let shell_radius = radius * ((k % shells) + 1) as f64 / shells as f64;
        let u = direction(&mut rng);
        points.push(center.iter().zip(&u).map(|(c, x)| c + shell_radius * x).collect());
    }
    while points.len() < budget {
        let u = direction(&mut rng);
        let s = radius * rng.random::<f64>().powf(1.0 / d as f64);
        points.push(center.iter().zip(&u).map(|(c, x)| c + s * x).collect());
    }
    points
}

/// Summary of a certificate audit over many points.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AuditReport {
    pub checked: usize,
    pub condition1: usize,
    pub condition2: usize,
    pub violations: Vec<(Vec<f64>, SlqcViolation)>,
}

/// Checks a certificate at every point, in parallel.
pub fn audit_certificate(
    f: &OracleFunction,
    cert: &SlqcCertificate,
    points: &[Vec<f64>],
) -> Result<AuditReport> {
    let verdicts: Vec<SlqcVerdict> = points
        .par_iter()
        .map(|p| check_slqc_at(f, p, cert))
        .collect::<Result<_>>()?;
    let mut report = AuditReport { checked: points.len(), condition1: 0, condition2: 0, violations: vec![] };
    for (p, v) in points.iter().zip(verdicts) {
        match v {
            SlqcVerdict::Condition1 { .. } => report.condition1 += 1,
            SlqcVerdict::Condition2 { .. } => report.condition2 += 1,
            SlqcVerdict::Fails(w) => report.violations.push((p.clone(), w)),
        }
    }
    Ok(report)
}

/// The α grid `{α₀, α₀ + 0.25, …, 64, ∞}` used for gradient floors.
pub fn gradient_floor_grid(alpha0: f64) -> Vec<AlphaParam> {
    let mut grid = Vec::new();
    let mut a = alpha0;
    while a <= 64.0 + 1e-12 {
        grid.push(AlphaParam::new(a).expect("grid alpha is positive"));
        a += 0.25;
    }
    grid.push(AlphaParam::INFINITY);
    grid
}

/// Conservative lower bound on `‖∇R̂_{α'}(θ)‖` for `α' ≥ α₀`: the minimum
/// over [`gradient_floor_grid`] of the gradient norm minus one standard error.
pub fn gradient_floor(data: &LabeledDataset, alpha0: f64, theta: &[f64]) -> Result<f64> {
    let grid = gradient_floor_grid(alpha0);
    let mut floor = f64::INFINITY;
    for alpha in grid {
        let (_, g) = risk_and_gradient(theta, data, alpha)?;
        let gn = norm(&g);
        let se = if gn > 0.0 {
            let unit: Vec<f64> = g.iter().map(|x| x / gn).collect();
            let proj: Vec<f64> = data
                .margins(theta)
                .iter()
                .enumerate()
                .map(|(i, &z)| {
                    crate::logistic::gradient_factor(alpha, data.y(i), z) * dot(data.x(i), &unit)
                })
                .collect();
            mean_and_se(&proj).1
        } else {
            0.0
        };
        floor = floor.min(gn - se);
    }
    Ok(floor)
}
