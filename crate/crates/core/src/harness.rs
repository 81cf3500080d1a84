//! Seeded Gaussian-mixture experiments: data generation, label-noise and
//! class-imbalance corruption, gradient-descent training, comparison with
//! the Bayes rule, and risk-landscape grids.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::logistic::{
    alpha_lipschitz_gradient, alpha_lipschitz_risk, empirical_alpha_risk, risk_and_gradient,
    risk_gradient_into, Label, LabeledDataset, ParamVector, Sample, Sampler,
};
use crate::numeric::{angle_between, dot, mean_and_se, norm, project_to_ball};

/// Symmetry tolerance for covariance matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Most negative eigenvalue accepted as positive semi-definite.
pub const PSD_TOLERANCE: f64 = -1e-10;

/// A two-class Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    /// `P[Y = −1]`.
    pub prior_negative: f64,
    pub mean_negative: Vec<f64>,
    pub mean_positive: Vec<f64>,
    pub cov_negative: Vec<Vec<f64>>,
    pub cov_positive: Vec<Vec<f64>>,
}

impl GmmSpec {
    /// Equal priors, means `∓μ`, identity covariance.
    pub fn symmetric(mu: &[f64]) -> Self {
        let d = mu.len();
        let eye: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        GmmSpec {
            prior_negative: 0.5,
            mean_negative: mu.iter().map(|m| -m).collect(),
            mean_positive: mu.to_vec(),
            cov_negative: eye.clone(),
            cov_positive: eye,
        }
    }

    /// The balanced mixture with means `±(1, 1)` and identity covariance.
    pub fn standard_symmetric() -> Self {
        GmmSpec::symmetric(&[1.0, 1.0])
    }

    /// Imbalanced mixture with distinct covariances used for landscape plots.
    pub fn landscape_reference() -> Self {
        GmmSpec {
            prior_negative: 0.12,
            mean_negative: vec![-0.18, 1.49],
            mean_positive: vec![-0.01, 0.16],
            cov_negative: vec![vec![3.20, -2.02], vec![-2.02, 2.71]],
            cov_positive: vec![vec![4.19, 1.27], vec![1.27, 0.90]],
        }
    }

    /// Balanced mixture with a shared covariance used for saturation plots.
    pub fn saturation_reference() -> Self {
        let cov = vec![vec![1.38, 0.55], vec![0.55, 2.18]];
        GmmSpec {
            prior_negative: 0.5,
            mean_negative: vec![-0.91, 0.50],
            mean_positive: vec![-0.27, 0.20],
            cov_negative: cov.clone(),
            cov_positive: cov,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean_negative.len()
    }

    pub fn prior(&self, label: Label) -> f64 {
        match label {
            Label::Negative => self.prior_negative,
            Label::Positive => 1.0 - self.prior_negative,
        }
    }

    pub fn mean(&self, label: Label) -> &[f64] {
        match label {
            Label::Negative => &self.mean_negative,
            Label::Positive => &self.mean_positive,
        }
    }

    pub fn cov(&self, label: Label) -> DMatrix<f64> {
        let c = match label {
            Label::Negative => &self.cov_negative,
            Label::Positive => &self.cov_positive,
        };
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| c[i][j])
    }

    /// Whether both classes share one covariance (within the symmetry tolerance).
    pub fn shared_covariance(&self) -> bool {
        (self.cov(Label::Negative) - self.cov(Label::Positive)).amax() <= SYMMETRY_TOLERANCE
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prior_negative > 0.0 && self.prior_negative < 1.0) {
            return Err(Error::Argument(format!(
                "prior must lie in (0, 1), got {}",
                self.prior_negative
            )));
        }
        let d = self.dim();
        if d == 0 {
            return Err(Error::Argument("mixture has zero dimension".into()));
        }
        if self.mean_positive.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.mean_positive.len() });
        }
        for c in [&self.cov_negative, &self.cov_positive] {
            if c.len() != d || c.iter().any(|row| row.len() != d) {
                return Err(Error::Argument(format!("covariance must be {d}x{d}")));
            }
        }
        for label in [Label::Negative, Label::Positive] {
            let c = self.cov(label);
            if (c.clone() - c.transpose()).amax() > SYMMETRY_TOLERANCE {
                return Err(Error::Argument("covariance is not symmetric".into()));
            }
            let min_eig = crate::logistic::min_eigenvalue(&c);
            if min_eig < PSD_TOLERANCE {
                return Err(Error::NotPsd { min_eig });
            }
        }
        Ok(())
    }

    /// Scales both means by `factor`.
    pub fn scale_means(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.mean_negative.iter_mut().for_each(|m| *m *= factor);
        s.mean_positive.iter_mut().for_each(|m| *m *= factor);
        s
    }
}

/// Square-root factor `A` with `A·Aᵀ = Σ`; falls back to the symmetric
/// eigen-square-root for singular (e.g. zero) covariances.
fn covariance_factor(c: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = c.clone().cholesky() {
        return ch.l();
    }
    let eig = SymmetricEigen::new(c.clone());
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * sqrt
}

/// Fixed feature transform applied after sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureMap {
    /// Features as drawn.
    #[default]
    Raw,
    /// Affine map of `[low, high]^d` onto `[0, 1]^d`, clipping outliers.
    ClipBox { low: f64, high: f64 },
}

impl FeatureMap {
    /// The default clipping box `[−6, 6]`.
    pub fn default_box() -> Self {
        FeatureMap::ClipBox { low: -6.0, high: 6.0 }
    }

    pub fn apply(&self, x: &mut [f64]) {
        if let FeatureMap::ClipBox { low, high } = *self {
            for v in x.iter_mut() {
                *v = ((*v - low) / (high - low)).clamp(0.0, 1.0);
            }
        }
    }
}

/// Feature pipeline: a fixed map and an optional appended bias feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct FeatureConfig {
    #[serde(default)]
    pub map: FeatureMap,
    #[serde(default)]
    pub bias: bool,
}

impl FeatureConfig {
    pub fn raw() -> Self {
        FeatureConfig { map: FeatureMap::Raw, bias: false }
    }

    pub fn normalized() -> Self {
        FeatureConfig { map: FeatureMap::default_box(), bias: false }
    }

    pub fn with_bias(mut self) -> Self {
        self.bias = true;
        self
    }

    /// Feature dimension produced from raw dimension `d`.
    pub fn output_dim(&self, d: usize) -> usize {
        d + usize::from(self.bias)
    }

    pub fn transform(&self, raw: &[f64]) -> Vec<f64> {
        let mut x = raw.to_vec();
        self.map.apply(&mut x);
        if self.bias {
            x.push(1.0);
        }
        x
    }

    /// Re-expresses a raw-space linear rule `⟨w, x⟩ + b` in feature space,
    /// as a homogeneous vector (with the offset last when a bias is used).
    pub fn rule_in_feature_space(&self, rule: &LinearRule) -> Vec<f64> {
        let (w, b) = match self.map {
            FeatureMap::Raw => (rule.direction.clone(), rule.offset),
            FeatureMap::ClipBox { low, high } => {
                let w: Vec<f64> = rule.direction.iter().map(|v| v * (high - low)).collect();
                let b = rule.offset + low * rule.direction.iter().sum::<f64>();
                (w, b)
            }
        };
        let mut v = w;
        if self.bias {
            v.push(b);
        }
        v
    }

    fn dataset(&self, raw: Vec<Sample>) -> Result<LabeledDataset> {
        let samples = raw
            .into_iter()
            .map(|mut s| {
                s.x = self.transform(&s.x);
                s
            })
            .collect();
        LabeledDataset::new_unbounded(samples)
    }
}

/// A validated mixture ready for sampling.
#[derive(Debug, Clone)]
pub struct GmmSampler {
    spec: GmmSpec,
    features: FeatureConfig,
    factors: [DMatrix<f64>; 2],
}

impl GmmSampler {
    pub fn new(spec: &GmmSpec, features: FeatureConfig) -> Result<Self> {
        spec.validate()?;
        Ok(GmmSampler {
            factors: [
                covariance_factor(&spec.cov(Label::Negative)),
                covariance_factor(&spec.cov(Label::Positive)),
            ],
            spec: spec.clone(),
            features,
        })
    }

    pub fn spec(&self) -> &GmmSpec {
        &self.spec
    }

    pub fn features(&self) -> FeatureConfig {
        self.features
    }

    /// Raw draw from one class.
    pub fn draw_raw<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Vec<f64> {
        let d = self.spec.dim();
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let idx = usize::from(label == Label::Positive);
        let x = &self.factors[idx] * z;
        self.spec.mean(label).iter().zip(x.iter()).map(|(m, v)| m + v).collect()
    }

    fn draw_label<R: Rng + ?Sized>(&self, rng: &mut R) -> Label {
        if rng.random::<f64>() < self.spec.prior_negative {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    fn raw_mixture<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Sample> {
        (0..n)
            .map(|_| {
                let y = self.draw_label(rng);
                Sample::clean(self.draw_raw(y, rng), y)
            })
            .collect()
    }

    fn raw_class<R: Rng + ?Sized>(&self, label: Label, n: usize, rng: &mut R) -> Vec<Sample> {
        (0..n).map(|_| Sample::clean(self.draw_raw(label, rng), label)).collect()
    }

    /// `n` mixture draws passed through the feature pipeline.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledDataset> {
        self.features.dataset(self.raw_mixture(n, rng))
    }

    /// Exactly `negatives` and `positives` class-conditional draws.
    pub fn sample_counts<R: Rng + ?Sized>(
        &self,
        negatives: usize,
        positives: usize,
        rng: &mut R,
    ) -> Result<LabeledDataset> {
        let mut raw = self.raw_class(Label::Negative, negatives, rng);
        raw.extend(self.raw_class(Label::Positive, positives, rng));
        self.features.dataset(raw)
    }
}

impl Sampler for GmmSampler {
    fn dim(&self) -> usize {
        self.features.output_dim(self.spec.dim())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Label) {
        let y = self.draw_label(rng);
        (self.features.transform(&self.draw_raw(y, rng)), y)
    }
}

/// Draws `n` samples from the mixture with a seeded generator.
pub fn sample_gmm(spec: &GmmSpec, n: usize, features: FeatureConfig, seed: u64) -> Result<LabeledDataset> {
    let sampler = GmmSampler::new(spec, features)?;
    sampler.sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Label noise and class imbalance applied to a training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CorruptionSpec {
    /// Probability of flipping a `Y = −1` label.
    #[serde(default)]
    pub flip_negative: f64,
    /// Probability of flipping a `Y = +1` label.
    #[serde(default)]
    pub flip_positive: f64,
    /// Requested `(negative, positive)` sample counts.
    #[serde(default)]
    pub class_counts: Option<(usize, usize)>,
}

impl CorruptionSpec {
    pub fn clean() -> Self {
        CorruptionSpec::default()
    }

    /// Keeps `negatives` and `positives` samples of each class.
    pub fn imbalance(negatives: usize, positives: usize) -> Self {
        CorruptionSpec { class_counts: Some((negatives, positives)), ..Default::default() }
    }

    /// Flips labels of each class independently.
    pub fn flips(negative: f64, positive: f64) -> Self {
        CorruptionSpec { flip_negative: negative, flip_positive: positive, class_counts: None }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.flip_negative, self.flip_positive] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Argument(format!("flip probability {p} outside [0, 1]")));
            }
        }
        if let Some((a, b)) = self.class_counts {
            if a + b == 0 {
                return Err(Error::Argument("at least one class count must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Subsamples to the requested class counts, then flips labels per class.
/// Flipped samples keep their generating class in `origin`.
pub fn corrupt<R: Rng + ?Sized>(
    data: &LabeledDataset,
    spec: &CorruptionSpec,
    rng: &mut R,
) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut by_class: [Vec<usize>; 2] = [vec![], vec![]];
    for i in 0..data.len() {
        by_class[usize::from(data.y(i) == Label::Positive)].push(i);
    }
    let mut keep: Vec<usize> = match spec.class_counts {
        None => (0..data.len()).collect(),
        Some(counts) => {
            let mut keep = Vec::new();
            for (class, requested) in [(Label::Negative, counts.0), (Label::Positive, counts.1)] {
                let pool = &by_class[usize::from(class == Label::Positive)];
                if requested > pool.len() {
                    return Err(Error::InsufficientSamples {
                        class: class.as_i8(),
                        requested,
                        available: pool.len(),
                    });
                }
                if requested == pool.len() {
                    keep.extend_from_slice(pool);
                } else {
                    keep.extend(sample_indices(rng, pool.len(), requested).into_iter().map(|k| pool[k]));
                }
            }
            keep
        }
    };
    keep.sort_unstable();
    let samples = keep
        .into_iter()
        .map(|i| {
            let mut s = data.sample(i);
            let p = match s.y {
                Label::Negative => spec.flip_negative,
                Label::Positive => spec.flip_positive,
            };
            if p > 0.0 && rng.random::<f64>() < p {
                s.y = s.y.flip();
                s.flipped = !s.flipped;
            }
            s
        })
        .collect();
    LabeledDataset::new_unbounded(samples)
}

/// Seeded entry point for [`corrupt`].
pub fn corrupt_seeded(data: &LabeledDataset, spec: &CorruptionSpec, seed: u64) -> Result<LabeledDataset> {
    corrupt(data, spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: AlphaParam,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    /// Training stops once the (projected) gradient norm falls to this value.
    #[serde(default = "default_optimality")]
    pub optimality: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Radius of the parameter ball; infinite for unconstrained training.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_learning_rate() -> f64 {
    0.01
}
fn default_optimality() -> f64 {
    1e-4
}
fn default_max_iterations() -> usize {
    200_000
}
fn default_radius() -> f64 {
    f64::INFINITY
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: AlphaParam::ONE,
            learning_rate: default_learning_rate(),
            optimality: default_optimality(),
            max_iterations: default_max_iterations(),
            radius: default_radius(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_alpha(alpha: AlphaParam) -> Self {
        TrainConfig { alpha, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(self.optimality > 0.0) || self.max_iterations == 0 {
            return Err(Error::Argument(
                "learning rate, optimality parameter and max iterations must be positive".into(),
            ));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Argument(format!("radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }
}

/// Why training stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// A trained parameter with its convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub theta: ParamVector,
    pub iterations: usize,
    pub termination: Termination,
    /// Norm of the projected-gradient step divided by the learning rate at
    /// the last iterate (the plain gradient norm away from the boundary).
    pub gradient_norm: f64,
    pub risk: f64,
}

/// Full-batch projected gradient descent from `θ = 0`.
pub fn train_gd(data: &LabeledDataset, config: &TrainConfig) -> Result<TrainResult> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = data.dim();
    let origin = vec![0.0; d];
    let mut theta = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;
    let mut step_norm = f64::INFINITY;
    while iterations < config.max_iterations {
        risk_gradient_into(&theta, data, config.alpha, &mut grad)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient at iteration {iterations}, theta = {theta:?}"
            )));
        }
        for k in 0..d {
            next[k] = theta[k] - config.learning_rate * grad[k];
        }
        if config.radius.is_finite() {
            project_to_ball(&mut next, &origin, config.radius);
        }
        step_norm = next
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / config.learning_rate;
        if step_norm <= config.optimality {
            termination = Termination::Converged;
            break;
        }
        std::mem::swap(&mut theta, &mut next);
        iterations += 1;
    }
    if termination == Termination::MaxIterations {
        // Report the stationarity measure at the returned iterate.
        risk_gradient_into(&theta, data, config.alpha, &mut grad)?;
        step_norm = norm(&grad);
    }
    let risk = empirical_alpha_risk(&theta[..], data, config.alpha)?;
    Ok(TrainResult {
        theta: ParamVector::new(theta, config.radius)?,
        iterations,
        termination,
        gradient_norm: step_norm,
        risk,
    })
}

/// A linear decision rule `sign(⟨w, x⟩ + b)` with unit `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRule {
    pub direction: Vec<f64>,
    pub offset: f64,
}

fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Exact 0-1 error of `sign(⟨w, x⟩ + b)` under the mixture.
pub fn linear_rule_error(spec: &GmmSpec, w: &[f64], b: f64) -> Result<f64> {
    spec.validate()?;
    if w.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: w.len() });
    }
    let mut err = 0.0;
    for label in [Label::Negative, Label::Positive] {
        let c = spec.cov(label);
        let wv = DVector::from_column_slice(w);
        let var = (wv.transpose() * &c * &wv)[(0, 0)];
        let m = dot(w, spec.mean(label)) + b;
        // Error for class y is P[y·(⟨w, X⟩ + b) ≤ 0].
        let signed = label.sign() * m;
        let e = if var <= 0.0 {
            if signed > 0.0 { 0.0 } else if signed < 0.0 { 1.0 } else { 0.5 }
        } else {
            std_normal_cdf(-signed / var.sqrt())
        };
        err += spec.prior(label) * e;
    }
    Ok(err)
}

/// Best offset for a fixed direction, by golden-section search on the
/// exact error (unimodal for Gaussian class conditionals along `w`).
fn best_offset(spec: &GmmSpec, w: &[f64]) -> Result<(f64, f64)> {
    let proj: Vec<f64> = [Label::Negative, Label::Positive]
        .iter()
        .map(|&l| dot(w, spec.mean(l)))
        .collect();
    let spread: f64 = [Label::Negative, Label::Positive]
        .iter()
        .map(|&l| {
            let wv = DVector::from_column_slice(w);
            (wv.transpose() * spec.cov(l) * &wv)[(0, 0)].max(0.0).sqrt()
        })
        .fold(0.0, f64::max);
    let center = -(proj[0] + proj[1]) / 2.0;
    let half = (proj[0] - proj[1]).abs() / 2.0 + 8.0 * spread + 1.0;
    // Coarse scan to bracket the global minimum, then golden-section refine.
    let steps = 400;
    let mut best = (f64::INFINITY, center);
    for k in 0..=steps {
        let b = center - half + 2.0 * half * k as f64 / steps as f64;
        let e = linear_rule_error(spec, w, b)?;
        if e < best.0 {
            best = (e, b);
        }
    }
    let h = 2.0 * half / steps as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if linear_rule_error(spec, w, m1)? <= linear_rule_error(spec, w, m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let b = (lo + hi) / 2.0;
    Ok((linear_rule_error(spec, w, b)?, b))
}

/// Bayes-optimal linear rule. Shared covariances use the closed form
/// `w ∝ Σ⁻¹(μ₊ − μ₋)` with the log-prior-ratio offset; other two-dimensional
/// specs fall back to [`bayes_direction_grid`].
pub fn bayes_direction(spec: &GmmSpec) -> Result<LinearRule> {
    spec.validate()?;
    if spec.shared_covariance() {
        let c = spec.cov(Label::Positive);
        let chol = c.clone().cholesky().ok_or_else(|| {
            Error::Singular("shared covariance is not positive definite".into())
        })?;
        let diff = DVector::from_iterator(
            spec.dim(),
            spec.mean_positive.iter().zip(&spec.mean_negative).map(|(a, b)| a - b),
        );
        let w = chol.solve(&diff);
        let mid: Vec<f64> = spec.mean_positive.iter().zip(&spec.mean_negative).map(|(a, b)| (a + b) / 2.0).collect();
        let wn = w.norm();
        if wn == 0.0 {
            return Err(Error::Singular("class means coincide".into()));
        }
        let w: Vec<f64> = w.iter().map(|v| v / wn).collect();
        let log_ratio = ((1.0 - spec.prior_negative) / spec.prior_negative).ln();
        let offset = -dot(&w, &mid) + log_ratio / wn;
        return Ok(LinearRule { direction: w, offset });
    }
    bayes_direction_grid(spec, 0.25)
}

/// Best linear rule over a grid of directions (degrees step), each with
/// its optimal offset. Two-dimensional specs only.
pub fn bayes_direction_grid(spec: &GmmSpec, step_degrees: f64) -> Result<LinearRule> {
    spec.validate()?;
    if spec.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: spec.dim() });
    }
    let steps = (360.0 / step_degrees).round() as usize;
    let mut best = (f64::INFINITY, vec![1.0, 0.0], 0.0);
    for k in 0..steps {
        let phi = (k as f64 * step_degrees).to_radians();
        let w = vec![phi.cos(), phi.sin()];
        let (e, b) = best_offset(spec, &w)?;
        if e < best.0 {
            best = (e, w, b);
        }
    }
    Ok(LinearRule { direction: best.1, offset: best.2 })
}

/// Bayes 0-1 risk. Shared covariances reduce to a one-dimensional Gaussian
/// tail; otherwise a two-dimensional grid integration (step 0.01) is used.
pub fn bayes_risk(spec: &GmmSpec) -> Result<f64> {
    spec.validate()?;
    if spec.shared_covariance() {
        let rule = bayes_direction(spec)?;
        return linear_rule_error(spec, &rule.direction, rule.offset);
    }
    if spec.dim() != 2 {
        return Err(Error::Argument("grid integration needs a two-dimensional spec".into()));
    }
    let densities: Vec<(f64, DMatrix<f64>, f64, &[f64])> = [Label::Negative, Label::Positive]
        .iter()
        .map(|&l| {
            let c = spec.cov(l);
            let det = c.determinant();
            let inv = c.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(2, 2));
            (spec.prior(l), inv, det, spec.mean(l))
        })
        .collect();
    if densities.iter().any(|d| d.2 <= 0.0) {
        return Err(Error::Singular("grid integration needs nonsingular covariances".into()));
    }
    let extent = |i: usize| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for l in [Label::Negative, Label::Positive] {
            let s = spec.cov(l)[(i, i)].sqrt();
            lo = lo.min(spec.mean(l)[i] - 9.0 * s);
            hi = hi.max(spec.mean(l)[i] + 9.0 * s);
        }
        (lo, hi)
    };
    let (x0, x1) = extent(0);
    let (y0, y1) = extent(1);
    let h = 0.01;
    let nx = ((x1 - x0) / h).ceil() as usize;
    let ny = ((y1 - y0) / h).ceil() as usize;
    let total: f64 = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = x0 + (i as f64 + 0.5) * h;
            let mut acc = 0.0;
            for j in 0..ny {
                let y = y0 + (j as f64 + 0.5) * h;
                let mut p = [0.0; 2];
                for (k, (prior, inv, det, mean)) in densities.iter().enumerate() {
                    let dx = [x - mean[0], y - mean[1]];
                    let q = dx[0] * (inv[(0, 0)] * dx[0] + inv[(0, 1)] * dx[1])
                        + dx[1] * (inv[(1, 0)] * dx[0] + inv[(1, 1)] * dx[1]);
                    p[k] = prior * (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
                }
                acc += p[0].min(p[1]);
            }
            acc
        })
        .sum();
    Ok(total * h * h)
}

/// How per-run predictors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Mean,
    /// Coordinate-wise median, as a robustness check.
    Median,
}

/// Settings of a repeated synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alphas: Vec<AlphaParam>,
    pub runs: usize,
    pub seed: u64,
    /// Training-set size when no class counts are requested.
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default)]
    pub train: TrainConfig,
}

fn default_train_size() -> usize {
    100
}
fn default_test_size() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn new(alphas: Vec<AlphaParam>, runs: usize, seed: u64) -> Self {
        ExperimentConfig {
            alphas,
            runs,
            seed,
            train_size: default_train_size(),
            test_size: default_test_size(),
            features: FeatureConfig::raw(),
            averaging: Averaging::Mean,
            train: TrainConfig::default(),
        }
    }
}

/// Per-run, per-α training outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub alpha: AlphaParam,
    pub theta: Vec<f64>,
    pub accuracy_negative: f64,
    pub accuracy_positive: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub flipped: usize,
}

/// Aggregate metrics for one α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSummary {
    pub alpha: AlphaParam,
    pub averaged_theta: Vec<f64>,
    /// Angle between the averaged predictor and the Bayes rule, in radians.
    pub angle_to_bayes: f64,
    pub accuracy: f64,
    pub accuracy_negative: f64,
    pub accuracy_positive: f64,
    /// `|acc_α − acc_1|/acc_1 × 100`; absent without an `α = 1` arm.
    pub relative_gain: Option<f64>,
    /// Sign of `acc_α − acc_1`.
    pub gain_sign: Option<i8>,
    pub converged_runs: usize,
}

impl AlphaSummary {
    pub fn angle_degrees(&self) -> f64 {
        self.angle_to_bayes.to_degrees()
    }
}

/// Result of [`run_synthetic_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub runs: usize,
    /// The Bayes rule in feature coordinates.
    pub bayes_reference: Vec<f64>,
    pub per_alpha: Vec<AlphaSummary>,
    pub records: Vec<RunRecord>,
}

impl ExperimentSummary {
    pub fn get(&self, alpha: AlphaParam) -> Option<&AlphaSummary> {
        self.per_alpha.iter().find(|s| s.alpha == alpha)
    }
}

/// Relative accuracy gain `|acc − acc_ref|/acc_ref × 100` and its sign.
pub fn relative_accuracy_gain(accuracy: f64, reference: f64) -> (f64, i8) {
    let diff = accuracy - reference;
    let sign = if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    };
    (diff.abs() / reference * 100.0, sign)
}

/// Per-run generator: the master seed selects the key and the run index
/// selects an independent stream.
pub fn run_rng(master_seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run as u64);
    rng
}

fn class_accuracy(theta: &[f64], test: &LabeledDataset) -> (f64, f64) {
    let mut hits = [0usize; 2];
    let mut counts = [0usize; 2];
    for i in 0..test.len() {
        let y = test.y(i);
        let k = usize::from(y == Label::Positive);
        counts[k] += 1;
        if y.sign() * dot(theta, test.x(i)) > 0.0 {
            hits[k] += 1;
        }
    }
    let acc = |k: usize| if counts[k] == 0 { f64::NAN } else { hits[k] as f64 / counts[k] as f64 };
    (acc(0), acc(1))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Repeats draw → corrupt → train for every α, then averages predictors
/// and compares them with the Bayes rule on clean, balanced test data.
pub fn run_synthetic_experiment(
    spec: &GmmSpec,
    corruption: &CorruptionSpec,
    config: &ExperimentConfig,
) -> Result<ExperimentSummary> {
    if config.runs == 0 {
        return Err(Error::Argument("runs must be at least 1".into()));
    }
    if config.alphas.is_empty() {
        return Err(Error::Argument("at least one alpha is required".into()));
    }
    corruption.validate()?;
    config.train.validate()?;
    let sampler = GmmSampler::new(spec, config.features)?;
    let bayes = bayes_direction(spec)?;
    let reference = config.features.rule_in_feature_space(&bayes);

    let per_run: Vec<Vec<RunRecord>> = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<Vec<RunRecord>> {
            let mut rng = run_rng(config.seed, run);
            let pool = match corruption.class_counts {
                Some((neg, pos)) => sampler.sample_counts(neg, pos, &mut rng)?,
                None => sampler.sample(config.train_size, &mut rng)?,
            };
            let train = corrupt(&pool, corruption, &mut rng)?;
            let half = config.test_size / 2;
            let test = sampler.sample_counts(half, config.test_size - half, &mut rng)?;
            let flipped = (0..train.len()).filter(|&i| train.is_flipped(i)).count();
            config
                .alphas
                .iter()
                .map(|&alpha| {
                    let tc = TrainConfig { alpha, ..config.train };
                    let res = train_gd(&train, &tc)?;
                    let (an, ap) = class_accuracy(res.theta.as_slice(), &test);
                    Ok(RunRecord {
                        run,
                        alpha,
                        theta: res.theta.into_vec(),
                        accuracy_negative: an,
                        accuracy_positive: ap,
                        iterations: res.iterations,
                        termination: res.termination,
                        flipped,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let records: Vec<RunRecord> = per_run.into_iter().flatten().collect();

    let dim = config.features.output_dim(spec.dim());
    let mut per_alpha = Vec::with_capacity(config.alphas.len());
    for &alpha in &config.alphas {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.alpha == alpha).collect();
        let averaged_theta: Vec<f64> = (0..dim)
            .map(|k| {
                let col: Vec<f64> = rows.iter().map(|r| r.theta[k]).collect();
                match config.averaging {
                    Averaging::Mean => crate::numeric::mean(&col),
                    Averaging::Median => median(col),
                }
            })
            .collect();
        let angle = if norm(&averaged_theta) == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else if config.features.bias {
            angle_between(&averaged_theta, &reference)
        } else {
            angle_between(&averaged_theta, &reference[..dim])
        };
        let neg: Vec<f64> = rows.iter().map(|r| r.accuracy_negative).collect();
        let pos: Vec<f64> = rows.iter().map(|r| r.accuracy_positive).collect();
        let accuracy_negative = crate::numeric::mean(&neg);
        let accuracy_positive = crate::numeric::mean(&pos);
        per_alpha.push(AlphaSummary {
            alpha,
            averaged_theta,
            angle_to_bayes: angle,
            accuracy: (accuracy_negative + accuracy_positive) / 2.0,
            accuracy_negative,
            accuracy_positive,
            relative_gain: None,
            gain_sign: None,
            converged_runs: rows.iter().filter(|r| r.termination == Termination::Converged).count(),
        });
    }
    if let Some(base) = per_alpha.iter().find(|s| s.alpha == AlphaParam::ONE).map(|s| s.accuracy) {
        for s in &mut per_alpha {
            let (gain, sign) = relative_accuracy_gain(s.accuracy, base);
            s.relative_gain = Some(gain);
            s.gain_sign = Some(sign);
        }
    }
    Ok(ExperimentSummary { runs: config.runs, bayes_reference: reference, per_alpha, records })
}

/// Empirical risk evaluated on a square lattice over `[−r, r]²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeGrid {
    /// Lattice coordinates along each axis.
    pub coords: Vec<f64>,
    /// `values[i][j]` is the risk at `(coords[i], coords[j])`.
    pub values: Vec<Vec<f64>>,
    /// Whether the lattice point lies in the closed ball of radius `r`.
    pub in_ball: Vec<Vec<bool>>,
}

/// Lattice coordinates: `k` evenly spaced values over `[−r, r]`; `k = 1` is the origin.
pub fn lattice(radius: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.0];
    }
    (0..k).map(|i| -radius + 2.0 * radius * i as f64 / (k - 1) as f64).collect()
}

fn check_landscape_args(data: &LabeledDataset, radius: f64, k: usize) -> Result<()> {
    if data.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: data.dim() });
    }
    if k == 0 || !(radius > 0.0) {
        return Err(Error::Argument("grid needs k >= 1 and a positive radius".into()));
    }
    Ok(())
}

/// Risk landscape of a two-dimensional dataset.
pub fn landscape_grid(data: &LabeledDataset, alpha: AlphaParam, radius: f64, k: usize) -> Result<LandscapeGrid> {
    check_landscape_args(data, radius, k)?;
    let coords = lattice(radius, k);
    let values: Vec<Vec<f64>> = coords
        .par_iter()
        .map(|&a| {
            coords
                .iter()
                .map(|&b| empirical_alpha_risk(&[a, b][..], data, alpha))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let in_ball = coords
        .iter()
        .map(|&a| coords.iter().map(|&b| (a * a + b * b).sqrt() <= radius + 1e-12).collect())
        .collect();
    Ok(LandscapeGrid { coords, values, in_ball })
}

/// Worst-case gaps between the `α` and `α = ∞` landscapes over the ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub alpha: AlphaParam,
    pub max_risk_gap: f64,
    /// Max over the grid of `L_d(θ)·(1/α)`.
    pub max_risk_bound: f64,
    pub max_gradient_gap: f64,
    pub max_gradient_bound: f64,
    /// Pointwise violations of `|R̂_α − R̂_∞| ≤ L_d(θ)/α` (and the gradient analog).
    pub pointwise_violations: usize,
    pub points: usize,
}

impl SaturationReport {
    pub fn holds(&self) -> bool {
        self.max_risk_gap <= self.max_risk_bound
            && self.max_gradient_gap <= self.max_gradient_bound
            && self.pointwise_violations == 0
    }
}

/// Compares the `alpha` and `α = ∞` landscapes on the in-ball lattice points.
pub fn saturation_report(data: &LabeledDataset, alpha: AlphaParam, radius: f64, k: usize) -> Result<SaturationReport> {
    check_landscape_args(data, radius, k)?;
    let coords = lattice(radius, k);
    let inv = alpha.inverse();
    let rows: Vec<(f64, f64, f64, f64, usize, usize)> = coords
        .par_iter()
        .map(|&a| -> Result<_> {
            let mut acc = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0usize, 0usize);
            for &b in &coords {
                if (a * a + b * b).sqrt() > radius + 1e-12 {
                    continue;
                }
                let theta = [a, b];
                let (ra, ga) = risk_and_gradient(&theta[..], data, alpha)?;
                let (ri, gi) = risk_and_gradient(&theta[..], data, AlphaParam::INFINITY)?;
                let gap = (ra - ri).abs();
                let ggap = norm(&[ga[0] - gi[0], ga[1] - gi[1]]);
                let lb = alpha_lipschitz_risk(&theta) * inv;
                let jb = alpha_lipschitz_gradient(&theta) * inv;
                acc.0 = acc.0.max(gap);
                acc.1 = acc.1.max(lb);
                acc.2 = acc.2.max(ggap);
                acc.3 = acc.3.max(jb);
                acc.4 += usize::from(gap > lb || ggap > jb);
                acc.5 += 1;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut rep = SaturationReport {
        alpha,
        max_risk_gap: 0.0,
        max_risk_bound: 0.0,
        max_gradient_gap: 0.0,
        max_gradient_bound: 0.0,
        pointwise_violations: 0,
        points: 0,
    };
    for r in rows {
        rep.max_risk_gap = rep.max_risk_gap.max(r.0);
        rep.max_risk_bound = rep.max_risk_bound.max(r.1);
        rep.max_gradient_gap = rep.max_gradient_gap.max(r.2);
        rep.max_gradient_bound = rep.max_gradient_bound.max(r.3);
        rep.pointwise_violations += r.4;
        rep.points += r.5;
    }
    Ok(rep)
}

/// Strict local minima of the in-ball lattice under the 8-neighbour test.
pub fn lattice_local_minima(grid: &LandscapeGrid) -> Vec<(usize, usize)> {
    let k = grid.coords.len();
    let mut minima = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if !grid.in_ball[i][j] {
                continue;
            }
            let v = grid.values[i][j];
            let mut strict = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= k as i64 || nj >= k as i64 {
                        continue;
                    }
                    let (ni, nj) = (ni as usize, nj as usize);
                    if grid.in_ball[ni][nj] && grid.values[ni][nj] <= v {
                        strict = false;
                    }
                }
            }
            if strict {
                minima.push((i, j));
            }
        }
    }
    minima
}

/// Whether every strict lattice local minimum is the global lattice minimum.
pub fn is_single_basin(grid: &LandscapeGrid) -> bool {
    let mut global = f64::INFINITY;
    for (i, row) in grid.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if grid.in_ball[i][j] {
                global = global.min(v);
            }
        }
    }
    lattice_local_minima(grid).iter().all(|&(i, j)| grid.values[i][j] == global)
}

/// Mean and standard error of the test 0-1 error for a predictor.
pub fn test_error(theta: &[f64], test: &LabeledDataset) -> (f64, f64) {
    let errs: Vec<f64> = (0..test.len())
        .map(|i| if test.y(i).sign() * dot(theta, test.x(i)) > 0.0 { 0.0 } else { 1.0 })
        .collect();
    mean_and_se(&errs)
}
