//! The logistic model `g_θ(x) = σ(⟨θ, x⟩)` trained with alpha-loss:
//! empirical and population risks, analytic derivatives and the closed-form
//! curvature and Lipschitz constants of the risk landscape.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::alpha::{AlphaParam, Branch};
use crate::error::{Error, Result};
use crate::loss::{
    margin_alpha_loss, margin_lipschitz_constant, margin_loss_derivative,
    margin_loss_second_derivative, sigmoid, Margin,
};
use crate::numeric::{dot, log_sigmoid, mean_and_se, norm, pairwise_sum, softplus};

/// Slack allowed on the ball constraint.
pub const BALL_TOLERANCE: f64 = 1e-9;

/// A binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_i8(y: i8) -> Result<Self> {
        match y {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            _ => Err(Error::Argument(format!("label must be ±1, got {y}"))),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

/// Model parameter `θ` constrained to the ball `B_d(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    theta: Vec<f64>,
    radius: f64,
}

impl ParamVector {
    /// Rejects parameters outside the ball rather than projecting them.
    pub fn new(theta: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Argument(format!("radius must be positive, got {radius}")));
        }
        if theta.is_empty() {
            return Err(Error::Argument("parameter vector is empty".into()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("parameter vector has non-finite entries".into()));
        }
        let n = norm(&theta);
        if n > radius + BALL_TOLERANCE {
            return Err(Error::Argument(format!(
                "parameter norm {n} exceeds radius {radius}"
            )));
        }
        Ok(ParamVector { theta, radius })
    }

    /// A parameter with no norm constraint.
    pub fn unconstrained(theta: Vec<f64>) -> Result<Self> {
        ParamVector::new(theta, f64::INFINITY)
    }

    pub fn zeros(d: usize, radius: f64) -> Result<Self> {
        ParamVector::new(vec![0.0; d], radius)
    }

    /// Projects an arbitrary vector onto the ball; used by optimizers.
    pub fn projected(mut theta: Vec<f64>, radius: f64) -> Result<Self> {
        if radius.is_finite() {
            let origin = vec![0.0; theta.len()];
            crate::numeric::project_to_ball(&mut theta, &origin, radius);
        }
        ParamVector::new(theta, radius)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.theta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.theta)
    }
}

impl AsRef<[f64]> for ParamVector {
    fn as_ref(&self) -> &[f64] {
        &self.theta
    }
}

/// One labeled example with its corruption provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Label,
    /// Whether the observed label differs from the generating class.
    pub flipped: bool,
    /// Class that generated `x`.
    pub origin: Label,
}

impl Sample {
    pub fn clean(x: Vec<f64>, y: Label) -> Self {
        Sample { x, y, flipped: false, origin: y }
    }
}

/// A dataset stored feature-major for fast risk evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    d: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
    flipped: Vec<bool>,
    origin: Vec<Label>,
    unit_cube: bool,
}

impl LabeledDataset {
    /// Builds a dataset whose features must lie in `[0, 1]^d`.
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let data = LabeledDataset::new_unbounded(samples)?;
        if !data.unit_cube {
            return Err(Error::Argument("features must lie in [0, 1]^d".into()));
        }
        Ok(data)
    }

    /// Builds a dataset with arbitrary finite features.
    pub fn new_unbounded(samples: Vec<Sample>) -> Result<Self> {
        let d = samples.first().map(|s| s.x.len()).ok_or(Error::EmptyDataset)?;
        if d == 0 {
            return Err(Error::Argument("features have zero dimension".into()));
        }
        let mut data = LabeledDataset {
            d,
            features: Vec::with_capacity(samples.len() * d),
            labels: Vec::with_capacity(samples.len()),
            flipped: Vec::with_capacity(samples.len()),
            origin: Vec::with_capacity(samples.len()),
            unit_cube: true,
        };
        for s in samples {
            if s.x.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.x.len() });
            }
            if s.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument("features must be finite".into()));
            }
            data.unit_cube &= s.x.iter().all(|v| (0.0..=1.0).contains(v));
            data.features.extend_from_slice(&s.x);
            data.labels.push(s.y);
            data.flipped.push(s.flipped);
            data.origin.push(s.origin);
        }
        Ok(data)
    }

    /// Convenience constructor from feature rows and ±1 labels.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[i8]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: labels.len() });
        }
        let samples = rows
            .iter()
            .zip(labels)
            .map(|(x, &y)| Ok(Sample::clean(x.clone(), Label::from_i8(y)?)))
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new_unbounded(samples)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Whether every feature lies in `[0, 1]^d`.
    pub fn in_unit_cube(&self) -> bool {
        self.unit_cube
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn is_flipped(&self, i: usize) -> bool {
        self.flipped[i]
    }

    pub fn origin(&self, i: usize) -> Label {
        self.origin[i]
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            x: self.x(i).to_vec(),
            y: self.labels[i],
            flipped: self.flipped[i],
            origin: self.origin[i],
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(|i| self.sample(i))
    }

    /// Number of samples carrying each observed label, `(negative, positive)`.
    pub fn label_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y == Label::Positive).count();
        (self.len() - pos, pos)
    }

    /// Margins `y_i⟨θ, x_i⟩`.
    pub fn margins(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.labels[i].sign() * dot(theta, self.x(i)))
            .collect()
    }

    /// Appends a constant-one feature (bias) to every sample.
    pub fn with_bias(&self) -> LabeledDataset {
        let mut samples: Vec<Sample> = self.samples().collect();
        for s in &mut samples {
            s.x.push(1.0);
        }
        LabeledDataset::new_unbounded(samples).expect("appending a bias keeps samples valid")
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if theta.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: theta.len() });
        }
        Ok(())
    }
}

/// Soft prediction `σ(⟨θ, x⟩)` for the positive class.
pub fn soft_classifier<T: AsRef<[f64]> + ?Sized>(theta: &T, x: &[f64]) -> Result<f64> {
    let t = theta.as_ref();
    if t.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: x.len() });
    }
    Ok(sigmoid(dot(t, x)))
}

/// Empirical alpha-risk `1/n Σ l̃^α(y_i⟨θ, x_i⟩)`.
pub fn empirical_alpha_risk<T: AsRef<[f64]> + ?Sized>(
    theta: &T,
    data: &LabeledDataset,
    alpha: AlphaParam,
) -> Result<f64> {
    let t = theta.as_ref();
    data.check(t)?;
    let losses: Vec<f64> = data
        .margins(t)
        .into_iter()
        .map(|z| margin_alpha_loss(alpha, Margin(z)))
        .collect();
    Ok(pairwise_sum(&losses) / data.len() as f64)
}

/// Gradient factor `F₁ = −y·g^{1−1/α}(1 − g)` with `g = σ(y⟨θ, x⟩)`.
pub fn gradient_factor(alpha: AlphaParam, y: Label, z: f64) -> f64 {
    y.sign() * margin_loss_derivative(alpha, Margin(z))
}

/// Hessian factor `F₂ = g^{1−1/α}·σ(−z)·(g − (1−1/α)σ(−z))`.
pub fn hessian_factor(alpha: AlphaParam, z: f64) -> f64 {
    margin_loss_second_derivative(alpha, Margin(z))
}

/// The same factor in the form `g^{1−1/α}·σ(−z)·g·(1 − (1−1/α)e^{−z})`.
pub fn hessian_factor_factored(alpha: AlphaParam, z: f64) -> f64 {
    let e = alpha.exponent();
    let g = sigmoid(z);
    let scale = (e * log_sigmoid(z) + log_sigmoid(-z)).exp();
    scale * g * (1.0 - e * (-z).exp())
}

/// Gradient of the empirical alpha-risk.
pub fn risk_gradient<T: AsRef<[f64]> + ?Sized>(
    theta: &T,
    data: &LabeledDataset,
    alpha: AlphaParam,
) -> Result<Vec<f64>> {
    Ok(risk_and_gradient(theta, data, alpha)?.1)
}

/// Risk and gradient in a single pass over the data.
pub fn risk_and_gradient<T: AsRef<[f64]> + ?Sized>(
    theta: &T,
    data: &LabeledDataset,
    alpha: AlphaParam,
) -> Result<(f64, Vec<f64>)> {
    let t = theta.as_ref();
    data.check(t)?;
    let d = data.dim();
    let n = data.len();
    let mut losses = Vec::with_capacity(n);
    let mut grad = vec![0.0; d];
    for i in 0..n {
        let x = data.x(i);
        let y = data.y(i);
        let z = y.sign() * dot(t, x);
        losses.push(margin_alpha_loss(alpha, Margin(z)));
        let f1 = gradient_factor(alpha, y, z);
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += f1 * xi;
        }
    }
    let inv = 1.0 / n as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    Ok((pairwise_sum(&losses) * inv, grad))
}

/// How `σ(z)^e` is evaluated inside the training loop.
#[derive(Clone, Copy)]
enum PowerKernel {
    /// `e = 0` (log-loss).
    Zero,
    /// `e = k/4`: a fourth root from two square roots, then an integer power.
    Quarter(i32),
    General(f64),
}

impl PowerKernel {
    fn new(e: f64) -> Self {
        let k = (4.0 * e).round();
        if e == 0.0 {
            PowerKernel::Zero
        } else if k == 4.0 * e && (-8.0..=4.0).contains(&k) {
            PowerKernel::Quarter(k as i32)
        } else {
            PowerKernel::General(e)
        }
    }

    /// `σ(z)^e·σ(−z)` from a single shared exponential `e^{−|z|}`.
    #[inline]
    fn slope_magnitude(self, z: f64) -> f64 {
        let t = (-z.abs()).exp();
        let inv = 1.0 / (1.0 + t);
        let (s_pos, s_neg) = if z >= 0.0 { (inv, t * inv) } else { (t * inv, inv) };
        match self {
            PowerKernel::Zero => s_neg,
            PowerKernel::Quarter(k) if z > -700.0 => s_pos.sqrt().sqrt().powi(k) * s_neg,
            PowerKernel::Quarter(k) => (0.25 * k as f64 * (z - t.ln_1p())).exp() * s_neg,
            PowerKernel::General(e) => {
                let log_s_pos = if z >= 0.0 { -t.ln_1p() } else { z - t.ln_1p() };
                (e * log_s_pos).exp() * s_neg
            }
        }
    }
}

/// Gradient of the empirical alpha-risk written into `out`, skipping the
/// risk value; the inner loop of gradient-descent training.
pub fn risk_gradient_into(
    theta: &[f64],
    data: &LabeledDataset,
    alpha: AlphaParam,
    out: &mut [f64],
) -> Result<()> {
    data.check(theta)?;
    if out.len() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: out.len() });
    }
    out.iter_mut().for_each(|g| *g = 0.0);
    let kernel = PowerKernel::new(alpha.exponent());
    for i in 0..data.len() {
        let x = data.x(i);
        let y = data.y(i).sign();
        let f1 = -y * kernel.slope_magnitude(y * dot(theta, x));
        for (g, xi) in out.iter_mut().zip(x) {
            *g += f1 * xi;
        }
    }
    let inv = 1.0 / data.len() as f64;
    out.iter_mut().for_each(|g| *g *= inv);
    Ok(())
}

/// Hessian `1/n Σ F₂·x xᵀ` of the empirical alpha-risk.
pub fn risk_hessian<T: AsRef<[f64]> + ?Sized>(
    theta: &T,
    data: &LabeledDataset,
    alpha: AlphaParam,
) -> Result<DMatrix<f64>> {
    let t = theta.as_ref();
    data.check(t)?;
    let weights: Vec<f64> = data
        .margins(t)
        .into_iter()
        .map(|z| hessian_factor(alpha, z))
        .collect();
    Ok(weighted_second_moment(data, &weights))
}

fn weighted_second_moment(data: &LabeledDataset, weights: &[f64]) -> DMatrix<f64> {
    let d = data.dim();
    let mut h = DMatrix::zeros(d, d);
    for (i, &w) in weights.iter().enumerate() {
        let x = data.x(i);
        for r in 0..d {
            for c in 0..=r {
                h[(r, c)] += w * x[r] * x[c];
            }
        }
    }
    let inv = 1.0 / data.len() as f64;
    for r in 0..d {
        for c in 0..=r {
            h[(r, c)] *= inv;
            h[(c, r)] = h[(r, c)];
        }
    }
    h
}

/// Empirical second moment `Σ̂ = 1/n Σ x xᵀ`.
pub fn second_moment(data: &LabeledDataset) -> Result<DMatrix<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(weighted_second_moment(data, &vec![1.0; data.len()]))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Risk, gradient and optional Hessian curvature at one parameter.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RiskReport {
    pub risk: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    pub hessian_min_eig: Option<f64>,
}

pub fn risk_report<T: AsRef<[f64]> + ?Sized>(
    theta: &T,
    data: &LabeledDataset,
    alpha: AlphaParam,
    with_hessian: bool,
) -> Result<RiskReport> {
    let (risk, gradient) = risk_and_gradient(theta, data, alpha)?;
    let hessian_min_eig = if with_hessian {
        Some(min_eigenvalue(&risk_hessian(theta, data, alpha)?))
    } else {
        None
    };
    Ok(RiskReport {
        risk,
        gradient_norm: norm(&gradient),
        gradient,
        hessian_min_eig,
    })
}

/// A source of labeled draws from a data distribution.
pub trait Sampler {
    fn dim(&self) -> usize;
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Label);
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of the population alpha-risk `E[l̃^α(Y⟨θ, X⟩)]`.
pub fn population_alpha_risk<T, S, R>(
    theta: &T,
    alpha: AlphaParam,
    sampler: &S,
    samples: usize,
    rng: &mut R,
) -> Result<RiskEstimate>
where
    T: AsRef<[f64]> + ?Sized,
    S: Sampler,
    R: Rng + ?Sized,
{
    let t = theta.as_ref();
    if samples == 0 {
        return Err(Error::EmptyDataset);
    }
    if t.len() != sampler.dim() {
        return Err(Error::DimensionMismatch { expected: sampler.dim(), got: t.len() });
    }
    let losses: Vec<f64> = (0..samples)
        .map(|_| {
            let (x, y) = sampler.draw(rng);
            margin_alpha_loss(alpha, Margin(y.sign() * dot(t, &x)))
        })
        .collect();
    let (mean, std_error) = mean_and_se(&losses);
    Ok(RiskEstimate { mean, std_error, samples })
}

/// Curvature floor `Λ(α, r√d)` for `α ≤ 1`.
pub fn strong_convexity_modulus(alpha: AlphaParam, r_sqrt_d: f64) -> Result<f64> {
    if matches!(alpha.branch(), Branch::Infinite) || (alpha.value() > 1.0 && alpha.branch() != Branch::Log) {
        return Err(Error::Argument(format!(
            "strong convexity modulus requires alpha <= 1, got {alpha}; use the small-radius modulus"
        )));
    }
    if !(r_sqrt_d >= 0.0) {
        return Err(Error::Argument(format!("r·sqrt(d) must be nonnegative, got {r_sqrt_d}")));
    }
    let e = alpha.exponent();
    let s = sigmoid(r_sqrt_d);
    let sn = sigmoid(-r_sqrt_d);
    Ok(s.powf(e) * (s * sn - e * sn * sn))
}

/// Largest radius `r√d` for which the small-radius curvature bound applies.
pub fn small_radius_limit() -> f64 {
    0.5f64.asinh()
}

/// Largest admissible α, `(e^{2r√d} − e^{r√d})^{−1}`, at a given radius.
pub fn small_radius_alpha_limit(r_sqrt_d: f64) -> f64 {
    1.0 / ((2.0 * r_sqrt_d).exp() - r_sqrt_d.exp())
}

/// Curvature floor `Λ̃(α, r√d)` valid for small radii and moderate α > 1.
pub fn small_radius_modulus(alpha: AlphaParam, r_sqrt_d: f64) -> Result<f64> {
    if !(r_sqrt_d > 0.0) {
        return Err(Error::Argument(format!("r·sqrt(d) must be positive, got {r_sqrt_d}")));
    }
    let limit = small_radius_limit();
    if r_sqrt_d >= limit {
        return Err(Error::OutsideRegime(format!(
            "r·sqrt(d) = {r_sqrt_d} is not below asinh(1/2) = {limit}"
        )));
    }
    let alpha_max = small_radius_alpha_limit(r_sqrt_d);
    if alpha.value() > alpha_max {
        return Err(Error::OutsideRegime(format!(
            "alpha = {alpha} exceeds the admissible bound {alpha_max} at r·sqrt(d) = {r_sqrt_d}"
        )));
    }
    let inv = alpha.inverse();
    Ok(sigmoid(-r_sqrt_d).powf(3.0 - inv) * (1.0 - r_sqrt_d.exp() + inv * (-r_sqrt_d).exp()))
}

/// Lipschitz constant `C_d(r, α) = √d·C_{r√d}(α)` of the risk in `θ`.
pub fn theta_lipschitz_constant(alpha: AlphaParam, r: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Argument("dimension must be positive".into()));
    }
    let sd = (d as f64).sqrt();
    Ok(sd * margin_lipschitz_constant(alpha, r * sd)?)
}

/// `L_d(θ) = softplus(‖θ‖√d)²/2`, the Lipschitz constant of the risk in `1/α`.
pub fn alpha_lipschitz_risk(theta: &[f64]) -> f64 {
    let s = softplus(norm(theta) * (theta.len() as f64).sqrt());
    0.5 * s * s
}

/// `J_d(θ) = √d·softplus(‖θ‖√d)·σ(‖θ‖√d)`, the same for the gradient.
pub fn alpha_lipschitz_gradient(theta: &[f64]) -> f64 {
    let sd = (theta.len() as f64).sqrt();
    let u = norm(theta) * sd;
    sd * softplus(u) * sigmoid(u)
}
