//! The alpha-loss in probability and margin form, its derivatives, the
//! logistic link and the Lipschitz/boundedness constants derived from it.

use crate::alpha::{AlphaParam, Branch};
use crate::error::{Error, Result};
use crate::numeric::{log_sigmoid, softplus};

/// Sum-to-one tolerance for a probability vector.
pub const PROB_TOLERANCE: f64 = 1e-12;
/// Larger drifts than this are rejected instead of renormalized.
pub const RENORMALIZE_LIMIT: f64 = 1e-9;

/// A finite probability mass function over label indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    masses: Vec<f64>,
}

impl ProbVector {
    /// Validates the masses, renormalizing small drift in the total.
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Argument("probability vector is empty".into()));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0 || *m > 1.0 + RENORMALIZE_LIMIT) {
            return Err(Error::Argument(format!(
                "masses must lie in [0, 1], got {masses:?}"
            )));
        }
        let total: f64 = masses.iter().sum();
        let drift = (total - 1.0).abs();
        if drift > RENORMALIZE_LIMIT {
            return Err(Error::Argument(format!(
                "masses sum to {total}, not 1"
            )));
        }
        let masses = if drift > PROB_TOLERANCE {
            masses.iter().map(|m| m / total).collect()
        } else {
            masses
        };
        Ok(ProbVector { masses })
    }

    /// Normalizes arbitrary nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Argument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Argument("weights sum to zero".into()));
        }
        ProbVector::new(weights.iter().map(|w| w / total).collect())
    }

    /// The two-point distribution `(1 − p, p)` over labels `(−1, +1)`.
    pub fn binary(p_positive: f64) -> Result<Self> {
        ProbVector::new(vec![1.0 - p_positive, p_positive])
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.masses.get(index).copied()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.masses
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| -m * m.ln())
            .sum()
    }
}

/// A (possibly infinite) margin `z = y·f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Margin(pub f64);

impl Margin {
    pub fn new(z: f64) -> Result<Self> {
        if z.is_nan() {
            return Err(Error::Argument("margin is NaN".into()));
        }
        Ok(Margin(z))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for Margin {
    fn from(z: f64) -> Self {
        Margin(z)
    }
}

/// Loss of the soft prediction `p` when the true label is `label_index`.
pub fn alpha_loss(alpha: AlphaParam, label_index: usize, p: &ProbVector) -> Result<f64> {
    let py = p.get(label_index).ok_or_else(|| {
        Error::Argument(format!(
            "label index {label_index} out of range for {} labels",
            p.len()
        ))
    })?;
    prob_loss(alpha, py)
}

/// Loss as a function of the probability assigned to the true label.
pub fn prob_loss(alpha: AlphaParam, py: f64) -> Result<f64> {
    if py <= 0.0 && alpha.value() <= 1.0 + crate::alpha::LOG_GUARD_BAND {
        return Err(Error::Domain("infinite loss: zero mass on the true label".into()));
    }
    Ok(match alpha.branch() {
        Branch::Log => -py.ln(),
        Branch::Infinite => 1.0 - py,
        Branch::General(a) => {
            // a/(a−1)·(1 − p^{1−1/a}) = −a/(a−1)·expm1((1−1/a)·ln p)
            if py <= 0.0 {
                a / (a - 1.0)
            } else {
                -(a / (a - 1.0)) * ((1.0 - 1.0 / a) * py.ln()).exp_m1()
            }
        }
    })
}

/// Margin-based loss `l̃^α(z)`, evaluated in log-domain for stability.
pub fn margin_alpha_loss(alpha: AlphaParam, z: Margin) -> f64 {
    let z = z.0;
    if z == f64::INFINITY {
        return 0.0;
    }
    if z == f64::NEG_INFINITY {
        return match alpha.branch() {
            Branch::Infinite => 1.0,
            Branch::General(a) if a > 1.0 => a / (a - 1.0),
            _ => f64::INFINITY,
        };
    }
    match alpha.branch() {
        Branch::Log => softplus(-z),
        Branch::Infinite => sigmoid(-z),
        Branch::General(a) => {
            // (1 + e^{−z})^{1/a−1} = exp((1/a − 1)·softplus(−z))
            let s = (1.0 / a - 1.0) * softplus(-z);
            -(a / (a - 1.0)) * s.exp_m1()
        }
    }
}

/// First derivative `−σ(z)^{1−1/α}·σ(−z)`.
pub fn margin_loss_derivative(alpha: AlphaParam, z: Margin) -> f64 {
    let z = z.0;
    if z == f64::INFINITY {
        return 0.0;
    }
    if z == f64::NEG_INFINITY {
        return match alpha.branch() {
            Branch::Log => -1.0,
            _ if alpha.value() < 1.0 => f64::NEG_INFINITY,
            _ => 0.0,
        };
    }
    let e = alpha.exponent();
    -(e * log_sigmoid(z) + log_sigmoid(-z)).exp()
}

/// Second derivative `σ(z)^{1−1/α}σ(−z)·(σ(z) − (1−1/α)σ(−z))`.
pub fn margin_loss_second_derivative(alpha: AlphaParam, z: Margin) -> f64 {
    let z = z.0;
    if z.is_infinite() {
        return 0.0;
    }
    let e = alpha.exponent();
    let scale = (e * log_sigmoid(z) + log_sigmoid(-z)).exp();
    scale * (sigmoid(z) - e * sigmoid(-z))
}

/// Logistic sigmoid `1/(1 + e^{−z})`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logit `log(p/(1−p))`, with `±∞` at the endpoints.
pub fn inverse_sigmoid(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Argument(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(p.ln() - (-p).ln_1p())
}

/// Label in `{−1, +1}` mapped to its index in a two-point [`ProbVector`].
fn binary_index(y: i8) -> Result<usize> {
    match y {
        -1 => Ok(0),
        1 => Ok(1),
        _ => Err(Error::Argument(format!("label must be ±1, got {y}"))),
    }
}

/// `|l^α(y, P̂_f) − l̃^α(y·f)|` where `P̂_f(+1) = σ(f)`.
pub fn correspondence_gap(alpha: AlphaParam, y: i8, f_value: f64) -> Result<f64> {
    let idx = binary_index(y)?;
    // Build the two-point prediction from σ(±f) directly so both masses
    // keep full relative precision.
    let p = ProbVector {
        masses: vec![sigmoid(-f_value), sigmoid(f_value)],
    };
    let prob_form = alpha_loss(alpha, idx, &p)?;
    let margin_form = margin_alpha_loss(alpha, Margin(y as f64 * f_value));
    let gap = (prob_form - margin_form).abs();
    if prob_form.is_infinite() && margin_form.is_infinite() {
        return Ok(0.0);
    }
    Ok(gap)
}

/// Lipschitz constant `C_{r0}(α)` of `l̃^α` on `[−r0, r0]`.
///
/// For `α ≤ 1` the slope is largest at `−r0`. For `α > 1` the slope peaks
/// at `z* = log(1 − 1/α)`; when `z*` falls outside the interval the
/// steepest point is again the endpoint `−r0`, and that endpoint value is
/// returned so the constant is the exact supremum on the interval.
pub fn margin_lipschitz_constant(alpha: AlphaParam, r0: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::Argument(format!("r0 must be positive, got {r0}")));
    }
    let endpoint = -margin_loss_derivative(alpha, Margin(-r0));
    match alpha.branch() {
        Branch::Log => Ok(endpoint),
        Branch::General(a) if a < 1.0 => Ok(endpoint),
        Branch::General(_) | Branch::Infinite => Ok(interior_or_endpoint(alpha, r0, endpoint)),
    }
}

fn interior_or_endpoint(alpha: AlphaParam, r0: f64, endpoint: f64) -> f64 {
    let z_star = peak_slope_margin(alpha);
    if z_star >= -r0 {
        peak_slope(alpha)
    } else {
        endpoint
    }
}

/// Location `log(1 − 1/α)` of the steepest descent of `l̃^α` for `α > 1`.
pub fn peak_slope_margin(alpha: AlphaParam) -> f64 {
    (1.0 - alpha.inverse()).ln()
}

/// Closed-form peak slope `((α−1)/(2α−1))^{1−1/α}·α/(2α−1)`, valid for `α ≥ 1`.
pub fn peak_slope(alpha: AlphaParam) -> f64 {
    match alpha.branch() {
        Branch::Infinite => 0.25,
        Branch::Log => 1.0,
        Branch::General(a) => {
            let base = (a - 1.0) / (2.0 * a - 1.0);
            base.powf(1.0 - 1.0 / a) * a / (2.0 * a - 1.0)
        }
    }
}

/// Supremum `D_{r√d}(α)` of `l̃^α` over `[−r√d, r√d]`.
pub fn loss_sup_bound(alpha: AlphaParam, r_sqrt_d: f64) -> Result<f64> {
    if !(r_sqrt_d >= 0.0) {
        return Err(Error::Argument(format!(
            "r·sqrt(d) must be nonnegative, got {r_sqrt_d}"
        )));
    }
    Ok(margin_alpha_loss(alpha, Margin(-r_sqrt_d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(v: f64) -> AlphaParam {
        AlphaParam::new(v).unwrap()
    }

    #[test]
    fn probability_form_examples() {
        let half = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert!((alpha_loss(a(1.0), 0, &half).unwrap() - 2f64.ln()).abs() < 1e-15);
        let q = ProbVector::new(vec![0.25, 0.75]).unwrap();
        assert!((alpha_loss(a(0.5), 0, &q).unwrap() - 3.0).abs() < 1e-12);
        assert!((alpha_loss(a(2.0), 0, &q).unwrap() - 1.0).abs() < 1e-12);
        let p = ProbVector::new(vec![0.2, 0.8]).unwrap();
        assert!((alpha_loss(AlphaParam::INFINITY, 1, &p).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn probability_form_errors() {
        let p = ProbVector::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(alpha_loss(a(1.0), 0, &p), Err(Error::Domain(_))));
        assert!(matches!(alpha_loss(a(0.5), 0, &p), Err(Error::Domain(_))));
        assert!((alpha_loss(a(2.0), 0, &p).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(alpha_loss(a(2.0), 5, &p), Err(Error::Argument(_))));
    }

    #[test]
    fn prob_vector_renormalizes_small_drift_only() {
        let v = ProbVector::new(vec![0.5, 0.5 + 1e-10]).unwrap();
        assert!((v.masses().iter().sum::<f64>() - 1.0).abs() <= PROB_TOLERANCE);
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn margin_form_examples() {
        assert!((margin_alpha_loss(a(0.5), Margin(-5.0)) - 5f64.exp()).abs() / 5f64.exp() < 1e-12);
        assert!((margin_alpha_loss(a(1.0), Margin(0.0)) - 2f64.ln()).abs() < 1e-15);
        assert!((margin_alpha_loss(AlphaParam::INFINITY, Margin(0.0)) - 0.5).abs() < 1e-15);
        let v = margin_alpha_loss(a(1.44), Margin(-1.0));
        assert!((v - 1.08).abs() / 1.08 < 1e-2, "{v}");
    }

    #[test]
    fn extended_margins_hit_limits() {
        for &al in &[0.3, 1.0, 2.0, 7.0] {
            assert_eq!(margin_alpha_loss(a(al), Margin(f64::INFINITY)), 0.0);
        }
        assert_eq!(margin_alpha_loss(a(2.0), Margin(f64::NEG_INFINITY)), 2.0);
        assert_eq!(margin_alpha_loss(a(0.5), Margin(f64::NEG_INFINITY)), f64::INFINITY);
        assert_eq!(margin_alpha_loss(a(1.0), Margin(f64::NEG_INFINITY)), f64::INFINITY);
        assert_eq!(margin_alpha_loss(AlphaParam::INFINITY, Margin(f64::NEG_INFINITY)), 1.0);
        // Large finite margins stay finite and accurate.
        let big = margin_alpha_loss(a(0.5), Margin(-600.0));
        assert!(big.is_finite() || big == f64::INFINITY);
        assert!((margin_alpha_loss(a(3.0), Margin(-800.0)) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn second_derivative_root_at_alpha_two() {
        let z = (0.5f64).ln();
        assert!(margin_loss_second_derivative(a(2.0), Margin(z)).abs() < 1e-15);
        assert!(margin_loss_second_derivative(a(2.0), Margin(z - 0.5)) < 0.0);
        assert!(margin_loss_second_derivative(a(2.0), Margin(z + 0.5)) > 0.0);
    }

    #[test]
    fn derivative_matches_expanded_closed_form() {
        // −(e^{−z}+1)^{1/α} e^z / (1+e^z)^2, evaluated directly for moderate z.
        for &al in &[0.4, 1.0, 2.5, 9.0] {
            for i in -20..=20 {
                let z = i as f64 * 0.5;
                let expanded = -((-z).exp() + 1.0).powf(1.0 / al) * z.exp() / (1.0 + z.exp()).powi(2);
                let ours = margin_loss_derivative(a(al), Margin(z));
                assert!((expanded - ours).abs() <= 1e-13 * expanded.abs().max(1e-12), "{al} {z}");
            }
        }
    }

    #[test]
    fn second_derivative_matches_expanded_closed_form() {
        // (e^{−z}+1)^{1/α} e^z (αe^z − α + 1) / (α (e^z+1)^3)
        for &al in &[0.4, 1.0, 2.5, 9.0] {
            for i in -16..=16 {
                let z = i as f64 * 0.5;
                let ez = z.exp();
                let expanded = ((-z).exp() + 1.0).powf(1.0 / al) * ez * (al * ez - al + 1.0)
                    / (al * (ez + 1.0).powi(3));
                let ours = margin_loss_second_derivative(a(al), Margin(z));
                assert!((expanded - ours).abs() <= 1e-12 * expanded.abs().max(1e-10), "{al} {z}");
            }
        }
    }

    #[test]
    fn sigmoid_pair() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(inverse_sigmoid(0.5).unwrap(), 0.0);
        assert!((inverse_sigmoid(sigmoid(3.7)).unwrap() - 3.7).abs() < 1e-12);
        assert_eq!(inverse_sigmoid(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(inverse_sigmoid(1.0).unwrap(), f64::INFINITY);
        assert!(inverse_sigmoid(1.5).is_err());
    }

    #[test]
    fn correspondence_examples() {
        assert!(correspondence_gap(a(1.0), 1, 0.0).unwrap() < 1e-15);
        assert!(correspondence_gap(a(3.0), -1, 2.5).unwrap() <= 1e-10);
        assert!(correspondence_gap(AlphaParam::INFINITY, 1, -4.0).unwrap() <= 1e-10);
        assert!(correspondence_gap(a(1.0), 0, 1.0).is_err());
    }

    #[test]
    fn lipschitz_constant_examples() {
        let inf = margin_lipschitz_constant(AlphaParam::INFINITY, 5.0).unwrap();
        assert!((inf - 0.25).abs() < 1e-15);
        let one = margin_lipschitz_constant(a(1.0), 2.0).unwrap();
        assert!((one - sigmoid(2.0)).abs() < 1e-15);
        // The two branches meet at alpha = 1.
        let below = margin_lipschitz_constant(a(1.0 - 1e-7), 2.0).unwrap();
        let above = margin_lipschitz_constant(a(1.0 + 1e-7), 2.0).unwrap();
        assert!((below - one).abs() < 1e-6 && (above - one).abs() < 1e-6);
        // The interior peak formula takes over once log(1 − 1/α) ≥ −r0.
        let al = a(4.0);
        assert!((margin_lipschitz_constant(al, 2.0).unwrap() - peak_slope(al)).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_constant_bounds_sampled_slopes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &al in &[0.3, 0.7, 1.0, 1.5, 3.0, 20.0, f64::INFINITY] {
            for &r0 in &[0.5, 2.0, 4.0] {
                let alpha = a(al);
                let c = margin_lipschitz_constant(alpha, r0).unwrap();
                let mut worst = 0.0f64;
                for _ in 0..100_000 {
                    let u: f64 = rng.random_range(-r0..r0);
                    let v: f64 = rng.random_range(-r0..r0);
                    if (u - v).abs() < 1e-9 {
                        continue;
                    }
                    let s = (margin_alpha_loss(alpha, Margin(u)) - margin_alpha_loss(alpha, Margin(v)))
                        .abs()
                        / (u - v).abs();
                    worst = worst.max(s);
                }
                assert!(worst <= c * (1.0 + 1e-9), "alpha {al} r0 {r0}: {worst} > {c}");
            }
        }
    }

    #[test]
    fn lipschitz_constant_non_increasing_in_alpha() {
        for &r0 in &[0.5, 2.0, 6.0] {
            let grid: Vec<f64> = (1..400).map(|i| 0.05 * i as f64).collect();
            let vals: Vec<f64> = grid
                .iter()
                .map(|&v| margin_lipschitz_constant(a(v), r0).unwrap())
                .collect();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{r0}: {w:?}");
            }
            let last = *vals.last().unwrap();
            assert!(margin_lipschitz_constant(AlphaParam::INFINITY, r0).unwrap() <= last + 1e-12);
        }
    }

    #[test]
    fn sup_bound_examples_and_grid() {
        let d = loss_sup_bound(AlphaParam::INFINITY, 1.0).unwrap();
        assert!((d - sigmoid(1.0)).abs() < 1e-15);
        assert!((loss_sup_bound(a(1.0), 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        for &al in &[0.5, 1.0, 2.0, 8.0] {
            let bound = loss_sup_bound(a(al), 3.0).unwrap();
            let worst = (0..=10_000)
                .map(|i| margin_alpha_loss(a(al), Margin(-3.0 + 6.0 * i as f64 / 10_000.0)))
                .fold(0.0f64, f64::max);
            assert!(worst <= bound + 1e-12);
        }
    }

    #[test]
    fn continuity_near_one_and_infinity() {
        for i in 0..=200 {
            let z = -10.0 + 0.1 * i as f64;
            let log = margin_alpha_loss(a(1.0), Margin(z));
            for &al in &[1.0 - 1e-6, 1.0 + 1e-6] {
                assert!((margin_alpha_loss(a(al), Margin(z)) - log).abs() <= 1e-4);
            }
            let far = margin_alpha_loss(a(1e4), Margin(z));
            assert!((far - 1.0 / (1.0 + z.exp())).abs() <= 1e-3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn loss_non_increasing_in_alpha(p in 1e-6f64..0.999_999, a1 in 0.05f64..50.0, a2 in 0.05f64..50.0) {
            let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
            let lo_loss = prob_loss(a(lo), p).unwrap();
            let hi_loss = prob_loss(a(hi), p).unwrap();
            prop_assert!(hi_loss <= lo_loss + 1e-12 * lo_loss.max(1.0));
            prop_assert!(prob_loss(AlphaParam::INFINITY, p).unwrap() <= hi_loss + 1e-12);
        }

        #[test]
        fn correspondence_holds(al in 0.05f64..60.0, pos in any::<bool>(), f in -30.0f64..30.0) {
            let y = if pos { 1 } else { -1 };
            // Small α makes the loss astronomically large, so the tolerance is relative.
            let scale = margin_alpha_loss(a(al), Margin(y as f64 * f)).abs().max(1.0);
            prop_assert!(correspondence_gap(a(al), y, f).unwrap() <= 1e-10 * scale);
            prop_assert!(correspondence_gap(AlphaParam::INFINITY, y, f).unwrap() <= 1e-10);
            prop_assert!(correspondence_gap(a(1.0), y, f).unwrap() <= 1e-10);
        }

        #[test]
        fn convex_for_small_alpha(al in 0.05f64..=1.0, z in -40.0f64..40.0) {
            prop_assert!(margin_loss_second_derivative(a(al), Margin(z)) >= -1e-12);
        }

        #[test]
        fn strictly_decreasing_for_large_alpha(al in 1.0f64..200.0, z in -30.0f64..30.0) {
            prop_assert!(margin_loss_derivative(a(al), Margin(z)) < 0.0);
        }

        #[test]
        fn sigmoid_reflection(z in -50.0f64..50.0) {
            prop_assert!((sigmoid(-z) - (1.0 - sigmoid(z))).abs() < 1e-15);
        }
    }
}
