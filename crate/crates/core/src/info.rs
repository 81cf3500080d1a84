//! Arimoto conditional entropy, the minimal alpha-risk identity, tilted
//! posteriors and the binary conditional-risk functions.

use crate::alpha::{AlphaParam, Branch};
use crate::error::{Error, Result};
use crate::loss::{inverse_sigmoid, margin_alpha_loss, Margin, ProbVector, PROB_TOLERANCE};

/// A joint pmf `P(x, y)` stored row-major with rows indexed by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: Vec<Vec<f64>>,
}

impl JointPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Argument("joint pmf has an empty alphabet".into()));
        }
        let width = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch { expected: width, got: bad.len() });
        }
        if rows.iter().flatten().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Argument("joint pmf entries must be finite and nonnegative".into()));
        }
        let total: f64 = rows.iter().flatten().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::Argument(format!("joint pmf sums to {total}, not 1")));
        }
        Ok(JointPmf { rows })
    }

    /// Normalizes nonnegative weights into a joint pmf.
    pub fn from_weights(rows: Vec<Vec<f64>>) -> Result<Self> {
        let total: f64 = rows.iter().flatten().sum();
        if !(total > 0.0) {
            return Err(Error::Argument("joint weights sum to zero".into()));
        }
        JointPmf::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(|p| p / total).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn x_size(&self) -> usize {
        self.rows.len()
    }

    pub fn y_size(&self) -> usize {
        self.rows[0].len()
    }

    /// Marginal `P(x)` of each row.
    pub fn x_marginal(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    /// Posterior `P(·|x)` for rows with positive mass.
    pub fn posterior(&self, x: usize) -> Option<ProbVector> {
        let row = self.rows.get(x)?;
        let m: f64 = row.iter().sum();
        if m <= 0.0 {
            return None;
        }
        ProbVector::from_weights(row).ok()
    }

    fn positive_rows(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.rows.iter().filter(|r| r.iter().sum::<f64>() > 0.0)
    }
}

/// Posterior probability `η(x) = P(Y = 1 | x)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Eta(f64);

impl Eta {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Argument(format!("eta must lie in [0, 1], got {value}")));
        }
        Ok(Eta(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Shannon conditional entropy `H(Y|X)` in nats.
fn shannon_conditional(joint: &JointPmf) -> f64 {
    joint
        .positive_rows()
        .map(|row| {
            let px: f64 = row.iter().sum();
            row.iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * (p / px).ln())
                .sum::<f64>()
        })
        .sum()
}

/// `log Σ_x (Σ_y P(x,y)^α)^{1/α}`, computed per row in log-domain.
fn log_arimoto_sum(joint: &JointPmf, a: f64) -> f64 {
    let terms: Vec<f64> = joint
        .positive_rows()
        .map(|row| {
            let max = row.iter().cloned().fold(0.0, f64::max);
            let inner: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| (p / max).powf(a)).sum();
            max.ln() + inner.ln() / a
        })
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

fn map_success(joint: &JointPmf) -> f64 {
    joint
        .positive_rows()
        .map(|row| row.iter().cloned().fold(0.0, f64::max))
        .sum()
}

/// Arimoto conditional entropy `H_α^A(Y|X)` in nats.
pub fn arimoto_conditional_entropy(joint: &JointPmf, alpha: AlphaParam) -> f64 {
    let h = match alpha.branch() {
        Branch::Log => shannon_conditional(joint),
        Branch::Infinite => -map_success(joint).ln(),
        Branch::General(a) => a / (1.0 - a) * log_arimoto_sum(joint, a),
    };
    h.max(0.0)
}

/// Smallest achievable expected alpha-loss `min E[l^α(Y, P̂_{Y|X})]`.
pub fn minimal_alpha_risk(joint: &JointPmf, alpha: AlphaParam) -> f64 {
    match alpha.branch() {
        Branch::Log => shannon_conditional(joint),
        Branch::Infinite => (1.0 - map_success(joint)).max(0.0),
        Branch::General(a) => {
            let h = arimoto_conditional_entropy(joint, alpha);
            (-(a / (a - 1.0)) * ((1.0 - a) / a * h).exp_m1()).max(0.0)
        }
    }
}

/// Expected alpha-loss of a per-row soft prediction under `joint`.
pub fn expected_alpha_risk(
    joint: &JointPmf,
    alpha: AlphaParam,
    predictions: &[ProbVector],
) -> Result<f64> {
    if predictions.len() != joint.x_size() {
        return Err(Error::DimensionMismatch { expected: joint.x_size(), got: predictions.len() });
    }
    let mut total = 0.0;
    for (row, pred) in joint.rows().iter().zip(predictions) {
        if pred.len() != row.len() {
            return Err(Error::DimensionMismatch { expected: row.len(), got: pred.len() });
        }
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                total += p * crate::loss::alpha_loss(alpha, y, pred)?;
            }
        }
    }
    Ok(total)
}

/// The alpha-tilted distribution, proportional to `p(y)^α`.
pub fn tilt_posterior(p: &ProbVector, alpha: AlphaParam) -> ProbVector {
    let masses = p.masses();
    match alpha.branch() {
        Branch::Log => p.clone(),
        Branch::Infinite => {
            let max = masses.iter().cloned().fold(0.0, f64::max);
            let ties: Vec<f64> = masses.iter().map(|&m| if m == max { 1.0 } else { 0.0 }).collect();
            ProbVector::from_weights(&ties).expect("argmax set is nonempty")
        }
        Branch::General(a) => {
            let max = masses.iter().cloned().fold(0.0, f64::max);
            let w: Vec<f64> = masses
                .iter()
                .map(|&m| if m > 0.0 { (m / max).powf(a) } else { 0.0 })
                .collect();
            ProbVector::from_weights(&w).expect("tilt of a valid pmf has positive mass")
        }
    }
}

/// Conditional risk `η·l̃^α(f) + (1−η)·l̃^α(−f)`.
pub fn conditional_risk(eta: Eta, alpha: AlphaParam, f: f64) -> f64 {
    let e = eta.0;
    let pos = if e > 0.0 { e * margin_alpha_loss(alpha, Margin(f)) } else { 0.0 };
    let neg = if e < 1.0 { (1.0 - e) * margin_alpha_loss(alpha, Margin(-f)) } else { 0.0 };
    pos + neg
}

/// Minimum over `f` of the conditional risk, `C*_α(η)`.
pub fn min_conditional_risk(eta: Eta, alpha: AlphaParam) -> f64 {
    let e = eta.0;
    let q = 1.0 - e;
    match alpha.branch() {
        Branch::Log => {
            let h = |t: f64| if t > 0.0 { -t * t.ln() } else { 0.0 };
            h(e) + h(q)
        }
        Branch::Infinite => e.min(q),
        Branch::General(a) => {
            if e == 0.0 || q == 0.0 {
                return 0.0;
            }
            let m = e.max(q);
            let ratio = e.min(q) / m;
            // (η^α + (1−η)^α)^{1/α} = m·(1 + ratio^α)^{1/α}
            let log_norm = m.ln() + (ratio.powf(a)).ln_1p() / a;
            (-(a / (a - 1.0)) * log_norm.exp_m1()).max(0.0)
        }
    }
}

/// Optimal classification function `f*_α(η) = α·logit(η)`.
///
/// At `α = ∞` the minimizer escapes to infinity; the calibrated limit
/// `sign(2η − 1)·∞` is returned (and `0` at `η = 1/2`).
pub fn optimal_classifier(eta: Eta, alpha: AlphaParam) -> f64 {
    let logit = inverse_sigmoid(eta.0).expect("eta lies in [0, 1]");
    if logit == 0.0 {
        return 0.0;
    }
    if alpha.is_infinite() {
        return logit.signum() * f64::INFINITY;
    }
    alpha.value() * logit
}

/// The binomial pmf `Binomial(n, p)` over `{0, …, n}`.
pub fn binomial_pmf(n: u32, p: f64) -> Result<ProbVector> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("binomial p must lie in [0, 1], got {p}")));
    }
    let mut w = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let log_c = statrs::function::factorial::ln_binomial(n as u64, k as u64);
        let lp = if k == 0 { 0.0 } else { k as f64 * p.ln() };
        let lq = if k == n { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
        w.push((log_c + lp + lq).exp());
    }
    ProbVector::from_weights(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn a(v: f64) -> AlphaParam {
        AlphaParam::new(v).unwrap()
    }

    fn sym_joint() -> JointPmf {
        JointPmf::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    fn random_joint(rng: &mut impl Rng, nx: usize, ny: usize) -> JointPmf {
        let rows = (0..nx)
            .map(|_| (0..ny).map(|_| rng.random_range(0.01..1.0)).collect())
            .collect();
        JointPmf::from_weights(rows).unwrap()
    }

    #[test]
    fn uniform_independent_label_gives_log_m() {
        let joint = JointPmf::new(vec![vec![0.1; 3], vec![0.2; 3], vec![1.0 / 3.0 - 0.3; 3]]).unwrap();
        for &al in &[0.3, 1.0, 2.0, 7.0, f64::INFINITY] {
            let h = arimoto_conditional_entropy(&joint, a(al));
            assert!((h - 3f64.ln()).abs() < 1e-12, "{al}: {h}");
        }
    }

    #[test]
    fn shannon_case_on_symmetric_joint() {
        let h = arimoto_conditional_entropy(&sym_joint(), a(1.0));
        let oracle = -(0.8f64 * 0.8f64.ln() + 0.2 * 0.2f64.ln());
        assert!((h - oracle).abs() < 1e-14);
        assert!((h - 0.5004).abs() < 1e-4);
    }

    #[test]
    fn map_error_at_infinity() {
        assert!((minimal_alpha_risk(&sym_joint(), AlphaParam::INFINITY) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn deterministic_label_has_zero_risk() {
        let joint = JointPmf::new(vec![vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap();
        for &al in &[0.5, 1.0, 3.0, f64::INFINITY] {
            assert!(minimal_alpha_risk(&joint, a(al)).abs() < 1e-14);
        }
    }

    #[test]
    fn large_alpha_approaches_infinity_branch() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let j = random_joint(&mut rng, 3, 3);
            let big = arimoto_conditional_entropy(&j, a(1e4));
            let inf = arimoto_conditional_entropy(&j, AlphaParam::INFINITY);
            assert!((big - inf).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_mass_rows_are_skipped() {
        let joint = JointPmf::new(vec![vec![0.4, 0.1], vec![0.0, 0.0], vec![0.1, 0.4]]).unwrap();
        let h = arimoto_conditional_entropy(&joint, a(2.0));
        assert!((h - arimoto_conditional_entropy(&sym_joint(), a(2.0))).abs() < 1e-15);
    }

    #[test]
    fn tilt_examples() {
        let p = ProbVector::new(vec![0.125, 0.375, 0.375, 0.125]).unwrap();
        let t = tilt_posterior(&p, a(2.0));
        for (x, y) in t.masses().iter().zip([0.05, 0.45, 0.45, 0.05]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(tilt_posterior(&p, a(1.0)), p);
        let inf = tilt_posterior(&p, AlphaParam::INFINITY);
        assert_eq!(inf.masses(), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn tilt_entropy_orders_with_alpha() {
        let p = binomial_pmf(20, 0.5).unwrap();
        let h1 = p.entropy();
        assert!(tilt_posterior(&p, a(0.5)).entropy() > h1);
        assert!(tilt_posterior(&p, a(3.0)).entropy() < h1);
        let skew = ProbVector::new(vec![0.6, 0.25, 0.1, 0.05]).unwrap();
        let hs: Vec<f64> = (1..80).map(|i| tilt_posterior(&skew, a(0.1 * i as f64)).entropy()).collect();
        for w in hs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn tilt_minimizes_conditional_risk() {
        // Grid over the binary simplex; tilt must sit within two grid steps.
        let step = 1e-3;
        for &(p1, al) in &[(0.7, 0.5), (0.7, 2.0), (0.85, 4.0), (0.6, 1.0)] {
            let p = ProbVector::new(vec![1.0 - p1, p1]).unwrap();
            let mut best = (f64::INFINITY, 0.0);
            for i in 1..1000 {
                let q1 = i as f64 * step;
                let q = ProbVector::new(vec![1.0 - q1, q1]).unwrap();
                let r = (1.0 - p1) * crate::loss::alpha_loss(a(al), 0, &q).unwrap()
                    + p1 * crate::loss::alpha_loss(a(al), 1, &q).unwrap();
                if r < best.0 {
                    best = (r, q1);
                }
            }
            let t = tilt_posterior(&p, a(al));
            let tv = (t.masses()[1] - best.1).abs();
            assert!(tv <= 2.0 * step, "{p1} {al}: {tv}");
        }
    }

    #[test]
    fn conditional_risk_examples() {
        assert!((min_conditional_risk(Eta::new(0.2).unwrap(), a(0.5)) - 0.8).abs() <= 1e-12);
        assert!((min_conditional_risk(Eta::new(0.5).unwrap(), a(1.0)) - 2f64.ln()).abs() < 1e-15);
        assert!((min_conditional_risk(Eta::new(0.3).unwrap(), AlphaParam::INFINITY) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn min_risk_matches_expected_conditional_risk() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let j = random_joint(&mut rng, 3, 2);
            for &al in &[0.4, 1.0, 2.0, 6.0, f64::INFINITY] {
                let via_eta: f64 = j
                    .rows()
                    .iter()
                    .map(|r| {
                        let px = r[0] + r[1];
                        px * min_conditional_risk(Eta::new(r[1] / px).unwrap(), a(al))
                    })
                    .sum();
                assert!((via_eta - minimal_alpha_risk(&j, a(al))).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn min_conditional_risk_is_concave() {
        for &al in &[0.3, 0.5, 0.77, 1.0, 1.44, f64::INFINITY] {
            let v: Vec<f64> = (0..=1000)
                .map(|i| min_conditional_risk(Eta::new(i as f64 * 1e-3).unwrap(), a(al)))
                .collect();
            for w in v.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-8);
            }
        }
    }

    #[test]
    fn optimal_classifier_examples() {
        for &al in &[0.3, 1.0, 4.0, f64::INFINITY] {
            assert_eq!(optimal_classifier(Eta::new(0.5).unwrap(), a(al)), 0.0);
        }
        let f = optimal_classifier(Eta::new(0.8).unwrap(), a(2.0));
        assert!((f - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert_eq!(optimal_classifier(Eta::new(1.0).unwrap(), a(2.0)), f64::INFINITY);
        assert_eq!(optimal_classifier(Eta::new(0.2).unwrap(), AlphaParam::INFINITY), f64::NEG_INFINITY);
        // Grid minimization at step 1e-3 agrees with the closed form.
        let grid_min = (-6000..=6000)
            .map(|i| i as f64 * 1e-3)
            .min_by(|x, y| {
                conditional_risk(Eta::new(0.8).unwrap(), a(2.0), *x)
                    .total_cmp(&conditional_risk(Eta::new(0.8).unwrap(), a(2.0), *y))
            })
            .unwrap();
        assert!((grid_min - f).abs() <= 2e-3);
    }

    #[test]
    fn rejects_bad_joints() {
        assert!(JointPmf::new(vec![]).is_err());
        assert!(JointPmf::new(vec![vec![0.5], vec![0.25, 0.25]]).is_err());
        assert!(JointPmf::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(Eta::new(1.2).is_err());
    }

    proptest! {
        #[test]
        fn entropy_in_range(w in proptest::collection::vec(0.001f64..1.0, 6), al in 0.1f64..20.0) {
            let j = JointPmf::from_weights(vec![w[0..3].to_vec(), w[3..6].to_vec()]).unwrap();
            let h = arimoto_conditional_entropy(&j, a(al));
            prop_assert!(h >= 0.0 && h <= 3f64.ln() + 1e-12);
        }

        #[test]
        fn calibration_sign(eta in 0.001f64..0.999, al in 0.1f64..30.0) {
            prop_assume!((eta - 0.5).abs() > 1e-9);
            let f = optimal_classifier(Eta::new(eta).unwrap(), a(al));
            prop_assert_eq!(f.signum(), (2.0 * eta - 1.0).signum());
        }

        #[test]
        fn min_conditional_risk_symmetric(eta in 0.0f64..=1.0, al in 0.1f64..30.0) {
            let l = min_conditional_risk(Eta::new(eta).unwrap(), a(al));
            let r = min_conditional_risk(Eta::new(1.0 - eta).unwrap(), a(al));
            prop_assert!((l - r).abs() < 1e-12);
        }
    }
}
