//! Small numerical helpers shared across modules.

/// `log(1 + e^x)` without overflow or underflow.
pub fn softplus(x: f64) -> f64 {
    if x == f64::INFINITY {
        f64::INFINITY
    } else if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `log σ(z) = −softplus(−z)`.
pub fn log_sigmoid(z: f64) -> f64 {
    -softplus(-z)
}

/// Pairwise summation with a fixed reduction order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let m = mean(xs);
    if n < 2 {
        return (m, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean projection onto the ball of radius `radius` around `center`.
pub fn project_to_ball(theta: &mut [f64], center: &[f64], radius: f64) {
    let dist: f64 = theta
        .iter()
        .zip(center)
        .map(|(t, c)| (t - c) * (t - c))
        .sum::<f64>()
        .sqrt();
    if dist > radius {
        let s = radius / dist;
        for (t, c) in theta.iter_mut().zip(center) {
            *t = c + (*t - c) * s;
        }
    }
}

/// Angle in radians between two nonzero vectors, in `[0, π]`.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}
