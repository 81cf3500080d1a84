//! End-to-end acceptance suite. Each criterion runs at its stated
//! tolerance and time budget and prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use alpha_lab::generalization::{optimality_trend, rademacher_audit, uniform_discrepancy_audit, AuditConfig};
use alpha_lab::harness::{
    bayes_risk, run_synthetic_experiment, saturation_report, CorruptionSpec, ExperimentConfig,
    ExperimentSummary, FeatureConfig, GmmSampler, GmmSpec, TrainConfig,
};
use alpha_lab::info::{
    conditional_risk, min_conditional_risk, minimal_alpha_risk, optimal_classifier, Eta, JointPmf,
};
use alpha_lab::logistic::{
    alpha_lipschitz_gradient, alpha_lipschitz_risk, min_eigenvalue, risk_and_gradient,
    risk_gradient, risk_hessian, second_moment, small_radius_alpha_limit, small_radius_modulus,
    strong_convexity_modulus, theta_lipschitz_constant, LabeledDataset,
};
use alpha_lab::loss::{margin_alpha_loss, sigmoid, Margin};
use alpha_lab::numeric::norm;
use alpha_lab::slqc::{
    audit_points, bootstrap_sequences, bootstrap_slqc, check_slqc_at, evolve_slqc, ngd,
    Ball, EvolutionInput, GradientMode, NgdConfig, OracleFunction, SlqcCertificate,
};
use alpha_lab::AlphaParam;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion: pass flag and a one-line summary.
struct Outcome {
    pass: bool,
    detail: String,
}

fn a(v: f64) -> AlphaParam {
    AlphaParam::new(v).unwrap()
}

/// Uniform features in `[0, 1]^d` with labels from a logistic model.
fn logistic_dataset<R: Rng>(n: usize, d: usize, truth: &[f64], rng: &mut R) -> LabeledDataset {
    loop {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let labels: Vec<i8> = rows
            .iter()
            .map(|x| {
                let z: f64 = x.iter().zip(truth).map(|(a, b)| a * b).sum();
                if rng.random::<f64>() < sigmoid(z) { 1 } else { -1 }
            })
            .collect();
        if labels.contains(&1) && labels.contains(&-1) {
            return LabeledDataset::from_rows(&rows, &labels).unwrap();
        }
    }
}

fn random_in_ball<R: Rng>(d: usize, r: f64, rng: &mut R) -> Vec<f64> {
    alpha_lab::generalization::uniform_in_ball(d, r, rng)
}

fn criterion_1() -> Outcome {
    let cases = [
        (0.5, -1.0, 1f64.exp()),
        (0.5, -5.0, 5f64.exp()),
        (1.44, -1.0, 1.08),
        (1.44, -5.0, 2.56),
    ];
    let mut worst = 0.0f64;
    for (alpha, z, expected) in cases {
        let v = margin_alpha_loss(a(alpha), Margin(z));
        worst = worst.max((v - expected).abs() / expected);
    }
    Outcome { pass: worst <= 1e-2, detail: format!("max relative error {worst:.3e}") }
}

fn criterion_2() -> Outcome {
    let alphas = [a(0.3), a(0.5), a(0.8), a(1.0), a(2.0), a(5.0), AlphaParam::INFINITY];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    for d in [1usize, 2, 5] {
        for _ in 0..50 {
            let truth: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let data = logistic_dataset(40, d, &truth, &mut rng);
            let theta = random_in_ball(d, 3.0, &mut rng);
            for &alpha in &alphas {
                let g = risk_gradient(&theta[..], &data, alpha).unwrap();
                let h = risk_hessian(&theta[..], &data, alpha).unwrap();
                let step = 1e-5;
                let mut fd_g = vec![0.0; d];
                for k in 0..d {
                    let mut tp = theta.clone();
                    let mut tm = theta.clone();
                    tp[k] += step;
                    tm[k] -= step;
                    let (fp, gp) = risk_and_gradient(&tp[..], &data, alpha).unwrap();
                    let (fm, gm) = risk_and_gradient(&tm[..], &data, alpha).unwrap();
                    fd_g[k] = (fp - fm) / (2.0 * step);
                    for j in 0..d {
                        let fd_h = (gp[j] - gm[j]) / (2.0 * step);
                        worst_h = worst_h.max((fd_h - h[(j, k)]).abs());
                    }
                }
                let diff: Vec<f64> = fd_g.iter().zip(&g).map(|(x, y)| x - y).collect();
                let scale = norm(&g).max(1e-3);
                worst_g = worst_g.max(norm(&diff) / scale);
            }
        }
    }
    Outcome {
        pass: worst_g <= 1e-6 && worst_h <= 1e-5,
        detail: format!("max gradient rel. error {worst_g:.2e}, max Hessian abs. error {worst_h:.2e} over 1050 checks"),
    }
}

/// The loss `l^α(q)` written out independently of the library.
fn oracle_loss(alpha: f64, q: f64) -> f64 {
    if alpha.is_infinite() {
        1.0 - q
    } else if q == 0.0 && alpha <= 1.0 {
        f64::INFINITY
    } else {
        alpha / (alpha - 1.0) * (1.0 - q.powf(1.0 - 1.0 / alpha))
    }
}

/// Brute-force `min_q Σ_y p_y l^α(q_y)` over the simplex by grid search with zoom.
fn brute_force_row(alpha: f64, p: &[f64]) -> f64 {
    let objective = |q: &[f64]| p.iter().zip(q).map(|(&py, &qy)| if py > 0.0 { py * oracle_loss(alpha, qy) } else { 0.0 }).sum::<f64>();
    match p.len() {
        2 => {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut best = f64::INFINITY;
            for _ in 0..8 {
                let steps = 400;
                let h = (hi - lo) / steps as f64;
                let mut arg = lo;
                for k in 0..=steps {
                    let q = lo + k as f64 * h;
                    let v = objective(&[q, 1.0 - q]);
                    if v < best {
                        best = v;
                        arg = q;
                    }
                }
                lo = (arg - 2.0 * h).max(0.0);
                hi = (arg + 2.0 * h).min(1.0);
            }
            best
        }
        3 => {
            let mut center = [0.5, 0.5];
            let mut half = 0.5f64;
            let mut best = f64::INFINITY;
            for _ in 0..10 {
                let steps = 120;
                let h = 2.0 * half / steps as f64;
                let mut arg = center;
                for i in 0..=steps {
                    for j in 0..=steps {
                        let q1 = (center[0] - half + i as f64 * h).clamp(0.0, 1.0);
                        let q2 = (center[1] - half + j as f64 * h).clamp(0.0, 1.0);
                        let q3 = 1.0 - q1 - q2;
                        if q3 < 0.0 {
                            continue;
                        }
                        let v = objective(&[q1, q2, q3]);
                        if v < best {
                            best = v;
                            arg = [q1, q2];
                        }
                    }
                }
                center = arg;
                half = 3.0 * h;
            }
            best
        }
        _ => unreachable!(),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for size in [2usize, 3] {
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..size).map(|_| (0..size).map(|_| rng.random::<f64>() + 1e-3).collect()).collect();
            let joint = JointPmf::from_weights(rows).unwrap();
            for alpha in [0.5, 2.0, 5.0, f64::INFINITY] {
                let lib = minimal_alpha_risk(&joint, a(alpha));
                let brute: f64 = joint.rows().iter().map(|row| {
                    let px: f64 = row.iter().sum();
                    let post: Vec<f64> = row.iter().map(|v| v / px).collect();
                    px * brute_force_row(alpha, &post)
                }).sum();
                worst = worst.max((lib - brute).abs());
            }
        }
    }
    Outcome { pass: worst <= 1e-4, detail: format!("max |closed form − brute force| = {worst:.2e} over 400 cases") }
}

fn criterion_4() -> Outcome {
    let alphas = [a(0.5), a(0.8), a(1.0), a(1.5), a(3.0), AlphaParam::INFINITY];
    let etas: Vec<f64> = (1..=99).filter(|&k| k != 50).map(|k| k as f64 / 100.0).collect();
    let step = 0.01;
    let (mut sign_errors, mut recovery_errors, mut worst_steps) = (0usize, 0usize, 0.0f64);
    for &alpha in &alphas {
        let reach = if alpha.is_infinite() { 20.0 } else { alpha.value() * 99f64.ln() + 2.0 };
        let count = (2.0 * reach / step).round() as i64;
        let grid: Vec<f64> = (0..=count).map(|k| -reach + k as f64 * step).collect();
        for &e in &etas {
            let eta = Eta::new(e).unwrap();
            let f_star = optimal_classifier(eta, alpha);
            if f_star.signum() != (2.0 * e - 1.0).signum() {
                sign_errors += 1;
            }
            let mut arg = grid[0];
            let mut best = f64::INFINITY;
            for &f in &grid {
                let v = conditional_risk(eta, alpha, f);
                if v < best {
                    best = v;
                    arg = f;
                }
            }
            if f_star.is_infinite() {
                // The minimizer escapes: the grid optimum sits at the matching end.
                let end = f_star.signum() * reach;
                if (arg - end).abs() > 2.0 * step + 1e-9 {
                    recovery_errors += 1;
                }
            } else {
                let steps = (arg - f_star).abs() / step;
                worst_steps = worst_steps.max(steps);
                if steps > 2.0 + 1e-9 {
                    recovery_errors += 1;
                }
            }
        }
    }
    Outcome {
        pass: sign_errors == 0 && recovery_errors == 0,
        detail: format!("{sign_errors} sign mismatches, {recovery_errors} grid recoveries beyond 2 steps (worst {worst_steps:.2} steps)"),
    }
}

fn criterion_5() -> Outcome {
    let v1 = min_conditional_risk(Eta::new(0.2).unwrap(), a(0.5));
    let v2 = min_conditional_risk(Eta::new(0.5).unwrap(), a(1.0));
    let v3 = min_conditional_risk(Eta::new(0.3).unwrap(), AlphaParam::INFINITY);
    let values_ok = (v1 - 0.8).abs() <= 1e-12 && (v2 - 2f64.ln()).abs() <= 1e-12 && (v3 - 0.3).abs() <= 1e-12;
    let h = 1e-3;
    let mut concave = true;
    for alpha in [a(0.5), a(0.8), a(1.0), a(2.0), a(10.0), AlphaParam::INFINITY] {
        for k in 1..999 {
            let e = k as f64 * h;
            let c = |x: f64| min_conditional_risk(Eta::new(x).unwrap(), alpha);
            if c(e + h) - 2.0 * c(e) + c(e - h) > 1e-12 {
                concave = false;
            }
        }
    }
    Outcome {
        pass: values_ok && concave,
        detail: format!("values ({v1:.15}, {v2:.15}, {v3:.15}); concavity {}", if concave { "holds" } else { "violated" }),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_margin = f64::INFINITY;
    for alpha in [a(0.3), a(0.7), a(1.0)] {
        for _ in 0..100 {
            let d = rng.random_range(1..=4usize);
            let r = rng.random_range(0.5..3.0);
            let truth: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let data = logistic_dataset(60, d, &truth, &mut rng);
            let theta = random_in_ball(d, r, &mut rng);
            let lhs = min_eigenvalue(&risk_hessian(&theta[..], &data, alpha).unwrap());
            let modulus = strong_convexity_modulus(alpha, r * (d as f64).sqrt()).unwrap();
            let rhs = modulus * min_eigenvalue(&second_moment(&data).unwrap());
            worst_margin = worst_margin.min(lhs - rhs);
        }
    }
    // Small-radius regime with α slightly above one.
    let mut worst_small = f64::INFINITY;
    for _ in 0..100 {
        let d = rng.random_range(1..=3usize);
        let r = rng.random_range(0.05..0.47) / (d as f64).sqrt();
        let r_sqrt_d = r * (d as f64).sqrt();
        let alpha = a(rng.random_range(1.0..small_radius_alpha_limit(r_sqrt_d)));
        let truth: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let data = logistic_dataset(60, d, &truth, &mut rng);
        let theta = random_in_ball(d, r, &mut rng);
        let lhs = min_eigenvalue(&risk_hessian(&theta[..], &data, alpha).unwrap());
        let rhs = small_radius_modulus(alpha, r_sqrt_d).unwrap() * min_eigenvalue(&second_moment(&data).unwrap());
        worst_small = worst_small.min(lhs - rhs);
    }
    Outcome {
        pass: worst_margin >= -1e-8 && worst_small >= -1e-8,
        detail: format!("min (λ_min − bound): α ≤ 1 {worst_margin:.3e}, small radius {worst_small:.3e}"),
    }
}

/// Newton's method on a strongly convex empirical risk.
fn newton_minimizer(data: &LabeledDataset, alpha: AlphaParam) -> Vec<f64> {
    let d = data.dim();
    let mut theta = vec![0.0; d];
    for _ in 0..100 {
        let (f, g) = risk_and_gradient(&theta[..], data, alpha).unwrap();
        if norm(&g) < 1e-13 {
            break;
        }
        let h = risk_hessian(&theta[..], data, alpha).unwrap();
        let step = h.cholesky().expect("Hessian is positive definite").solve(&nalgebra::DVector::from_vec(g.clone()));
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let (fc, _) = risk_and_gradient(&cand[..], data, alpha).unwrap();
            if fc <= f || t < 1e-10 {
                theta = cand;
                break;
            }
            t *= 0.5;
        }
    }
    theta
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (r, epsilon) = (1.5, 0.05);
    let (mut accepted, mut successes, mut worst_ratio, mut total_iterations) = (0usize, 0usize, 0.0f64, 0usize);
    while accepted < 100 {
        let d = rng.random_range(1..=3usize);
        let alpha = a(rng.random_range(0.6..=1.0));
        let truth: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let data = logistic_dataset(50, d, &truth, &mut rng);
        if min_eigenvalue(&second_moment(&data).unwrap()) <= 1e-6 {
            continue;
        }
        let theta_star = newton_minimizer(&data, alpha);
        if norm(&theta_star) >= r - 0.1 {
            continue;
        }
        accepted += 1;
        let f_star = alpha_lab::logistic::empirical_alpha_risk(&theta_star[..], &data, alpha).unwrap();
        let kappa = theta_lipschitz_constant(alpha, r, d).unwrap();
        let cert = SlqcCertificate::new(epsilon, kappa, theta_star.clone()).unwrap();
        let config = NgdConfig::from_certificate(&cert, vec![0.0; d]).unwrap();
        total_iterations += config.iterations;
        let f = OracleFunction::from_risk(data, alpha).unwrap();
        let res = ngd(&f, &config, Some(&Ball::centered(d, r))).unwrap();
        let gap = res.best_value - f_star;
        worst_ratio = worst_ratio.max(gap / epsilon);
        if gap <= epsilon {
            successes += 1;
        }
    }
    Outcome {
        pass: successes == 100,
        detail: format!("{successes}/100 within ε = {epsilon}; worst gap/ε {worst_ratio:.3}; {total_iterations} total iterations"),
    }
}

fn criterion_8() -> Outcome {
    let spec = GmmSpec::saturation_reference();
    let sampler = GmmSampler::new(&spec, FeatureConfig::normalized()).unwrap();
    let data = sampler.sample(1000, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let rep = saturation_report(&data, a(10.0), 1.0, 101).unwrap();
    Outcome {
        pass: rep.max_risk_gap <= rep.max_risk_bound && rep.max_gradient_gap <= rep.max_gradient_bound,
        detail: format!(
            "risk gap {:.3e} ≤ {:.3e}, gradient gap {:.3e} ≤ {:.3e} over {} points ({} pointwise violations)",
            rep.max_risk_gap, rep.max_risk_bound, rep.max_gradient_gap, rep.max_gradient_bound, rep.points, rep.pointwise_violations
        ),
    }
}

fn criterion_9() -> Outcome {
    // A logistic-model instance: uniform features, labels from a logistic model.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = logistic_dataset(200, 2, &[1.5, -1.5], &mut rng);
    let r = 3.0;
    let alpha0 = AlphaParam::ONE;
    let theta0 = newton_minimizer(&data, alpha0);
    assert!(norm(&theta0) < r, "minimizer must be interior");

    // (a) sequence limits against the closed forms, and (b) linearity of ε_λ.
    let probe = vec![0.4, 0.9];
    let (_, g_probe) = risk_and_gradient(&probe[..], &data, alpha0).unwrap();
    let input = EvolutionInput {
        alpha0: 1.0,
        epsilon0: 0.5,
        kappa0: 1.0,
        gradient: norm(&g_probe),
        l: alpha_lipschitz_risk(&probe).max(alpha_lipschitz_risk(&theta0)),
        j: alpha_lipschitz_gradient(&probe),
        r: 1.0,
    };
    let seq = bootstrap_sequences(
        input.alpha0, input.epsilon0, input.rho0(), input.gradient, input.l, input.j, input.r,
        10_000, GradientMode::Uniform,
    ).unwrap();
    let lambdas: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let (mut alpha_err, mut eps_err, mut rho_ok) = (0.0f64, 0.0f64, true);
    let mut eps_closed = Vec::new();
    for &lambda in &lambdas {
        let closed = bootstrap_slqc(&input, lambda).unwrap();
        let (a_n, e_n, r_n) = seq.at_lambda(lambda).unwrap();
        alpha_err = alpha_err.max((a_n - closed.alpha).abs());
        eps_err = eps_err.max((e_n - closed.epsilon).abs());
        rho_ok &= r_n > closed.rho_lower_bound / 2.0;
        eps_closed.push(closed.epsilon);
    }
    // Least-squares line through (λ, ε_λ) and its largest residual.
    let n = lambdas.len() as f64;
    let (mx, my) = (lambdas.iter().sum::<f64>() / n, eps_closed.iter().sum::<f64>() / n);
    let sxy: f64 = lambdas.iter().zip(&eps_closed).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lambdas.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let residual = lambdas
        .iter()
        .zip(&eps_closed)
        .map(|(x, y)| (y - (my + slope * (x - mx))).abs())
        .fold(0.0, f64::max);

    // (c) single-step evolved certificates re-verified pointwise.
    let epsilon0 = 0.05;
    let kappa0 = theta_lipschitz_constant(alpha0, r + 1.0, 2).unwrap();
    let base_cert = SlqcCertificate::new(epsilon0, kappa0, theta0.clone()).unwrap();
    let f0 = OracleFunction::from_risk(data.clone(), alpha0).unwrap();
    let points = audit_points(&[0.0, 0.0], r, 512, 9);
    let (mut checked, mut base_failures, mut violations) = (0usize, 0usize, 0usize);
    let mut oracles: Vec<(AlphaParam, OracleFunction)> = Vec::new();
    for theta in &points {
        if !check_slqc_at(&f0, theta, &base_cert).unwrap().holds() {
            base_failures += 1;
            continue;
        }
        let g = norm(&risk_gradient(&theta[..], &data, alpha0).unwrap());
        if g <= 1e-12 {
            continue;
        }
        let inp = EvolutionInput {
            alpha0: 1.0,
            epsilon0,
            kappa0,
            gradient: g,
            l: alpha_lipschitz_risk(theta).max(alpha_lipschitz_risk(&theta0)),
            j: alpha_lipschitz_gradient(theta),
            r,
        };
        let target = a(1.0 + 0.5 * (inp.single_step_sup() - 1.0));
        let evolved = evolve_slqc(&inp, target).unwrap();
        let cert = SlqcCertificate::from_radius(evolved.epsilon, evolved.rho, theta0.clone()).unwrap();
        // Oracles are cached per target to avoid re-registering the same function.
        let f = match oracles.iter().find(|(t, _)| *t == target) {
            Some((_, f)) => f.clone(),
            None => {
                let f = OracleFunction::from_risk(data.clone(), target).unwrap();
                oracles.push((target, f.clone()));
                f
            }
        };
        checked += 1;
        if !check_slqc_at(&f, theta, &cert).unwrap().holds() {
            violations += 1;
        }
    }
    let limits_ok = alpha_err <= 1e-3 && eps_err <= 1e-3 && rho_ok;
    let pass = limits_ok && residual <= 1e-10 && violations == 0 && base_failures == 0;
    Outcome {
        pass,
        detail: format!(
            "α limit err {alpha_err:.2e}, ε limit err {eps_err:.2e}, ρ bound {}, ε_λ linearity residual {residual:.2e}; \
             {checked} evolved certificates checked, {violations} violations, {base_failures} base failures",
            if rho_ok { "holds" } else { "violated" }
        ),
    }
}

/// Minimum separation for an ordering between two angles to count.
const DEAD_BAND_DEGREES: f64 = 1.0;

fn angle(summary: &ExperimentSummary, alpha: f64) -> f64 {
    summary.get(a(alpha)).unwrap().angle_degrees()
}

fn precedes(x: f64, y: f64) -> bool {
    y - x > DEAD_BAND_DEGREES
}

fn criterion_10() -> Outcome {
    let spec = GmmSpec::standard_symmetric();
    let config = ExperimentConfig::new(vec![a(0.65), a(1.0), a(4.0)], 100, 10);
    let imbalance = run_synthetic_experiment(&spec, &CorruptionSpec::imbalance(2, 98), &config).unwrap();
    let noise = run_synthetic_experiment(&spec, &CorruptionSpec::flips(0.2, 0.0), &config).unwrap();
    let clean = run_synthetic_experiment(&spec, &CorruptionSpec::clean(), &config).unwrap();
    let (i065, i1, i4) = (angle(&imbalance, 0.65), angle(&imbalance, 1.0), angle(&imbalance, 4.0));
    let (n065, n1, n4) = (angle(&noise, 0.65), angle(&noise, 1.0), angle(&noise, 4.0));
    let (c065, c1, c4) = (angle(&clean, 0.65), angle(&clean, 1.0), angle(&clean, 4.0));
    let imbalance_ok = precedes(i065, i1) && precedes(i1.max(i065), i4);
    let noise_ok = precedes(n4, n1);
    let clean_ok = [c065, c1, c4].iter().all(|&x| x < 5.0);
    Outcome {
        pass: imbalance_ok && noise_ok && clean_ok,
        detail: format!(
            "angles in degrees (α = 0.65, 1, 4): imbalance ({i065:.3}, {i1:.3}, {i4:.3}) {}; \
             flips ({n065:.3}, {n1:.3}, {n4:.3}) {}; clean ({c065:.3}, {c1:.3}, {c4:.3}) {}",
            ok(imbalance_ok), ok(noise_ok), ok(clean_ok)
        ),
    }
}

fn ok(b: bool) -> &'static str {
    if b { "ok" } else { "NOT ok" }
}

fn criterion_11() -> Outcome {
    let spec = GmmSpec::standard_symmetric();
    let config = AuditConfig::new(vec![a(0.5), a(1.0), a(2.0), AlphaParam::INFINITY], 500, 0.2, 50, 11);
    let rad = rademacher_audit(&spec, &config).unwrap();
    let cor = uniform_discrepancy_audit(&spec, &AuditConfig { alphas: vec![a(10.0)], ..config.clone() }).unwrap();
    let rates: Vec<String> = config.alphas.iter().map(|&al| format!("{al}: {:.2}", rad.failure_rate(al))).collect();
    let cor_ok = cor.trials.iter().all(|t| t.holds);
    Outcome {
        pass: rad.within_confidence() && cor_ok,
        detail: format!(
            "failure rates [{}] (allowed {}), max measured/bound {:.3}; uniform discrepancy {} (max ratio {:.3})",
            rates.join(", "), config.delta, rad.max_ratio(), if cor_ok { "dominates" } else { "violated" }, cor.max_ratio()
        ),
    }
}

fn criterion_12() -> Outcome {
    let spec = GmmSpec::standard_symmetric();
    let bayes = bayes_risk(&spec).unwrap();
    let table = optimality_trend(
        &spec, AlphaParam::ONE, &[50, 200, 1000, 5000], 30, FeatureConfig::raw(), &TrainConfig { learning_rate: 1.0, ..TrainConfig::default() }, 12,
    ).unwrap();
    let last = table.rows.last().unwrap();
    let gaps: Vec<String> = table.rows.iter().map(|r| format!("n={}: {:.2e}±{:.1e}", r.n, r.gap, r.std_error)).collect();
    Outcome {
        pass: table.is_non_increasing() && last.gap < 0.01 && (bayes - 0.0786).abs() < 1e-4,
        detail: format!("Bayes risk {bayes:.6}; gaps [{}]", gaps.join(", ")),
    }
}

type Criterion = (usize, &'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "margin-loss spot values", criterion_1, Duration::from_secs(1)),
        (2, "gradient and Hessian against finite differences", criterion_2, Duration::from_secs(10)),
        (3, "minimal alpha-risk against brute force", criterion_3, Duration::from_secs(30)),
        (4, "classification calibration", criterion_4, Duration::from_secs(10)),
        (5, "minimal conditional risk values and concavity", criterion_5, Duration::from_secs(10)),
        (6, "curvature lower bounds", criterion_6, Duration::from_secs(30)),
        (7, "normalized gradient descent guarantee", criterion_7, Duration::from_secs(120)),
        (8, "saturation of the landscape", criterion_8, Duration::from_secs(60)),
        (9, "certificate evolution and bootstrapping", criterion_9, Duration::from_secs(60)),
        (10, "averaged predictors against the Bayes rule", criterion_10, Duration::from_secs(300)),
        (11, "generalization bound audits", criterion_11, Duration::from_secs(300)),
        (12, "excess 0-1 risk trend", criterion_12, Duration::from_secs(300)),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|s| s.parse().ok());
    let mut failures = Vec::new();
    for (id, name, run, budget) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
            ),
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        println!(
            "criterion {id:>2} {}: {name} — {} [{:.2} s of {} s budget{}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
        if !pass {
            failures.push(id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
