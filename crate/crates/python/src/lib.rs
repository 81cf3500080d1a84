//! Python bindings: α-losses, tilted distributions, information measures,
//! logistic-model risks and generalization bounds.
//!
//! Every `alpha` argument accepts a positive float or the string `"inf"`.
//! Library errors surface as `ValueError` (invalid inputs) or
//! `ArithmeticError` (numeric failures).

use alpha_lab::generalization::{rademacher_bound as rademacher, uniform_discrepancy_bound as discrepancy, BoundQuery};
use alpha_lab::harness::{train_gd as train, TrainConfig};
use alpha_lab::info::{self, JointPmf};
use alpha_lab::logistic::{self, LabeledDataset};
use alpha_lab::loss::{self, Margin, ProbVector};
use alpha_lab::{AlphaParam, Error};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Singular(_) | Error::Numeric(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Reads an α given as a number or as a string such as `"inf"`.
fn alpha_arg(value: &Bound<'_, PyAny>) -> PyResult<AlphaParam> {
    if let Ok(v) = value.extract::<f64>() {
        return AlphaParam::new(v).map_err(to_py);
    }
    let text: String = value
        .extract()
        .map_err(|_| PyValueError::new_err("alpha must be a positive number or the string 'inf'"))?;
    text.parse().map_err(to_py)
}

/// Builds a dataset from feature rows and ±1 labels.
pub fn dataset(x: &[Vec<f64>], y: &[i8]) -> alpha_lab::Result<LabeledDataset> {
    LabeledDataset::from_rows(x, y)
}

/// Margin-based α-loss `l̃^α(z)`.
#[pyfunction]
fn margin_loss(alpha: &Bound<'_, PyAny>, z: f64) -> PyResult<f64> {
    let alpha = alpha_arg(alpha)?;
    let z = Margin::new(z).map_err(to_py)?;
    Ok(loss::margin_alpha_loss(alpha, z))
}

/// α-loss of assigning probability `p` to the true label.
#[pyfunction]
fn prob_loss(alpha: &Bound<'_, PyAny>, p: f64) -> PyResult<f64> {
    loss::prob_loss(alpha_arg(alpha)?, p).map_err(to_py)
}

/// The α-tilted distribution `p^α / Σ p^α`.
#[pyfunction]
fn tilt(pmf: Vec<f64>, alpha: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    let p = ProbVector::new(pmf).map_err(to_py)?;
    Ok(info::tilt_posterior(&p, alpha_arg(alpha)?).masses().to_vec())
}

/// The `Binomial(n, p)` pmf over `0..=n`.
#[pyfunction]
fn binomial_pmf(n: u32, p: f64) -> PyResult<Vec<f64>> {
    Ok(info::binomial_pmf(n, p).map_err(to_py)?.masses().to_vec())
}

/// Arimoto conditional entropy of `Y` given `X` for a joint pmf (rows index `X`).
#[pyfunction]
fn arimoto_conditional_entropy(joint: Vec<Vec<f64>>, alpha: &Bound<'_, PyAny>) -> PyResult<f64> {
    let joint = JointPmf::new(joint).map_err(to_py)?;
    Ok(info::arimoto_conditional_entropy(&joint, alpha_arg(alpha)?))
}

/// Minimal expected α-loss over all soft classifiers for a joint pmf.
#[pyfunction]
fn minimal_alpha_risk(joint: Vec<Vec<f64>>, alpha: &Bound<'_, PyAny>) -> PyResult<f64> {
    let joint = JointPmf::new(joint).map_err(to_py)?;
    Ok(info::minimal_alpha_risk(&joint, alpha_arg(alpha)?))
}

/// Empirical α-risk of the logistic model at `theta`.
#[pyfunction]
fn empirical_risk(theta: Vec<f64>, x: Vec<Vec<f64>>, y: Vec<i8>, alpha: &Bound<'_, PyAny>) -> PyResult<f64> {
    let data = dataset(&x, &y).map_err(to_py)?;
    logistic::empirical_alpha_risk(&theta[..], &data, alpha_arg(alpha)?).map_err(to_py)
}

/// Gradient of the empirical α-risk.
#[pyfunction]
fn risk_gradient(theta: Vec<f64>, x: Vec<Vec<f64>>, y: Vec<i8>, alpha: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    let data = dataset(&x, &y).map_err(to_py)?;
    logistic::risk_gradient(&theta[..], &data, alpha_arg(alpha)?).map_err(to_py)
}

/// Hessian of the empirical α-risk as a list of rows.
#[pyfunction]
fn risk_hessian(theta: Vec<f64>, x: Vec<Vec<f64>>, y: Vec<i8>, alpha: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<f64>>> {
    let data = dataset(&x, &y).map_err(to_py)?;
    let h = logistic::risk_hessian(&theta[..], &data, alpha_arg(alpha)?).map_err(to_py)?;
    Ok((0..h.nrows()).map(|i| h.row(i).iter().copied().collect()).collect())
}

/// Full-batch gradient descent from zero. Returns `(theta, iterations, converged)`.
#[pyfunction]
#[pyo3(signature = (x, y, alpha, learning_rate=0.01, optimality=1e-4, max_iterations=200_000))]
fn train_gd(
    x: Vec<Vec<f64>>,
    y: Vec<i8>,
    alpha: &Bound<'_, PyAny>,
    learning_rate: f64,
    optimality: f64,
    max_iterations: usize,
) -> PyResult<(Vec<f64>, usize, bool)> {
    let data = dataset(&x, &y).map_err(to_py)?;
    let config = TrainConfig {
        alpha: alpha_arg(alpha)?,
        learning_rate,
        optimality,
        max_iterations,
        ..TrainConfig::default()
    };
    let res = train(&data, &config).map_err(to_py)?;
    let converged = res.termination == alpha_lab::harness::Termination::Converged;
    Ok((res.theta.into_vec(), res.iterations, converged))
}

/// Rademacher generalization bound for parameters in a ball of radius `r`.
#[pyfunction]
fn rademacher_bound(alpha: &Bound<'_, PyAny>, r: f64, d: usize, n: usize, delta: f64) -> PyResult<f64> {
    let q = BoundQuery::new(alpha_arg(alpha)?, r, d, n, delta).map_err(to_py)?;
    rademacher(&q).map_err(to_py)
}

/// Uniform bound on `|R̂_α − R_∞|` for `α ≥ 1`.
#[pyfunction]
fn uniform_discrepancy_bound(alpha: &Bound<'_, PyAny>, r: f64, d: usize, n: usize, delta: f64) -> PyResult<f64> {
    let q = BoundQuery::new(alpha_arg(alpha)?, r, d, n, delta).map_err(to_py)?;
    discrepancy(&q).map_err(to_py)
}

#[pymodule]
fn alpha_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(margin_loss, m)?)?;
    m.add_function(wrap_pyfunction!(prob_loss, m)?)?;
    m.add_function(wrap_pyfunction!(tilt, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(arimoto_conditional_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_alpha_risk, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_risk, m)?)?;
    m.add_function(wrap_pyfunction!(risk_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(risk_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(train_gd, m)?)?;
    m.add_function(wrap_pyfunction!(rademacher_bound, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_discrepancy_bound, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validates_labels_and_shapes() {
        assert!(dataset(&[vec![0.1, 0.2], vec![0.3, 0.4]], &[1, -1]).is_ok());
        assert!(dataset(&[vec![0.1, 0.2]], &[0]).is_err());
        assert!(dataset(&[vec![0.1, 0.2], vec![0.3]], &[1, -1]).is_err());
    }
}
