//! One module per subcommand. Each exposes `Args` and `run`.

pub mod bounds;
pub mod landscape;
pub mod slqc_audit;
pub mod synth;
pub mod tilt;
pub mod trend;

use alpha_lab::AlphaParam;

/// Column name for a per-α column, e.g. `alpha_0.5` or `alpha_inf`.
pub fn alpha_column(prefix: &str, alpha: AlphaParam) -> String {
    format!("{prefix}_{alpha}")
}

/// Column names `prefix_1 … prefix_d`.
pub fn indexed_columns(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("{prefix}_{k}")).collect()
}

/// Returns an audit failure only under `--strict`; otherwise reports it.
pub fn audit_outcome(strict: bool, ok: bool, message: String) -> crate::error::CliResult<()> {
    if ok {
        return Ok(());
    }
    if strict {
        Err(crate::error::CliError::AuditViolation(message))
    } else {
        eprintln!("alpha-lab: warning: {message}");
        Ok(())
    }
}
