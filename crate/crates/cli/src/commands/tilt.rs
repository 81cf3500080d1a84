//! `tilt`: the α-tilted pmf `p^α / Σ p^α` for several α.

use std::path::PathBuf;

use alpha_lab::info::{binomial_pmf, tilt_posterior};
use alpha_lab::loss::ProbVector;
use alpha_lab::AlphaParam;

use super::alpha_column;
use crate::error::{CliError, CliResult};
use crate::output::{num, RunManifest, Table};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// A file of masses (separated by commas, whitespace or newlines; `#`
    /// starts a comment) or `binomial:<n>,<p>`.
    #[arg(long)]
    pub pmf: String,
    /// Comma-separated α values; `inf` is accepted.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<AlphaParam>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `binomial:<n>,<p>` or reads masses from a file.
pub fn load_pmf(source: &str) -> CliResult<ProbVector> {
    if let Some(params) = source.strip_prefix("binomial:") {
        let bad = || CliError::Config(format!("malformed binomial pmf '{source}', expected binomial:<n>,<p>"));
        let (n, p) = params.split_once(',').ok_or_else(bad)?;
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        let p: f64 = p.trim().parse().map_err(|_| bad())?;
        return Ok(binomial_pmf(n, p)?);
    }
    let text = std::fs::read_to_string(source).map_err(|e| CliError::io(source, e))?;
    parse_masses(&text).map_err(|e| CliError::Config(format!("malformed pmf in {source}: {e}")))
}

fn parse_masses(text: &str) -> Result<ProbVector, String> {
    let masses = text
        .lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<Vec<f64>, String>>()?;
    ProbVector::new(masses).map_err(|e| e.to_string())
}

pub fn run(args: Args) -> CliResult<()> {
    let mut manifest = RunManifest::new("tilt", &args.out).config(&args.pmf);
    let pmf = load_pmf(&args.pmf)?;
    let tilted: Vec<ProbVector> = args.alphas.iter().map(|&a| tilt_posterior(&pmf, a)).collect();
    let mut header = vec!["outcome".to_string(), "pmf".to_string()];
    header.extend(args.alphas.iter().map(|&a| alpha_column("alpha", a)));
    let mut table = Table::new(header);
    for (k, &mass) in pmf.masses().iter().enumerate() {
        let mut row = vec![k.to_string(), num(mass)];
        row.extend(tilted.iter().map(|t| num(t.masses()[k])));
        table.push(row);
    }
    manifest.note("alphas", args.alphas.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
    table.write(&args.out, &manifest)?;
    eprintln!("tilt: {} outcomes, {} alphas -> {}", table.len(), args.alphas.len(), args.out.display());
    Ok(())
}
