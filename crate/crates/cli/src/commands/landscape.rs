//! `landscape`: empirical α-risk on a `k × k` lattice over `[−r, r]²`,
//! optionally compared with the `α = ∞` landscape.

use std::path::PathBuf;

use alpha_lab::harness::{is_single_basin, landscape_grid, lattice_local_minima, sample_gmm, saturation_report};
use alpha_lab::AlphaParam;

use super::audit_outcome;
use crate::config::{load_gmm, FeatureMode};
use crate::error::{CliError, CliResult};
use crate::output::{companion_path, num, RunManifest, Table};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Mixture JSON file or `builtin:<name>`; must be two-dimensional.
    #[arg(long)]
    pub gmm: String,
    #[arg(long)]
    pub alpha: AlphaParam,
    #[arg(long)]
    pub radius: f64,
    /// Lattice points per axis.
    #[arg(long)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Training-set size drawn from the mixture.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FeatureMode::Normalized)]
    pub features: FeatureMode,
    /// Also write `<out>.saturation.csv` comparing against `α = ∞`.
    #[arg(long)]
    pub compare_infinity: bool,
}

pub fn run(args: Args, strict: bool) -> CliResult<()> {
    let mut manifest = RunManifest::new("landscape", &args.out).config(&args.gmm).seed(args.seed);
    let spec = load_gmm(&args.gmm)?;
    if spec.dim() != 2 {
        return Err(CliError::Config(format!("landscape needs a two-dimensional mixture, got d = {}", spec.dim())));
    }
    let features = args.features.config(false);
    let data = sample_gmm(&spec, args.samples, features, args.seed)?;
    let grid = landscape_grid(&data, args.alpha, args.radius, args.grid)?;

    let mut table = Table::new(["i", "j", "theta_1", "theta_2", "in_ball", "risk"]);
    for (i, &a) in grid.coords.iter().enumerate() {
        for (j, &b) in grid.coords.iter().enumerate() {
            table.push(vec![
                i.to_string(),
                j.to_string(),
                num(a),
                num(b),
                u8::from(grid.in_ball[i][j]).to_string(),
                num(grid.values[i][j]),
            ]);
        }
    }
    let minima = lattice_local_minima(&grid).len();
    let single_basin = is_single_basin(&grid);
    manifest.note("alpha", args.alpha);
    manifest.note("radius", num(args.radius));
    manifest.note("grid", args.grid);
    manifest.note("samples", args.samples);
    manifest.note("features", args.features.name());
    manifest.note("lattice_local_minima", minima);
    manifest.note("single_basin", single_basin);
    table.write(&args.out, &manifest)?;
    eprintln!(
        "landscape: {k}x{k} grid, {minima} lattice local minima (single basin: {single_basin}) -> {}",
        args.out.display(),
        k = args.grid
    );

    if !args.compare_infinity {
        return Ok(());
    }
    let rep = saturation_report(&data, args.alpha, args.radius, args.grid)?;
    let mut sat = Table::new([
        "alpha",
        "points",
        "max_risk_gap",
        "max_risk_bound",
        "max_gradient_gap",
        "max_gradient_bound",
        "pointwise_violations",
        "holds",
    ]);
    sat.push(vec![
        rep.alpha.to_string(),
        rep.points.to_string(),
        num(rep.max_risk_gap),
        num(rep.max_risk_bound),
        num(rep.max_gradient_gap),
        num(rep.max_gradient_bound),
        rep.pointwise_violations.to_string(),
        u8::from(rep.holds()).to_string(),
    ]);
    let path = companion_path(&args.out, "saturation");
    sat.write(&path, &manifest)?;
    eprintln!(
        "landscape: max |R_a - R_inf| = {:.3e} (bound {:.3e}), {} pointwise violations -> {}",
        rep.max_risk_gap,
        rep.max_risk_bound,
        rep.pointwise_violations,
        path.display()
    );
    audit_outcome(
        strict,
        rep.holds(),
        format!("saturation bound violated at {} of {} lattice points", rep.pointwise_violations, rep.points),
    )
}
