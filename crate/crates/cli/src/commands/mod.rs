//! Subcommands. Each returns the text destined for standard output; files go
//! to the configured output directory.

mod analyze;
mod compare;
mod evaluate;
mod figures;
mod solve;

pub use analyze::{analyze, Analysis};
pub use compare::compare;
pub use evaluate::{evaluate, EvalMethod};
pub use figures::{figures, FIGURE_IDS};
pub use solve::solve;

use growfrag::pde::{auto_y_range, build_grid, solve_n, SolveOptions};
use growfrag::Solution;

use crate::config::RunConfig;
use crate::{CliError, Result};

/// The grid solver integrates the normalized problem; growth and rate
/// parameters are reached analytically by rescaling.
fn require_normalized(cfg: &RunConfig) -> Result<()> {
    if cfg.g != 0.0 || cfg.b != 1.0 {
        return Err(CliError::Config(format!(
            "the grid solver works with g = 0 and b = 1 (got g = {}, b = {}); \
             other values follow from u(t, x) = e^(-gt) v(bt, x e^(-gt))",
            cfg.g, cfg.b
        )));
    }
    Ok(())
}

/// Solve on the configured grid, keeping `snapshots` and tracking the rays.
fn run_solver(cfg: &RunConfig, snapshots: Vec<f64>, rays: &[f64]) -> Result<Solution> {
    require_normalized(cfg)?;
    let (lo, hi) = auto_y_range(&cfg.profile, cfg.alpha, cfg.t_end, rays);
    let grid = build_grid(
        &cfg.profile,
        cfg.alpha,
        cfg.y_min.unwrap_or(lo),
        cfg.y_max.unwrap_or(hi),
        cfg.m,
    )?;
    let opts = SolveOptions::new(cfg.t_end)
        .dt(cfg.dt)
        .snapshots(snapshots)
        .rays(rays.to_vec());
    Ok(solve_n(&grid, &opts)?)
}
