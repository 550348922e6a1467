use std::fmt::Write as _;

use growfrag::analysis::{compare_methods, CompareOptions, Method, Tolerances};

use crate::config::{Format, RunConfig};
use crate::output::{create_dir, write_file};
use crate::Result;

pub(super) fn options(cfg: &RunConfig, methods: Option<Vec<Method>>) -> CompareOptions {
    let mut opts = CompareOptions {
        tolerances: Tolerances {
            pde: cfg.checks.pde_tol,
            mellin: cfg.checks.mellin_tol,
            ..Tolerances::default()
        },
        cells_per_log_alpha: cfg.m,
        dt: cfg.dt,
        ..CompareOptions::default()
    };
    if let Some(m) = methods {
        opts.methods = m;
    }
    opts
}

/// Series against the other routes at `compare.t × compare.x`; writes
/// `comparison.csv`. Disagreements are reported, not fatal.
pub fn compare(cfg: &RunConfig, methods: Option<Vec<Method>>) -> Result<String> {
    let params = cfg.params()?;
    let report = compare_methods(&cfg.profile, &params, &cfg.compare_t, &cfg.compare_x, &options(cfg, methods));
    let mut out = report.summary();
    if cfg.wants(Format::Csv) {
        create_dir(&cfg.out_dir)?;
        let path = cfg.out_dir.join("comparison.csv");
        write_file(&path, &report.to_csv())?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out)
}
