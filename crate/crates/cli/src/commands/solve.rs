use std::fmt::Write as _;

use crate::config::{Format, RunConfig};
use crate::output::{create_dir, labelled, sci, write_csv, write_file, LinePlot, Series};
use crate::Result;

use super::run_solver;

/// Integrate the configured problem and write `snapshots.csv` (the figure
/// quantity `√t n`) and `diagnostics.csv` (mass, argmax and ray values per step).
pub fn solve(cfg: &RunConfig) -> Result<String> {
    let rays = cfg.ray_slopes();
    let traj = run_solver(cfg, cfg.snapshot_times(), &rays)?;
    create_dir(&cfg.out_dir)?;

    let mut snap_rows = Vec::new();
    let mut curves = Vec::new();
    for (t, grid) in traj.snapshots() {
        let st = t.sqrt();
        let mut points = Vec::with_capacity(grid.len());
        for (y, n) in grid.nodes() {
            snap_rows.push([sci(t), sci(y), sci(n), sci(st * n)]);
            points.push((y, st * n));
        }
        curves.push(Series {
            label: format!("t = {t}"),
            points,
        });
    }

    let mut header = vec!["t".to_string(), "mass".into(), "argmax_y".into(), "min_n".into()];
    header.extend(rays.iter().map(|&y| labelled("n_ray", y)));
    let ray_values: Vec<&[f64]> = rays
        .iter()
        .map(|&y| traj.ray_series(y).map(|(_, v)| v))
        .collect::<Result<_, _>>()?;
    let diag_rows = traj.diagnostics().iter().enumerate().map(|(j, d)| {
        let mut row = vec![sci(d.t), sci(d.mass), sci(d.argmax_y), sci(d.min_value)];
        row.extend(ray_values.iter().map(|v| sci(v[j])));
        row
    });

    let snap_path = cfg.out_dir.join("snapshots.csv");
    let diag_path = cfg.out_dir.join("diagnostics.csv");
    let mut written = Vec::new();
    if cfg.wants(Format::Csv) {
        write_csv(&snap_path, &["t", "y", "n", "sqrt_t_n"], snap_rows)?;
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&diag_path, &header, diag_rows)?;
        written.push(snap_path);
        written.push(diag_path);
    }
    if cfg.wants(Format::Svg) {
        let plot = LinePlot {
            title: format!("sqrt(t) n(t, y), {}", cfg.profile),
            x_label: "y = ln x".into(),
            y_label: "sqrt(t) n(t, y)".into(),
            series: curves,
        };
        let path = cfg.out_dir.join("snapshots.svg");
        write_file(&path, &plot.to_svg())?;
        written.push(path);
    }

    let m0 = traj.initial().mass();
    let drift = traj
        .diagnostics()
        .iter()
        .map(|d| ((d.mass - m0) / m0).abs())
        .fold(0.0, f64::max);
    let last = traj.diagnostics().last().expect("initial diagnostics");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "solved to t = {} on {} nodes (dy = {:.6e}), {} steps",
        cfg.t_end,
        traj.initial().len(),
        traj.initial().dy(),
        traj.diagnostics().len() - 1
    );
    let _ = writeln!(out, "mass {:.12e}, max relative drift {drift:.3e}", last.mass);
    let _ = writeln!(out, "argmax of n at t = {}: y = {:.6}", last.t, last.argmax_y);
    for p in written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(out)
}
