use std::fmt::Write as _;

use growfrag::analysis::{envelope_width, estimate_period, heaviside_shape, LineProbe, PeriodOutcome};
use growfrag::{Profile, Shape, Solution};

use crate::config::{Format, RunConfig};
use crate::output::{create_dir, sci, write_csv, write_file, LinePlot, Series};
use crate::{CliError, Result};

use super::run_solver;

pub const FIGURE_IDS: std::ops::RangeInclusive<u32> = 1..=11;

const ALPHA: f64 = 2.0;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    /// `f_y(t)` along three rays.
    Probes,
    /// `√t n(t, ·)` at several times.
    Profiles,
}

fn setup(id: u32) -> Option<(Profile, Kind)> {
    let g = |sigma| Profile::log_gaussian(0.0, sigma, 1.0);
    let h = |a| Profile::log_heaviside(a, 0.0, 1.0);
    let (p, kind) = match id {
        1 => (g(0.1), Kind::Probes),
        2 => (g(0.1), Kind::Profiles),
        3 => (g(0.2), Kind::Probes),
        4 => (g(0.2), Kind::Profiles),
        5 => (g(0.5), Kind::Profiles),
        6 => (h(-0.2), Kind::Probes),
        7 => (h(-0.2), Kind::Profiles),
        8 => (h(-1.0), Kind::Probes),
        9 => (h(-1.0), Kind::Profiles),
        10 => (h(-5.0), Kind::Probes),
        11 => (h(-5.0), Kind::Profiles),
        _ => return None,
    };
    Some((p.expect("valid figure profile"), kind))
}

/// Probe samples at which the ray crosses a grid node exactly, so no
/// interpolation enters the plotted values.
fn node_aligned(probe: &LineProbe<f64>, dy: f64) -> Result<LineProbe<f64>> {
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for (&t, &v) in probe.times().iter().zip(probe.values()) {
        let s = probe.y() * t / dy;
        if (s - s.round()).abs() < 1e-6 {
            ts.push(t);
            vs.push(v);
        }
    }
    Ok(LineProbe::new(probe.y(), probe.alpha(), ts, vs)?)
}

fn describe(outcome: &PeriodOutcome<f64>) -> String {
    match outcome {
        PeriodOutcome::Periodic(e) => sci(e.period),
        PeriodOutcome::NoOscillation { .. } => "none".into(),
    }
}

fn period_rows(traj: &Solution, rays: &[f64], from: f64, to: f64, dy: f64) -> Result<Vec<[String; 2]>> {
    let mut rows = Vec::new();
    for &y in rays {
        let probe = node_aligned(&LineProbe::from_trajectory(traj, y, from, to)?, dy)?;
        let tag = sci(y);
        rows.push([format!("expected_period_y={tag}"), sci(probe.expected_period())]);
        match estimate_period(&probe) {
            Ok(outcome) => {
                rows.push([format!("period_y={tag}"), describe(&outcome)]);
                rows.push([format!("amplitude_y={tag}"), sci(outcome.amplitude())]);
            }
            Err(e) => rows.push([format!("period_y={tag}"), format!("unavailable: {e}")]),
        }
    }
    Ok(rows)
}

/// Regenerate one figure: `figureN.csv` holds the plotted quantity,
/// `figureN_summary.csv` the derived numbers and `figureN.svg` the plot.
pub fn figures(cfg: &RunConfig, id: u32) -> Result<String> {
    let (profile, kind) = setup(id).ok_or_else(|| {
        CliError::Config(format!("unknown figure id {id} (expected {}..={})", FIGURE_IDS.start(), FIGURE_IDS.end()))
    })?;
    let t_end = cfg.t_end;
    let mut run = cfg.clone();
    run.alpha = ALPHA;
    run.g = 0.0;
    run.b = 1.0;
    run.profile = profile;
    run.y_min = None;
    run.y_max = None;
    // every ray -c ln α with 2c ∈ ℕ meets a node at each multiple of 1/(2cm)
    run.dt = 1.0 / (2.0 * cfg.m as f64);
    let l = ALPHA.ln();
    let rays = match kind {
        Kind::Probes => vec![-2.0 * l, -l, -0.5 * l],
        Kind::Profiles => vec![-l],
    };
    let snaps: Vec<f64> = match kind {
        Kind::Probes => vec![t_end],
        Kind::Profiles => (1..=6).map(|k| t_end * k as f64 / 6.0).collect(),
    };
    run.snapshots = Some(snaps.clone());
    run.validate()?;
    let traj = run_solver(&run, snaps.clone(), &rays)?;
    let dy = traj.initial().dy();
    let window = (t_end / 3.0, t_end);
    let mut summary = period_rows(&traj, &rays, window.0, window.1, dy)?;

    let mut data = Vec::new();
    let mut series = Vec::new();
    let (header, title, x_label, y_label): (&[&str], String, &str, &str) = match kind {
        Kind::Probes => {
            for &y in &rays {
                let probe = node_aligned(&LineProbe::from_trajectory(&traj, y, 1.0_f64.min(t_end), t_end)?, dy)?;
                let mut points = Vec::with_capacity(probe.times().len());
                for (&t, &f) in probe.times().iter().zip(probe.values()) {
                    data.push([sci(y), sci(t), sci(f)]);
                    points.push((t, f));
                }
                series.push(Series {
                    label: format!("y = {:.4}", y),
                    points,
                });
            }
            (
                &["y", "t", "f_y"],
                format!("figure {id}: sqrt(t) exp(-Psi(y) t) n(t, y t), {profile}"),
                "t",
                "f_y(t)",
            )
        }
        Kind::Profiles => {
            let (lo, hi) = profile.support_y();
            let y_lo = lo - (t_end + 6.0 * t_end.sqrt()) * l;
            let mut widths = Vec::new();
            for (t, grid) in traj.snapshots() {
                let st = t.sqrt();
                let mut points = Vec::new();
                for (y, n) in grid.nodes().filter(|(y, _)| *y >= y_lo && *y <= hi) {
                    data.push([sci(t), sci(y), sci(st * n)]);
                    points.push((y, st * n));
                }
                series.push(Series {
                    label: format!("t = {t}"),
                    points,
                });
                let w = envelope_width(&grid);
                summary.push([format!("envelope_width_t={}", sci(t)), sci(w)]);
                widths.push(w);
            }
            summary.push(["envelope_width_ratio_4t_over_t".into(), sci(widths[3] / widths[0])]);
            if let Shape::LogHeaviside { .. } = profile.shape() {
                let grid = traj.grid_at(t_end)?;
                let half = 3.0 * l * t_end.sqrt();
                let c = -t_end * l;
                let shape = heaviside_shape(&grid, &profile, c - half, c + half)?;
                summary.push(["keeps_heaviside_shape".into(), shape.keeps_shape().to_string()]);
            }
            (
                &["t", "y", "sqrt_t_n"],
                format!("figure {id}: sqrt(t) n(t, y), {profile}"),
                "y = ln x",
                "sqrt(t) n(t, y)",
            )
        }
    };

    create_dir(&cfg.out_dir)?;
    let mut out = String::new();
    let _ = writeln!(out, "figure {id}: {profile}, alpha = {ALPHA}, t_end = {t_end}");
    for [k, v] in &summary {
        let _ = writeln!(out, "  {k} = {v}");
    }
    if cfg.wants(Format::Csv) {
        let path = cfg.out_dir.join(format!("figure{id}.csv"));
        write_csv(&path, header, data)?;
        let _ = writeln!(out, "wrote {}", path.display());
        let path = cfg.out_dir.join(format!("figure{id}_summary.csv"));
        write_csv(&path, &["quantity", "value"], summary)?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    if cfg.wants(Format::Svg) {
        let plot = LinePlot {
            title,
            x_label: x_label.into(),
            y_label: y_label.into(),
            series,
        };
        let path = cfg.out_dir.join(format!("figure{id}.svg"));
        write_file(&path, &plot.to_svg())?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out)
}
