use std::fmt::Write as _;

use growfrag::analysis::{compare_methods, estimate_period, weak_test, LineProbe, PeriodOutcome, RowStatus};
use growfrag::mellin::{asymp_v_poisson, AsympTruncation};
use growfrag::series::eval_v;
use growfrag::{DensitySource, Truncation};

use crate::config::{Format, RunConfig};
use crate::output::{create_dir, csv_string, sci, write_file};
use crate::{CliError, Result};

use super::compare::options;
use super::run_solver;

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

/// Report text plus the error to exit with when a check failed.
pub struct Analysis {
    pub text: String,
    pub failure: Option<CliError>,
}

/// Period, weak-convergence, route-agreement and asymptotic checks against
/// the thresholds in `[checks]`; the failure names every violated check.
pub fn analyze(cfg: &RunConfig) -> Result<Analysis> {
    let rays = cfg.ray_slopes();
    let traj = run_solver(cfg, vec![cfg.t_end], &rays)?;
    let c = &cfg.checks;
    let mut checks = Vec::new();
    let mut period_rows = Vec::new();

    let m0 = traj.mass();
    let drift = traj
        .diagnostics()
        .iter()
        .map(|d| ((d.mass - m0) / m0).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "mass".into(),
        pass: drift <= c.mass_tol,
        detail: format!("max relative drift {drift:.3e} (tolerance {:e})", c.mass_tol),
    });

    let from = cfg.period_window_start();
    for &y in &rays {
        let probe = LineProbe::from_trajectory(&traj, y, from, cfg.t_end)?;
        let want = probe.expected_period();
        let name = format!("period(y={y})");
        let (estimate, amplitude, pass, detail) = match estimate_period(&probe) {
            Ok(PeriodOutcome::Periodic(e)) => {
                let rel = ((e.period - want) / want).abs();
                (
                    sci(e.period),
                    sci(e.amplitude),
                    rel <= c.period_tol,
                    format!("{:.6} vs {want:.6}, relative error {rel:.2e}", e.period),
                )
            }
            Ok(PeriodOutcome::NoOscillation { amplitude }) => (
                "none".into(),
                sci(amplitude),
                true,
                format!("no oscillation (amplitude {amplitude:.2e})"),
            ),
            Err(e) => ("unavailable".into(), String::new(), true, format!("not estimated: {e}")),
        };
        period_rows.push([sci(y), sci(want), estimate, amplitude]);
        checks.push(Check { name, pass, detail });
    }

    let mut weak_rows = Vec::new();
    if cfg.t_end > 0.0 {
        let t = cfg.t_end;
        let l = cfg.alpha.ln();
        let mass = weak_test(&traj, &|_: f64| 1.0, t)?;
        let cos = weak_test(&traj, &|y: f64| y.cos(), t)?;
        let limit = m0 * (-l).cos();
        let dev = (cos - limit).abs() / m0;
        weak_rows.push(["1".to_string(), sci(t), sci(mass), sci(m0)]);
        weak_rows.push(["cos(y)".to_string(), sci(t), sci(cos), sci(limit)]);
        checks.push(Check {
            name: "weak".into(),
            pass: dev <= c.weak_tol,
            detail: format!("cos pairing {cos:.6} vs limit {limit:.6} at t = {t}, deviation {dev:.2e} of the mass"),
        });
    }

    let params = cfg.params()?;
    let report = compare_methods(&cfg.profile, &params, &cfg.compare_t, &cfg.compare_x, &options(cfg, None));
    let exceeded: Vec<_> = report.rows.iter().filter(|r| r.status == RowStatus::Exceeds).collect();
    checks.push(Check {
        name: "routes".into(),
        pass: exceeded.is_empty(),
        detail: format!(
            "{} comparisons, {} over tolerance, {} unavailable",
            report.rows.len(),
            exceeded.len(),
            report.rows.iter().filter(|r| matches!(r.status, RowStatus::Unavailable(_))).count()
        ),
    });

    if !c.asymp_times.is_empty() && !cfg.profile.is_dirac() {
        let tr = Truncation::default();
        let errs = c
            .asymp_times
            .iter()
            .map(|&t| {
                let x = cfg.alpha.powf(-t);
                let s = eval_v(&cfg.profile, cfg.alpha, t, x, &tr)?;
                let a = asymp_v_poisson(&cfg.profile, cfg.alpha, t, x, &AsympTruncation::auto(&cfg.profile, cfg.alpha, t, x)?)?;
                Ok(((a - s) / s).abs())
            })
            .collect::<Result<Vec<f64>, growfrag::Error>>()?;
        let last = *errs.last().expect("non-empty");
        let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
        let listed: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
        checks.push(Check {
            name: "asymptotics".into(),
            pass: last <= c.asymp_tol && monotone,
            detail: format!(
                "relative error on x = alpha^-t: [{}], last {last:.3e} (tolerance {:e}), non-increasing: {monotone}",
                listed.join(", "),
                c.asymp_tol
            ),
        });
    }

    let mut out = String::new();
    let _ = writeln!(out, "{}: alpha = {}, t_end = {}, window [{from}, {}]", cfg.profile, cfg.alpha, cfg.t_end, cfg.t_end);
    for ch in &checks {
        let _ = writeln!(out, "{:<5} {:<28} {}", if ch.pass { "ok" } else { "FAIL" }, ch.name, ch.detail);
    }
    out.push_str(&report.summary());
    if cfg.wants(Format::Csv) {
        create_dir(&cfg.out_dir)?;
        let files = [
            ("analysis_periods.csv", csv_string(&["y", "expected_period", "estimated_period", "amplitude"], period_rows)?),
            ("analysis_weak.csv", csv_string(&["test_function", "t", "pairing", "limit"], weak_rows)?),
            ("comparison.csv", report.to_csv()),
        ];
        for (name, body) in files {
            let path = cfg.out_dir.join(name);
            write_file(&path, &body)?;
            let _ = writeln!(out, "wrote {}", path.display());
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    Ok(Analysis {
        text: out,
        failure: (!failed.is_empty()).then(|| CliError::Check(failed.join(", "))),
    })
}
