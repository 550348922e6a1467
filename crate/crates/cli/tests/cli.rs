use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn growfrag(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_growfrag"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn summary(path: &Path) -> Vec<(String, String)> {
    csv_rows(path).into_iter().map(|r| (r[0].clone(), r[1].clone())).collect()
}

fn lookup<'a>(s: &'a [(String, String)], key: &str) -> &'a str {
    &s.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("missing {key}")).1
}

#[test]
fn evaluate_series_at_time_zero_is_initial_density() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["evaluate", "--method", "series", "--t", "0", "--x", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let v: f64 = row[2].parse().unwrap();
    assert!((v - 3.989_422_804_014_327).abs() < 1e-12, "{v}");
}

#[test]
fn evaluate_series_and_mellin_agree() {
    let d = TempDir::new().unwrap();
    let args = |m| vec!["evaluate", "--method", m, "--t", "0.5,2,7", "--x", "0.3,0.9,1.4"];
    let a = stdout(&growfrag(d.path(), &args("series")));
    let b = stdout(&growfrag(d.path(), &args("mellin")));
    for (la, lb) in a.lines().skip(1).zip(b.lines().skip(1)) {
        let va: f64 = la.split(',').nth(2).unwrap().parse().unwrap();
        let vb: f64 = lb.split(',').nth(2).unwrap().parse().unwrap();
        assert!((va - vb).abs() <= 1e-6 * va.abs().max(1e-300), "{la} vs {lb}");
    }
}

#[test]
fn mellin_on_heaviside_is_a_domain_error() {
    let d = TempDir::new().unwrap();
    let o = growfrag(
        d.path(),
        &["evaluate", "--method", "mellin", "--profile", "logheaviside a=-1 b=0 height=1", "--t", "1", "--x", "0.5"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("decays too slowly"));
}

#[test]
fn unknown_figure_is_rejected() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["figures", "--id", "99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_key_is_rejected() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("lab.ini"), "[model]\nbeta = 2\n").unwrap();
    let o = growfrag(d.path(), &["--config", "lab.ini", "solve"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn truncated_grid_reports_mass_leak() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["solve", "--y-min", "-5", "--t-end", "20"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("mass leak"));
}

#[test]
fn solve_to_time_zero_writes_initial_snapshot_only() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["solve", "--t-end", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&d.path().join("out/snapshots.csv"));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[0].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn default_solve_conserves_mass() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&d.path().join("out/diagnostics.csv"));
    let m0: f64 = rows[0][1].parse().unwrap();
    for r in &rows {
        let m: f64 = r[1].parse().unwrap();
        assert!((m - m0).abs() <= 1e-6 * m0);
    }
    assert_eq!(rows.last().unwrap()[0].parse::<f64>().unwrap(), 60.0);
}

#[test]
fn outputs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert!(growfrag(d.path(), &["figures", "--id", "1", "--t-end", "30"]).status.success());
    }
    for f in ["figure1.csv", "figure1_summary.csv", "figure1.svg"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn svg_output_is_well_formed() {
    let d = TempDir::new().unwrap();
    assert!(growfrag(d.path(), &["figures", "--id", "7", "--t-end", "30"]).status.success());
    assert!(growfrag(d.path(), &["solve", "--t-end", "10"]).status.success());
    for f in ["figure7.svg", "snapshots.svg"] {
        let text = std::fs::read_to_string(d.path().join("out").join(f)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(doc.descendants().any(|n| n.has_tag_name("polyline")));
    }
}

#[test]
fn csv_only_format_skips_svg() {
    let d = TempDir::new().unwrap();
    assert!(growfrag(d.path(), &["solve", "--t-end", "1", "--formats", "csv"]).status.success());
    assert!(d.path().join("out/snapshots.csv").exists());
    assert!(!d.path().join("out/snapshots.svg").exists());
}

#[test]
fn figure_one_recovers_three_periods() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["figures", "--id", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = summary(&d.path().join("out/figure1_summary.csv"));
    let periods: Vec<f64> = s
        .iter()
        .filter(|(k, _)| k.starts_with("period_"))
        .map(|(_, v)| v.parse().unwrap())
        .collect();
    assert_eq!(periods.len(), 3);
    for (p, want) in periods.iter().zip([0.5, 1.0, 2.0]) {
        assert!((p - want).abs() <= 0.02 * want, "{p} vs {want}");
    }
}

#[test]
fn wide_gaussian_shows_no_oscillation() {
    let d = TempDir::new().unwrap();
    assert!(growfrag(d.path(), &["figures", "--id", "5"]).status.success());
    let s = summary(&d.path().join("out/figure5_summary.csv"));
    let (_, v) = s.iter().find(|(k, _)| k.starts_with("period_")).unwrap();
    assert_eq!(v, "none");
}

#[test]
fn envelope_width_grows_like_sqrt_t() {
    let d = TempDir::new().unwrap();
    assert!(growfrag(d.path(), &["figures", "--id", "2"]).status.success());
    let s = summary(&d.path().join("out/figure2_summary.csv"));
    let ratio: f64 = lookup(&s, "envelope_width_ratio_4t_over_t").parse().unwrap();
    assert!((ratio - 2.0).abs() <= 0.1, "{ratio}");
}

#[test]
fn heaviside_profile_keeps_step_shape() {
    let d = TempDir::new().unwrap();
    assert!(growfrag(d.path(), &["figures", "--id", "9"]).status.success());
    let s = summary(&d.path().join("out/figure9_summary.csv"));
    assert_eq!(lookup(&s, "keeps_heaviside_shape"), "true");
}

#[test]
fn analyze_passes_on_defaults_and_recovers_unit_period() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["analyze", "--probe-y", "-0.6931"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let rows = csv_rows(&d.path().join("out/analysis_periods.csv"));
    let p: f64 = rows[0][2].parse().unwrap();
    assert!((p - 1.0).abs() < 0.02, "{p}");
}

#[test]
fn analyze_fails_on_impossible_tolerance() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["analyze", "--set", "checks.asymp_tol=1e-12"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("asymptotics"));
}

#[test]
fn compare_writes_all_pairs() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["compare", "--methods", "pde,mellin"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&d.path().join("out/comparison.csv"));
    assert_eq!(rows.len(), 2 * 2 * 3);
    for r in rows {
        let e: f64 = r[6].parse().unwrap();
        assert!(e < 1e-6, "{r:?}");
    }
}

#[test]
fn growth_parameters_rejected_by_solver() {
    let d = TempDir::new().unwrap();
    let o = growfrag(d.path(), &["solve", "--g", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let e = growfrag(d.path(), &["evaluate", "--method", "series", "--g", "0.5", "--b", "2", "--t", "1", "--x", "1"]);
    assert!(e.status.success());
}
