use growfrag::analysis::{r_of, weak_test, SeriesSource};
use growfrag::mellin::{inverse_mellin_v, ContourQuad};
use growfrag::pde::{auto_y_range, build_grid, solve_n, SolveOptions};
use growfrag::series::{eval_n, eval_u, eval_u_direct, eval_v};
use growfrag::{Params, Profile, Truncation};

const LN2: f64 = std::f64::consts::LN_2;

fn max_norm_gap(p: &Profile, t_end: f64, times: &[f64]) -> Vec<f64> {
    let (lo, hi) = auto_y_range(p, 2.0, t_end, &[]);
    let grid = build_grid(p, 2.0, lo, hi, 64).unwrap();
    let traj = solve_n(&grid, &SolveOptions::new(t_end).snapshots(times.to_vec())).unwrap();
    let tr = Truncation::default();
    times
        .iter()
        .map(|&t| {
            let snap = traj.grid_at(t).unwrap();
            snap.nodes()
                .map(|(y, n)| (n - eval_n(p, 2.0, t, y, &tr).unwrap()).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn grid_and_series_agree_for_both_smooth_and_step_profiles() {
    let times = [1.0, 5.0, 10.0, 20.0];
    for p in [
        Profile::log_gaussian(0.0, 0.1, 1.0).unwrap(),
        Profile::log_heaviside(-0.2, 0.0, 1.0).unwrap(),
    ] {
        for (t, gap) in times.iter().zip(max_norm_gap(&p, 20.0, &times)) {
            assert!(gap < 1e-7, "{p} t={t}: {gap:e}");
        }
    }
}

#[test]
fn grid_run_conserves_and_stays_positive() {
    let p = Profile::log_heaviside(-0.2, 0.0, 1.0).unwrap();
    let (lo, hi) = auto_y_range(&p, 2.0, 40.0, &[]);
    let grid = build_grid(&p, 2.0, lo, hi, 64).unwrap();
    let m0 = grid.mass();
    let traj = solve_n(&grid, &SolveOptions::new(40.0).dt(0.02).snapshots(vec![40.0])).unwrap();
    for d in traj.diagnostics() {
        assert!((d.mass - m0).abs() < 1e-8 * m0);
        assert!(d.min_value >= -1e-12);
    }
    let snap = traj.grid_at(40.0).unwrap();
    assert!(snap.nodes().filter(|(y, _)| *y > 0.0).all(|(_, n)| n == 0.0));
    let (y, _) = snap.argmax();
    assert!((y + 40.0 * LN2).abs() <= LN2 + 0.2);
}

#[test]
fn three_routes_meet_off_the_grid_nodes() {
    let p = Profile::log_gaussian(0.1, 0.15, 2.0).unwrap();
    let tr = Truncation::default();
    let (lo, hi) = auto_y_range(&p, 3.0, 2.0, &[]);
    let grid = build_grid(&p, 3.0, lo, hi, 128).unwrap();
    let traj = solve_n(&grid, &SolveOptions::new(2.0).dt(0.005).snapshots(vec![2.0])).unwrap();
    for x in [0.05, 0.3, 0.9, 1.1] {
        let s = eval_v(&p, 3.0, 2.0, x, &tr).unwrap();
        let cq = ContourQuad::auto(&p, 3.0, 2.0, x, 1.5).unwrap();
        let m = inverse_mellin_v(&p, 3.0, 2.0, x, &cq).unwrap();
        let g = traj.v_from_grid(2.0, x).unwrap().value;
        assert!(((m - s) / s).abs() < 1e-8, "x={x}");
        assert!(((g - s) / s).abs() < 1e-5, "x={x}: grid {g} series {s}");
    }
}

#[test]
fn growth_rescaling_matches_direct_sum() {
    let p = Profile::log_heaviside(-0.5, 0.4, 1.0).unwrap();
    let params = Params::new(0.7, 1.3, 2.5).unwrap();
    let tr = Truncation::default();
    for t in [0.3, 1.0, 4.0] {
        for x in [0.02, 0.4, 1.7, 3.0] {
            let a = eval_u(&params, &p, t, x, &tr).unwrap();
            let b = eval_u_direct(&params, &p, t, x, &tr).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "t={t} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn rescaled_mass_and_identity_hold_for_the_grid_source() {
    let p = Profile::log_gaussian(0.0, 0.1, 1.0).unwrap();
    let (lo, hi) = auto_y_range(&p, 2.0, 30.0, &[]);
    let grid = build_grid(&p, 2.0, lo, hi, 64).unwrap();
    let traj = solve_n(&grid, &SolveOptions::new(30.0).snapshots(vec![1.0, 15.0, 30.0])).unwrap();
    let src = SeriesSource::new(p, 2.0);
    for t in [1.0, 15.0, 30.0] {
        let m = weak_test(&traj, &|_: f64| 1.0, t).unwrap();
        assert!((m - 1.0).abs() < 1e-6);
        let snap = traj.grid_at(t).unwrap();
        let (y, n) = snap.argmax();
        let r = r_of(&traj, t, y / t).unwrap();
        assert!((r - t * n).abs() <= 1e-10 * r);
        let rs = r_of(&src, t, y / t).unwrap();
        assert!(((r - rs) / rs).abs() < 1e-7);
    }
}
