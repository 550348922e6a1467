use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mellin::{asymp_v_poisson, asymp_v_theta, inverse_mellin_v, AsympTruncation, ContourQuad};
use crate::num::Real;
use crate::params::ModelParams;
use crate::pde::{auto_y_range, build_grid, solve_n, SolveOptions, Trajectory, DEFAULT_CELLS_PER_LOG_ALPHA, DEFAULT_DT};
use crate::profile::InitialProfile;
use crate::series::{eval_u, SeriesTruncation};

/// The evaluation routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Series,
    Pde,
    Mellin,
    AsympTheta,
    AsympPoisson,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Series,
        Method::Pde,
        Method::Mellin,
        Method::AsympTheta,
        Method::AsympPoisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Pde => "pde",
            Method::Mellin => "mellin",
            Method::AsympTheta => "asymp-theta",
            Method::AsympPoisson => "asymp-poisson",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

/// Relative-error thresholds against the series route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub pde: f64,
    pub mellin: f64,
    /// Asymptotic forms are only accurate near the concentration ray, so
    /// they are not flagged by default.
    pub asymptotic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pde: 1e-7,
            mellin: 1e-6,
            asymptotic: f64::INFINITY,
        }
    }
}

impl Tolerances {
    fn of(&self, m: Method) -> f64 {
        match m {
            Method::Series => 0.0,
            Method::Pde => self.pde,
            Method::Mellin => self.mellin,
            Method::AsympTheta | Method::AsympPoisson => self.asymptotic,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Ok,
    Exceeds,
    /// The route could not evaluate this point.
    Unavailable(String),
}

/// One point compared between the series route and another route.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub method_a: Method,
    pub method_b: Method,
    pub t: f64,
    /// For the grid route, `x` is moved to the nearest grid node.
    pub x: f64,
    pub val_a: f64,
    pub val_b: f64,
    pub rel_err: f64,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

impl ComparisonReport {
    pub fn flagged(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.status != RowStatus::Ok)
    }

    /// Largest relative error of one pair among evaluated rows.
    pub fn max_rel_err(&self, method_b: Method) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.method_b == method_b && !matches!(r.status, RowStatus::Unavailable(_)))
            .map(|r| r.rel_err)
            .reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method_a,method_b,t,x,val_a,val_b,rel_err\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.method_a,
                r.method_b,
                sci(r.t),
                sci(r.x),
                sci(r.val_a),
                sci(r.val_b),
                sci(r.rel_err)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.method_b) {
                seen.push(r.method_b);
            }
        }
        for m in seen {
            let rows: Vec<_> = self.rows.iter().filter(|r| r.method_b == m).collect();
            let unavailable = rows.iter().filter(|r| matches!(r.status, RowStatus::Unavailable(_))).count();
            let exceeds = rows.iter().filter(|r| r.status == RowStatus::Exceeds).count();
            let worst = self.max_rel_err(m).map_or("-".to_string(), |e| format!("{e:.3e}"));
            let _ = writeln!(
                out,
                "series vs {m:<13} points {:>4}  max rel err {worst:>10}  over tolerance {exceeds}  unavailable {unavailable}",
                rows.len()
            );
        }
        for r in self.flagged() {
            let what = match &r.status {
                RowStatus::Unavailable(why) => format!("unavailable: {why}"),
                _ => format!("rel err {:.3e}", r.rel_err),
            };
            let _ = writeln!(out, "  flagged {} t={} x={}: {what}", r.method_b, r.t, r.x);
        }
        out
    }
}

/// Resolution of the grid route inside [`compare_methods`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompareOptions {
    pub methods: Vec<Method>,
    pub tolerances: Tolerances,
    pub cells_per_log_alpha: usize,
    pub dt: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            methods: vec![Method::Pde, Method::Mellin, Method::AsympTheta, Method::AsympPoisson],
            tolerances: Tolerances::default(),
            cells_per_log_alpha: DEFAULT_CELLS_PER_LOG_ALPHA,
            dt: DEFAULT_DT,
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a == 0.0 {
        f64::INFINITY
    } else {
        ((a - b) / a).abs()
    }
}

/// Evaluate every `(t, x)` by the series route and by each requested route,
/// in growth-fragmentation coordinates. Routes other than the series work on
/// `v` and are mapped through `u(t, x) = e^{-gt} v(bt, x e^{-gt})`.
pub fn compare_methods<T: Real>(
    p: &InitialProfile<T>,
    params: &ModelParams<T>,
    t_list: &[T],
    x_list: &[T],
    opts: &CompareOptions,
) -> ComparisonReport {
    let (g, b, alpha) = (params.g(), params.b(), params.alpha());
    let trunc = SeriesTruncation::default();
    let series = |t: T, x: T| eval_u(params, p, t, x, &trunc).map(|v| v.as_f64());
    let trajectory = if opts.methods.contains(&Method::Pde) {
        Some(solve_for(p, alpha, b, t_list, opts))
    } else {
        None
    };

    let mut rows = Vec::new();
    for &t in t_list {
        let tau = b * t;
        let shrink = (-g * t).exp();
        for &x in x_list {
            for &m in &opts.methods {
                if m == Method::Series {
                    continue;
                }
                let mut x_used = x;
                let routed: Result<T> = match m {
                    Method::Series => unreachable!(),
                    Method::Pde => match &trajectory {
                        Some(Ok(traj)) => grid_value(traj, tau, x * shrink).map(|(xi, v)| {
                            x_used = xi / shrink;
                            v
                        }),
                        Some(Err(e)) => Err(e.clone()),
                        None => unreachable!(),
                    },
                    Method::Mellin => ContourQuad::auto(p, alpha, tau, x * shrink, T::lit(2.0))
                        .and_then(|cq| inverse_mellin_v(p, alpha, tau, x * shrink, &cq)),
                    Method::AsympTheta => AsympTruncation::auto(p, alpha, tau, x * shrink)
                        .and_then(|tr| asymp_v_theta(p, alpha, tau, x * shrink, &tr)),
                    Method::AsympPoisson => AsympTruncation::auto(p, alpha, tau, x * shrink)
                        .and_then(|tr| asymp_v_poisson(p, alpha, tau, x * shrink, &tr)),
                };
                let reference = series(t, x_used);
                let row = match (reference, routed) {
                    (Ok(a), Ok(v)) => {
                        let bval = (shrink * v).as_f64();
                        let e = rel_err(a, bval);
                        let status = if e <= opts.tolerances.of(m) {
                            RowStatus::Ok
                        } else {
                            RowStatus::Exceeds
                        };
                        (a, bval, e, status)
                    }
                    (a, v) => {
                        let why = match (&a, &v) {
                            (Err(e), _) | (_, Err(e)) => e.to_string(),
                            _ => unreachable!(),
                        };
                        (a.unwrap_or(f64::NAN), f64::NAN, f64::NAN, RowStatus::Unavailable(why))
                    }
                };
                rows.push(ComparisonRow {
                    method_a: Method::Series,
                    method_b: m,
                    t: t.as_f64(),
                    x: x_used.as_f64(),
                    val_a: row.0,
                    val_b: row.1,
                    rel_err: row.2,
                    status: row.3,
                });
            }
        }
    }
    ComparisonReport { rows }
}

fn solve_for<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    b: T,
    t_list: &[T],
    opts: &CompareOptions,
) -> Result<Trajectory<T>> {
    let taus: Vec<T> = t_list.iter().map(|&t| b * t).collect();
    let t_end = taus.iter().copied().fold(T::zero(), T::max);
    let (lo, hi) = auto_y_range(p, alpha, t_end, &[]);
    let grid = build_grid(p, alpha, lo, hi, opts.cells_per_log_alpha)?;
    solve_n(&grid, &SolveOptions::new(t_end).dt(T::lit(opts.dt)).snapshots(taus))
}

/// `v` at the grid node nearest to `ln x`, with that node's size.
fn grid_value<T: Real>(traj: &Trajectory<T>, t: T, x: T) -> Result<(T, T)> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("size must be > 0, got {x}")));
    }
    let grid = traj.grid_at(t)?;
    let y = x.ln();
    if y > grid.y_max() {
        return Ok((x, T::zero()));
    }
    if y < grid.y_min() {
        return Err(Error::WindowMissesMass(format!("ln x = {y} lies below the grid")));
    }
    let i = ((y - grid.y_min()) / grid.dy()).round().as_f64() as usize;
    let i = i.min(grid.len() - 1);
    let yi = grid.y(i);
    Ok((yi.exp(), grid.values()[i] * (-(yi + yi)).exp()))
}
