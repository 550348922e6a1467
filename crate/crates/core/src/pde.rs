//! Method-of-lines solver for the log-size equation
//!
//! ```text
//! ∂t n(t, y) + n(t, y) = n(t, y + ln α)
//! ```
//!
//! on a uniform grid whose spacing is `ln α / m`, so the nonlocal term is an
//! exact offset of `m` nodes. Nodes to the right of the grid are zero, which
//! is exact once the grid covers the initial support since mass only ever
//! moves to smaller sizes. Time stepping is classical explicit RK4.

use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};
use crate::profile::InitialProfile;

/// Largest accepted RK4 step; keeps the scheme positivity-preserving.
pub const DT_CAP: f64 = 0.5;
/// Default number of cells per `ln α`.
pub const DEFAULT_CELLS_PER_LOG_ALPHA: usize = 64;
/// Default RK4 step.
pub const DEFAULT_DT: f64 = 0.01;

/// Values of `n` on the nodes `y_i = (first + i) · dy`, `dy = ln α / m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogGrid<T> {
    alpha: T,
    m: usize,
    dy: T,
    first: i64,
    values: Vec<T>,
}

/// Sample `n0 = e^{2y} u0(e^y)` on a grid covering `[y_min, y_max]`.
pub fn build_grid<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    y_min: T,
    y_max: T,
    m: usize,
) -> Result<LogGrid<T>> {
    if p.is_dirac() {
        return Err(Error::NoPointwiseDensity);
    }
    if !(alpha > T::one()) {
        return Err(Error::invalid("alpha", "must be > 1"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "need at least one cell per ln(alpha)"));
    }
    if !(y_min < y_max) || !y_min.is_finite() || !y_max.is_finite() {
        return Err(Error::invalid("y_min,y_max", format!("need y_min < y_max, got [{y_min}, {y_max}]")));
    }
    let (_, hi) = p.support_y();
    // rounding in the support edge (e.g. μ + 12σ) is not a real shortfall
    if y_max < hi - T::lit(1e-9) * hi.abs().max(T::one()) {
        return Err(Error::GridTooSmall {
            y_max: y_max.as_f64(),
            support_edge: hi.as_f64(),
        });
    }
    let dy = alpha.ln() / T::of_usize(m);
    let first = (y_min / dy).floor().as_f64() as i64;
    let last = (y_max / dy).ceil().as_f64() as i64;
    let len = (last - first + 1) as usize;
    let values = (0..len)
        .map(|i| p.eval_y(T::lit((first + i as i64) as f64) * dy))
        .collect::<Result<Vec<_>>>()?;
    Ok(LogGrid {
        alpha,
        m,
        dy,
        first,
        values,
    })
}

/// Grid bounds for a run to `t_end`: the right edge at the profile support and
/// the left edge far enough that neither the bulk of the mass (Poisson tail in
/// the number of divisions) nor any tracked ray reaches it.
pub fn auto_y_range<T: Real>(p: &InitialProfile<T>, alpha: T, t_end: T, rays: &[T]) -> (T, T) {
    let (lo, hi) = p.support_y();
    let l = alpha.ln();
    let generations = t_end + T::lit(12.0) * t_end.sqrt() + T::lit(30.0);
    let mut y_min = lo - generations * l;
    for &r in rays {
        y_min = y_min.min(lo + r * t_end - T::lit(5.0) * l);
    }
    (y_min, hi)
}

impl<T: Real> LogGrid<T> {
    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn dy(&self) -> T {
        self.dy
    }

    /// Cells per `ln α`; also the index offset of the nonlocal term.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn y(&self, i: usize) -> T {
        T::lit((self.first + i as i64) as f64) * self.dy
    }

    pub fn y_min(&self) -> T {
        self.y(0)
    }

    pub fn y_max(&self) -> T {
        self.y(self.len() - 1)
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values.iter().enumerate().map(|(i, &n)| (self.y(i), n))
    }

    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            alpha: self.alpha,
            m: self.m,
            dy: self.dy,
            first: self.first,
            values,
        }
    }

    /// `∫ n dy` as `dy Σ n_i`. This is the quantity the scheme conserves
    /// exactly and coincides with the trapezoid rule when the end nodes vanish.
    pub fn mass(&self) -> T {
        let acc: CompensatedSum<T> = self.values.iter().copied().collect();
        acc.value() * self.dy
    }

    /// `∫ w(y) n(y) dy` as `dy Σ w(y_i) n_i`.
    pub fn pair<F: Fn(T) -> T>(&self, w: F) -> T {
        let mut acc = CompensatedSum::new();
        for (i, &v) in self.values.iter().enumerate() {
            if v != T::zero() {
                acc.add(v * w(self.y(i)));
            }
        }
        acc.value() * self.dy
    }

    /// Node of the largest value.
    pub fn argmax(&self) -> (T, T) {
        let mut best = (0, T::neg_infinity());
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        (self.y(best.0), best.1)
    }

    /// Cubic (four-point Lagrange) interpolation of `n` at `y`. Returns zero
    /// above the grid (exact) and zero with the flag set below it.
    pub fn interpolate(&self, y: T) -> GridValue<T> {
        let n = self.len();
        if y > self.y_max() {
            return GridValue::exact(T::zero());
        }
        if y < self.y_min() {
            return GridValue {
                value: T::zero(),
                extrapolated: true,
            };
        }
        let s = y / self.dy - T::lit(self.first as f64);
        let i = (s.floor().as_f64() as usize).min(n - 1);
        let frac = s - T::of_usize(i);
        if frac == T::zero() || n < 4 {
            // on a node, or too few nodes for a cubic stencil
            let j = if frac > T::lit(0.5) { (i + 1).min(n - 1) } else { i };
            if frac == T::zero() || n == 1 {
                return GridValue::exact(self.values[j]);
            }
            let (a, b) = (self.values[i], self.values[(i + 1).min(n - 1)]);
            return GridValue::exact(a + (b - a) * frac);
        }
        let base = i.saturating_sub(1).min(n - 4);
        let x = s - T::of_usize(base);
        let f = |k: usize| self.values[base + k];
        let (one, two, three, six) = (T::one(), T::lit(2.0), T::lit(3.0), T::lit(6.0));
        let l0 = -(x - one) * (x - two) * (x - three) / six;
        let l1 = x * (x - two) * (x - three) / two;
        let l2 = -x * (x - one) * (x - three) / two;
        let l3 = x * (x - one) * (x - two) / six;
        GridValue::exact(l0 * f(0) + l1 * f(1) + l2 * f(2) + l3 * f(3))
    }
}

/// Interpolated grid value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridValue<T> {
    pub value: T,
    /// Set when the query fell below the grid and zero was substituted.
    pub extrapolated: bool,
}

impl<T> GridValue<T> {
    fn exact(value: T) -> Self {
        Self {
            value,
            extrapolated: false,
        }
    }
}

/// Work buffers for RK4 on the shift-coupled system `dn_i/dt = -n_i + n_{i+m}`.
struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    stage: Vec<T>,
}

impl<T: Real> Rk4<T> {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![T::zero(); len],
            k2: vec![T::zero(); len],
            k3: vec![T::zero(); len],
            k4: vec![T::zero(); len],
            stage: vec![T::zero(); len],
        }
    }

    #[inline]
    fn rhs(n: &[T], m: usize, out: &mut [T]) {
        let len = n.len();
        let split = len.saturating_sub(m);
        for i in 0..split {
            out[i] = n[i + m] - n[i];
        }
        for i in split..len {
            out[i] = -n[i];
        }
    }

    fn step(&mut self, n: &mut [T], m: usize, h: T) {
        let half = h / T::lit(2.0);
        Self::rhs(n, m, &mut self.k1);
        for ((s, &x), &k) in self.stage.iter_mut().zip(n.iter()).zip(&self.k1) {
            *s = x + half * k;
        }
        Self::rhs(&self.stage, m, &mut self.k2);
        for ((s, &x), &k) in self.stage.iter_mut().zip(n.iter()).zip(&self.k2) {
            *s = x + half * k;
        }
        Self::rhs(&self.stage, m, &mut self.k3);
        for ((s, &x), &k) in self.stage.iter_mut().zip(n.iter()).zip(&self.k3) {
            *s = x + h * k;
        }
        Self::rhs(&self.stage, m, &mut self.k4);
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        for (i, x) in n.iter_mut().enumerate() {
            *x += sixth * (self.k1[i] + two * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

fn check_dt<T: Real>(dt: T) -> Result<()> {
    if !(dt > T::zero()) || dt > T::lit(DT_CAP) {
        return Err(Error::invalid("dt", format!("must lie in (0, {DT_CAP}], got {dt}")));
    }
    Ok(())
}

/// One classical RK4 step of size `dt`.
pub fn step<T: Real>(grid: &LogGrid<T>, dt: T) -> Result<LogGrid<T>> {
    check_dt(dt)?;
    let mut values = grid.values.clone();
    Rk4::new(values.len()).step(&mut values, grid.m, dt);
    Ok(grid.with_values(values))
}

/// Run controls for [`solve_n`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions<T> {
    pub t_end: T,
    /// Nominal step; each interval between output times is split evenly.
    pub dt: T,
    /// Times at which full snapshots are kept. Empty means `t_end` only.
    pub snapshot_times: Vec<T>,
    /// Ray slopes `y` whose values `n(t, y t)` are recorded after every step.
    pub rays: Vec<T>,
    /// Leak monitor: the run fails once any of the leftmost
    /// `leak_nodes` values exceeds `leak_tolerance` times the initial mass.
    pub leak_tolerance: T,
    pub leak_nodes: usize,
}

impl<T: Real> SolveOptions<T> {
    pub fn new(t_end: T) -> Self {
        Self {
            t_end,
            dt: T::lit(DEFAULT_DT),
            snapshot_times: Vec::new(),
            rays: Vec::new(),
            leak_tolerance: T::lit(1e-12),
            leak_nodes: 10,
        }
    }

    pub fn dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn snapshots(mut self, times: Vec<T>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn rays(mut self, rays: Vec<T>) -> Self {
        self.rays = rays;
        self
    }
}

/// Scalar diagnostics recorded after every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic<T> {
    pub t: T,
    /// `dy Σ n_i`, see [`LogGrid::mass`].
    pub mass: T,
    /// Node carrying the maximum of `n`.
    pub argmax_y: T,
    pub min_value: T,
}

/// Output of [`solve_n`].
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    grid: LogGrid<T>,
    times: Vec<T>,
    snapshots: Vec<Vec<T>>,
    diagnostics: Vec<Diagnostic<T>>,
    rays: Vec<T>,
    /// `ray_values[r][j]` is `n(t_j, rays[r] t_j)` at `diagnostics[j].t`.
    ray_values: Vec<Vec<T>>,
}

/// Integrate the grid to `opts.t_end`, landing exactly on every snapshot time.
pub fn solve_n<T: Real>(grid: &LogGrid<T>, opts: &SolveOptions<T>) -> Result<Trajectory<T>> {
    check_dt(opts.dt)?;
    let t_end = opts.t_end;
    if !(t_end >= T::zero()) {
        return Err(Error::invalid("t_end", "must be >= 0"));
    }
    let mut snaps: Vec<T> = if opts.snapshot_times.is_empty() {
        vec![t_end]
    } else {
        opts.snapshot_times.clone()
    };
    if let Some(bad) = snaps.iter().find(|&&s| !(s >= T::zero() && s <= t_end)) {
        return Err(Error::invalid("snapshot_times", format!("{bad} outside [0, {t_end}]")));
    }
    snaps.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    snaps.dedup();

    let mut events = snaps.clone();
    if events.last().is_none_or(|&l| l < t_end) {
        events.push(t_end);
    }

    let m = grid.m;
    let mut values = grid.values.clone();
    let mut rk = Rk4::new(values.len());
    let reference_mass = grid.mass().abs().max(T::min_positive_value());
    let leak_nodes = opts.leak_nodes.min(values.len());

    let mut traj = Trajectory {
        grid: grid.clone(),
        times: Vec::with_capacity(snaps.len()),
        snapshots: Vec::with_capacity(snaps.len()),
        diagnostics: Vec::new(),
        rays: opts.rays.clone(),
        ray_values: vec![Vec::new(); opts.rays.len()],
    };
    let mut snap_iter = snaps.iter().peekable();
    let mut record = |traj: &mut Trajectory<T>, t: T, values: &[T], is_event: bool| {
        let current = traj.grid.with_values(values.to_vec());
        let (argmax_y, _) = current.argmax();
        let min_value = values.iter().copied().fold(T::infinity(), T::min);
        traj.diagnostics.push(Diagnostic {
            t,
            mass: current.mass(),
            argmax_y,
            min_value,
        });
        for (r, &y) in traj.rays.iter().enumerate() {
            traj.ray_values[r].push(current.interpolate(y * t).value);
        }
        if is_event {
            if let Some(&&s) = snap_iter.peek() {
                if s == t {
                    traj.times.push(t);
                    traj.snapshots.push(values.to_vec());
                    snap_iter.next();
                }
            }
        }
    };

    record(&mut traj, T::zero(), &values, true);
    let mut t_start = T::zero();
    for &t_stop in &events {
        let span = t_stop - t_start;
        if span <= T::zero() {
            continue;
        }
        let steps = ((span / opts.dt) - T::lit(1e-9)).ceil().as_f64().max(1.0) as usize;
        let h = span / T::of_usize(steps);
        for j in 1..=steps {
            rk.step(&mut values, m, h);
            let t = if j == steps { t_stop } else { t_start + T::of_usize(j) * h };
            let leak = values[..leak_nodes]
                .iter()
                .copied()
                .fold(T::zero(), |a, b| a.max(b.abs()));
            if leak > opts.leak_tolerance * reference_mass {
                return Err(Error::MassLeak {
                    t: t.as_f64(),
                    value: leak.as_f64(),
                });
            }
            record(&mut traj, t, &values, j == steps);
        }
        t_start = t_stop;
    }
    Ok(traj)
}

impl<T: Real> Trajectory<T> {
    /// Snapshot times, increasing.
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn diagnostics(&self) -> &[Diagnostic<T>] {
        &self.diagnostics
    }

    pub fn rays(&self) -> &[T] {
        &self.rays
    }

    /// Geometry (and initial values) of the grid.
    pub fn initial(&self) -> &LogGrid<T> {
        &self.grid
    }

    fn snapshot_index(&self, t: T) -> Result<usize> {
        let tol = T::lit(1e-9) * t.abs().max(T::one());
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or(Error::NotSnapshotted(t.as_f64()))
    }

    /// The grid at a snapshot time.
    pub fn grid_at(&self, t: T) -> Result<LogGrid<T>> {
        let i = self.snapshot_index(t)?;
        Ok(self.grid.with_values(self.snapshots[i].clone()))
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (T, LogGrid<T>)> + '_ {
        self.times
            .iter()
            .zip(&self.snapshots)
            .map(|(&t, v)| (t, self.grid.with_values(v.clone())))
    }

    /// `v(t, x) = e^{-2y} n(t, y)` at `y = ln x`, cubic in `y` between nodes.
    pub fn v_from_grid(&self, t: T, x: T) -> Result<GridValue<T>> {
        if !(x > T::zero()) {
            return Err(Error::Domain(format!("size must be > 0, got {x}")));
        }
        let i = self.snapshot_index(t)?;
        let y = x.ln();
        let grid = self.grid.with_values(self.snapshots[i].clone());
        let g = grid.interpolate(y);
        Ok(GridValue {
            value: g.value * (-(y + y)).exp(),
            extrapolated: g.extrapolated,
        })
    }

    /// Recorded `(t, n(t, y t))` samples for a tracked ray.
    pub fn ray_series(&self, y: T) -> Result<(Vec<T>, &[T])> {
        let tol = T::lit(1e-12) * y.abs().max(T::one());
        let r = self
            .rays
            .iter()
            .position(|&s| (s - y).abs() <= tol)
            .ok_or(Error::RayNotTracked(y.as_f64()))?;
        let times = self.diagnostics.iter().map(|d| d.t).collect();
        Ok((times, &self.ray_values[r]))
    }
}
