//! Instruments for the long-time behaviour: density sources shared by the
//! three routes, the rescalings `r` and `r̃`, ray probes `f_y`, period
//! estimation, weak-convergence functionals and cross-method reports.

mod compare;
mod period;
mod shape;
mod weak;

pub use compare::{compare_methods, CompareOptions, ComparisonReport, ComparisonRow, Method, RowStatus, Tolerances};
pub use period::{estimate_period, oscillation_amplitude, PeriodEstimate, PeriodOutcome, NO_OSCILLATION};
pub use shape::{envelope_peak, envelope_width, heaviside_shape, HeavisideShape};
pub use weak::{bump, standard_normal_pairing, weak_test, weak_test_tilde};

use crate::error::{Error, Result};
use crate::mellin::{inverse_mellin_v, psi, ContourQuad};
use crate::num::Real;
use crate::pde::Trajectory;
use crate::profile::InitialProfile;
use crate::series::{eval_n, SeriesTruncation};

/// Anything that can evaluate the log-size density `n(t, y) = e^{2y} v(t, e^y)`
/// of the pure fragmentation problem.
pub trait DensitySource<T: Real> {
    fn alpha(&self) -> T;

    fn n(&self, t: T, y: T) -> Result<T>;

    /// `v(t, x) = e^{-2 ln x} n(t, ln x)`.
    fn v(&self, t: T, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return Err(Error::Domain(format!("size must be > 0, got {x}")));
        }
        let y = x.ln();
        Ok(self.n(t, y)? * (-(y + y)).exp())
    }

    /// `∫ w(y) n(t, y) dy` over the region holding the mass.
    fn pairing(&self, t: T, w: &dyn Fn(T) -> T) -> Result<T>;

    /// The conserved `∫ n dy`.
    fn mass(&self) -> T;
}

/// Series route.
#[derive(Clone, Copy, Debug)]
pub struct SeriesSource<T> {
    pub profile: InitialProfile<T>,
    pub alpha: T,
    pub truncation: SeriesTruncation<T>,
}

impl<T: Real> SeriesSource<T> {
    pub fn new(profile: InitialProfile<T>, alpha: T) -> Self {
        Self {
            profile,
            alpha,
            truncation: SeriesTruncation::default(),
        }
    }
}

impl<T: Real> DensitySource<T> for SeriesSource<T> {
    fn alpha(&self) -> T {
        self.alpha
    }

    fn n(&self, t: T, y: T) -> Result<T> {
        eval_n(&self.profile, self.alpha, t, y, &self.truncation)
    }

    fn pairing(&self, t: T, w: &dyn Fn(T) -> T) -> Result<T> {
        weak::profile_pairing(self, &self.profile, t, w)
    }

    fn mass(&self) -> T {
        self.profile.mass()
    }
}

/// Inverse Mellin route with the automatic contour at abscissa `nu`.
#[derive(Clone, Copy, Debug)]
pub struct MellinSource<T> {
    pub profile: InitialProfile<T>,
    pub alpha: T,
    pub nu: T,
}

impl<T: Real> MellinSource<T> {
    pub fn new(profile: InitialProfile<T>, alpha: T) -> Self {
        Self {
            profile,
            alpha,
            nu: T::lit(2.0),
        }
    }
}

impl<T: Real> DensitySource<T> for MellinSource<T> {
    fn alpha(&self) -> T {
        self.alpha
    }

    fn n(&self, t: T, y: T) -> Result<T> {
        let x = y.exp();
        let cq = ContourQuad::auto(&self.profile, self.alpha, t, x, self.nu)?;
        Ok(inverse_mellin_v(&self.profile, self.alpha, t, x, &cq)? * (y + y).exp())
    }

    fn pairing(&self, t: T, w: &dyn Fn(T) -> T) -> Result<T> {
        weak::profile_pairing(self, &self.profile, t, w)
    }

    fn mass(&self) -> T {
        self.profile.mass()
    }
}

/// Grid route; only snapshot times can be evaluated.
impl<T: Real> DensitySource<T> for Trajectory<T> {
    fn alpha(&self) -> T {
        self.initial().alpha()
    }

    fn n(&self, t: T, y: T) -> Result<T> {
        let g = self.grid_at(t)?.interpolate(y);
        if g.extrapolated {
            return Err(Error::WindowMissesMass(format!("y={y} lies below the grid")));
        }
        Ok(g.value)
    }

    fn pairing(&self, t: T, w: &dyn Fn(T) -> T) -> Result<T> {
        let grid = self.grid_at(t)?;
        let edge = grid.values().iter().take(10).copied().fold(T::zero(), T::max);
        if edge > T::lit(1e-12) * self.mass().abs() {
            return Err(Error::WindowMissesMass(format!(
                "density {edge} at the left edge of the grid at t={t}"
            )));
        }
        Ok(grid.pair(w))
    }

    fn mass(&self) -> T {
        self.initial().mass()
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("time must be > 0, got {t}")));
    }
    Ok(())
}

/// `r(t, y) = t e^{2ty} v(t, e^{ty}) = t n(t, t y)`.
pub fn r_of<T: Real, S: DensitySource<T> + ?Sized>(src: &S, t: T, y: T) -> Result<T> {
    check_time(t)?;
    Ok(t * src.n(t, t * y)?)
}

/// Centre and width of the concentration: `y0 = -ln α`, `σ = ln α`.
pub fn concentration<T: Real>(alpha: T) -> (T, T) {
    let l = alpha.ln();
    (-l, l)
}

/// `r̃(t, z) = r(t, y0 + σ z / √t) σ / √t`.
pub fn r_tilde_of<T: Real, S: DensitySource<T> + ?Sized>(src: &S, t: T, z: T) -> Result<T> {
    check_time(t)?;
    let (y0, sigma) = concentration(src.alpha());
    let scale = sigma / t.sqrt();
    Ok(r_of(src, t, y0 + scale * z)? * scale)
}

/// Samples of `f_y(t) = √t e^{-Ψ(y) t} n(t, y t)` along one ray.
#[derive(Clone, Debug, PartialEq)]
pub struct LineProbe<T> {
    y: T,
    alpha: T,
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> LineProbe<T> {
    pub fn new(y: T, alpha: T, times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if !(y < T::zero()) {
            return Err(Error::invalid("y", "ray slope must be < 0"));
        }
        if !(alpha > T::one()) {
            return Err(Error::invalid("alpha", "must be > 1"));
        }
        if times.len() != values.len() {
            return Err(Error::invalid("values", "one value per sample time"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("times", "must be strictly increasing"));
        }
        Ok(Self {
            y,
            alpha,
            times,
            values,
        })
    }

    /// The probe recorded by the grid solver for ray `y`, restricted to
    /// `t_from <= t <= t_to`.
    pub fn from_trajectory(traj: &Trajectory<T>, y: T, t_from: T, t_to: T) -> Result<Self> {
        let alpha = traj.initial().alpha();
        let shape = psi(alpha, y)?;
        let (times, raw) = traj.ray_series(y)?;
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (&t, &n) in times.iter().zip(raw) {
            if t >= t_from && t <= t_to && t > T::zero() {
                ts.push(t);
                vs.push(t.sqrt() * (-shape.value * t).exp() * n);
            }
        }
        Self::new(y, alpha, ts, vs)
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The period `-ln α / y` predicted for this ray.
    pub fn expected_period(&self) -> T {
        -self.alpha.ln() / self.y
    }
}

/// Sample `f_y` from any source at the given times.
pub fn line_probe<T: Real, S: DensitySource<T> + ?Sized>(
    src: &S,
    y: T,
    times: &[T],
) -> Result<LineProbe<T>> {
    let alpha = src.alpha();
    let shape = psi(alpha, y)?;
    let values = times
        .iter()
        .map(|&t| {
            check_time(t)?;
            Ok(t.sqrt() * (-shape.value * t).exp() * src.n(t, y * t)?)
        })
        .collect::<Result<Vec<_>>>()?;
    LineProbe::new(y, alpha, times.to_vec(), values)
}

/// [`line_probe`] for several rays, one thread per ray.
pub fn line_probes<T: Real, S: DensitySource<T> + Sync + ?Sized>(
    src: &S,
    rays: &[T],
    times: &[T],
) -> Result<Vec<LineProbe<T>>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = rays
            .iter()
            .map(|&y| scope.spawn(move || line_probe(src, y, times)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("probe worker panicked"))
            .collect()
    })
}

/// `n` uniform samples of `[t0, t1]`, both ends included.
pub fn uniform_times<T: Real>(t0: T, t1: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "need at least two samples");
    let h = (t1 - t0) / T::of_usize(n - 1);
    (0..n).map(|i| t0 + T::of_usize(i) * h).collect()
}
