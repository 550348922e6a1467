//! Explicit series solution.
//!
//! For pure fragmentation (`g = 0`, `b = 1`)
//!
//! ```text
//! v(t, x) = e^{-t} Σ_k u0(α^k x) (α² t)^k / k!
//! ```
//!
//! which in the log-size variable reads `n(t, y) = e^{-t} Σ_k n0(y + k ln α) t^k / k!`.
//! The general equation follows from `u(t, x) = e^{-gt} v(bt, x e^{-gt})`.
//! Poisson weights are accumulated in log space and the sum is compensated.

use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};
use crate::params::ModelParams;
use crate::profile::{InitialProfile, Shape};

/// Truncation control for the explicit series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesTruncation<T> {
    /// Absolute bound on the neglected tail of `n(t, y)` (log-size density).
    pub eps: T,
    /// Hard cap on the number of terms.
    pub k_max_cap: usize,
}

impl<T: Real> SeriesTruncation<T> {
    pub fn new(eps: T, k_max_cap: usize) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::invalid("eps", "must be > 0"));
        }
        if k_max_cap < 1 {
            return Err(Error::invalid("k_max_cap", "must be >= 1"));
        }
        Ok(Self { eps, k_max_cap })
    }
}

impl<T: Real> Default for SeriesTruncation<T> {
    fn default() -> Self {
        Self {
            eps: T::lit(1e-300).max(T::min_positive_value()),
            k_max_cap: 100_000,
        }
    }
}

fn reject_dirac<T: Real>(p: &InitialProfile<T>) -> Result<()> {
    if p.is_dirac() {
        Err(Error::NoPointwiseDensity)
    } else {
        Ok(())
    }
}

/// Smallest `k >= 0` with `y + k ln α` beyond the profile's upper support edge.
fn support_terms<T: Real>(p: &InitialProfile<T>, log_alpha: T, y: T) -> usize {
    let (_, hi) = p.support_y();
    if y > hi {
        0
    } else {
        ((hi - y) / log_alpha).floor().as_f64() as usize + 1
    }
}

/// Log-size density `n(t, y) = e^{2y} v(t, e^y)` of the pure-fragmentation solution.
pub fn eval_n<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    y: T,
    trunc: &SeriesTruncation<T>,
) -> Result<T> {
    reject_dirac(p)?;
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    if !(alpha > T::one()) {
        return Err(Error::invalid("alpha", "must be > 1"));
    }
    if t == T::zero() {
        return p.eval_y(y);
    }
    let log_alpha = alpha.ln();
    let ln_t = t.ln();
    let n0_max = p.peak_density()?;
    let k_support = support_terms(p, log_alpha, y);

    let mut acc = CompensatedSum::new();
    let mut ln_weight = -t;
    let mut k = 0usize;
    loop {
        if k > 0 {
            ln_weight += ln_t - T::of_usize(k).ln();
        }
        let ln_n0 = p.ln_eval_y(y + T::of_usize(k) * log_alpha)?;
        acc.add((ln_weight + ln_n0).exp());

        // Remaining Poisson mass after term k, via the geometric ratio bound.
        let next = T::of_usize(k + 1);
        let tail = if next + T::one() > t {
            let p_next = (ln_weight + ln_t - next.ln()).exp();
            p_next / (T::one() - t / (next + T::one())) * n0_max
        } else {
            T::infinity()
        };
        // Terms past the support edge vanish; a negligible Poisson tail ends earlier.
        if k + 1 >= k_support || tail < trunc.eps {
            break;
        }
        k += 1;
        if k >= trunc.k_max_cap {
            return Err(Error::TruncationCap {
                cap: trunc.k_max_cap,
                bound: tail.as_f64(),
            });
        }
    }
    Ok(acc.value())
}

/// Pure-fragmentation density `v(t, x)`.
pub fn eval_v<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    x: T,
    trunc: &SeriesTruncation<T>,
) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("size must be > 0, got {x}")));
    }
    let y = x.ln();
    Ok(eval_n(p, alpha, t, y, trunc)? * (-(y + y)).exp())
}

/// Growth-fragmentation density through the rescaling `u(t, x) = e^{-gt} v(bt, x e^{-gt})`.
pub fn eval_u<T: Real>(
    params: &ModelParams<T>,
    p: &InitialProfile<T>,
    t: T,
    x: T,
    trunc: &SeriesTruncation<T>,
) -> Result<T> {
    let g = params.g();
    let shrink = (-g * t).exp();
    Ok(shrink * eval_v(p, params.alpha(), params.b() * t, x * shrink, trunc)?)
}

/// Growth-fragmentation density summed directly in `x`:
/// `e^{-(b+g)t} Σ_k u0(α^k x e^{-gt}) (b α² t)^k / k!`.
///
/// Independent of [`eval_u`] apart from the profile itself; the two are
/// cross-checked in tests.
pub fn eval_u_direct<T: Real>(
    params: &ModelParams<T>,
    p: &InitialProfile<T>,
    t: T,
    x: T,
    trunc: &SeriesTruncation<T>,
) -> Result<T> {
    reject_dirac(p)?;
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("size must be > 0, got {x}")));
    }
    let (g, b, alpha) = (params.g(), params.b(), params.alpha());
    let z = x * (-g * t).exp();
    if t == T::zero() {
        return p.eval_x(z);
    }
    let k_support = support_terms(p, params.log_alpha(), z.ln());
    let ratio = b * alpha * alpha * t;
    let mut acc = CompensatedSum::new();
    let mut weight = T::one();
    let mut size = z;
    for k in 0..k_support.max(1) {
        if k >= trunc.k_max_cap {
            return Err(Error::TruncationCap {
                cap: trunc.k_max_cap,
                bound: f64::INFINITY,
            });
        }
        if k > 0 {
            weight = weight * ratio / T::of_usize(k);
            size *= alpha;
        }
        acc.add(p.eval_x(size)? * weight);
    }
    Ok((-(b + g) * t).exp() * acc.value())
}

/// Closed-form moment `∫ x^q v(t, x) dx = M_q(u0) · exp(t (α^{1-q} - 1))`.
pub fn moment_of_v<T: Real>(p: &InitialProfile<T>, alpha: T, q: T, t: T) -> T {
    p.moment(q) * (t * (alpha.powf(T::one() - q) - T::one())).exp()
}

/// One atom of a measure-valued solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<T> {
    pub location: T,
    pub weight: T,
}

/// Atoms of the solution started from `weight · δ(x - x0)`: the k-th generation
/// sits at `α^{-k} x0 e^{gt}` with mass `e^{-bt} weight (b α t)^k / k!`,
/// for `k = 0..=k_max`.
pub fn support_set<T: Real>(
    p: &InitialProfile<T>,
    params: &ModelParams<T>,
    t: T,
    k_max: usize,
) -> Result<Vec<Atom<T>>> {
    let Shape::Dirac { x0, weight } = *p.shape() else {
        return Err(Error::NotDirac);
    };
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let (g, b, alpha) = (params.g(), params.b(), params.alpha());
    let front = x0 * (g * t).exp();
    if t == T::zero() {
        return Ok(vec![Atom { location: x0, weight }]);
    }
    let ln_rate = (b * alpha * t).ln();
    let mut ln_w = weight.ln() - b * t;
    let mut atoms = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            ln_w += ln_rate - T::of_usize(k).ln();
        }
        atoms.push(Atom {
            location: front * alpha.powi(-(k as i32)),
            weight: ln_w.exp(),
        });
    }
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn gauss(sigma: f64) -> InitialProfile<f64> {
        InitialProfile::log_gaussian(0.0, sigma, 1.0).unwrap()
    }

    fn heavi() -> InitialProfile<f64> {
        InitialProfile::log_heaviside(-0.2, 0.0, 1.0).unwrap()
    }

    fn tr() -> SeriesTruncation<f64> {
        SeriesTruncation::default()
    }

    /// Literal 200-term summation of `e^{-t} Σ u0(α^k x)(α² t)^k / k!`.
    fn brute_force_v(p: &InitialProfile<f64>, alpha: f64, t: f64, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut w = 1.0;
        for k in 0..200 {
            if k > 0 {
                w *= alpha * alpha * t / k as f64;
            }
            let size = x * alpha.powi(k);
            if size.is_finite() {
                sum += p.eval_x(size).unwrap() * w;
            }
        }
        (-t).exp() * sum
    }

    #[test]
    fn t_zero_is_initial_profile() {
        for p in [gauss(0.1), heavi()] {
            for x in [0.3, 0.9, 1.0, 1.05, 4.0] {
                assert_relative_eq!(eval_v(&p, 2.0, 0.0, x, &tr()).unwrap(), p.eval_x(x).unwrap(), max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn heaviside_vanishes_above_support() {
        let v = eval_v(&heavi(), 2.0, 1.0, 0.1_f64.exp(), &tr()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn matches_brute_force_sum() {
        let p = gauss(0.1);
        let oracle = brute_force_v(&p, 2.0, 1.0, 0.5);
        let v = eval_v(&p, 2.0, 1.0, 0.5, &tr()).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-13);
        for (t, x) in [(0.5, 0.25), (2.0, 0.7), (3.0, 0.11)] {
            let oracle = brute_force_v(&p, 2.0, t, x);
            let v = eval_v(&p, 2.0, t, x, &tr()).unwrap();
            assert_relative_eq!(v, oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_dirac_and_bad_time() {
        let d = InitialProfile::dirac(1.0, 1.0).unwrap();
        assert_eq!(eval_v(&d, 2.0, 1.0, 0.5, &tr()), Err(Error::NoPointwiseDensity));
        assert!(eval_v(&gauss(0.1), 2.0, -1.0, 0.5, &tr()).is_err());
        assert!(eval_v(&gauss(0.1), 2.0, 1.0, 0.0, &tr()).is_err());
    }

    #[test]
    fn truncation_cap_reports_bound() {
        let cap = SeriesTruncation::new(1e-300, 3).unwrap();
        match eval_n(&gauss(0.1), 2.0, 50.0, -30.0, &cap) {
            Err(Error::TruncationCap { cap: 3, bound }) => assert!(bound > 0.0),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn eval_u_reductions() {
        let p = gauss(0.1);
        let frag = ModelParams::pure_fragmentation(2.0).unwrap();
        for (t, x) in [(0.5, 0.3), (1.0, 0.5), (2.5, 1.2)] {
            assert_eq!(eval_u(&frag, &p, t, x, &tr()).unwrap(), eval_v(&p, 2.0, t, x, &tr()).unwrap());
        }
        let gen = ModelParams::new(1.3, 0.7, 3.0).unwrap();
        assert_eq!(eval_u(&gen, &p, 0.0, 0.8, &tr()).unwrap(), p.eval_x(0.8).unwrap());
    }

    #[test]
    fn eval_u_example_point() {
        let p = gauss(0.1);
        let params = ModelParams::new(1.0, 1.0, 2.0).unwrap();
        let u = eval_u(&params, &p, 0.5, 1.0, &tr()).unwrap();
        let expect = (-0.5_f64).exp() * eval_v(&p, 2.0, 0.5, (-0.5_f64).exp(), &tr()).unwrap();
        assert_relative_eq!(u, expect, max_relative = 1e-15);
        let direct = eval_u_direct(&params, &p, 0.5, 1.0, &tr()).unwrap();
        assert_relative_eq!(u, direct, max_relative = 1e-12);
    }

    #[test]
    fn two_closed_forms_agree_on_lattice() {
        for p in [gauss(0.1), gauss(0.3), heavi()] {
            for params in [
                ModelParams::new(1.0, 1.0, 2.0).unwrap(),
                ModelParams::new(0.3, 2.0, 3.0).unwrap(),
                ModelParams::new(0.0, 0.5, 1.5).unwrap(),
            ] {
                for t in [0.1, 0.5, 1.0, 2.0, 4.0] {
                    for x in [0.05, 0.2, 0.5, 0.9, 1.0, 1.7, 3.0] {
                        let a = eval_u(&params, &p, t, x, &tr()).unwrap();
                        let b = eval_u_direct(&params, &p, t, x, &tr()).unwrap();
                        let scale = a.abs().max(b.abs());
                        if scale > 1e-280 {
                            assert!(
                                (a - b).abs() <= 1e-12 * scale,
                                "{p} {params:?} t={t} x={x}: {a} vs {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let p = gauss(0.2);
        let (t1, t2) = (0.6, 0.4);
        for y in [-1.5, -0.7, -0.2, 0.1] {
            let full = eval_n(&p, 2.0, t1 + t2, y, &tr()).unwrap();
            let mut w = (-t2).exp();
            let mut composed = 0.0;
            for j in 0..=10 {
                if j > 0 {
                    w *= t2 / j as f64;
                }
                composed += w * eval_n(&p, 2.0, t1, y + j as f64 * LN2, &tr()).unwrap();
            }
            assert_relative_eq!(full, composed, max_relative = 1e-9);
        }
    }

    #[test]
    fn moment_law_closed_form() {
        let p = gauss(0.1);
        for t in [0.0, 0.5, 3.0] {
            assert_relative_eq!(moment_of_v(&p, 2.0, 1.0, t), p.moment(1.0), max_relative = 1e-15);
        }
        let m0 = p.moment(0.0);
        assert_relative_eq!(moment_of_v(&p, 2.0, 0.0, 1.0), m0 * std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(
            moment_of_v(&p, 2.0, 2.0, 1.7),
            p.moment(2.0) * (1.7 * (0.5 - 1.0_f64)).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn dirac_atoms() {
        let d = InitialProfile::dirac(1.0, 1.0).unwrap();
        let frag = ModelParams::pure_fragmentation(2.0).unwrap();
        assert_eq!(support_set(&d, &frag, 0.0, 5).unwrap(), vec![Atom { location: 1.0, weight: 1.0 }]);
        let atoms = support_set(&d, &frag, 1.0, 60).unwrap();
        let e1 = (-1.0_f64).exp();
        assert_relative_eq!(atoms[0].weight, e1, max_relative = 1e-15);
        assert_relative_eq!(atoms[1].weight, 2.0 * e1, max_relative = 1e-15);
        assert_relative_eq!(atoms[2].weight, 2.0 * e1, max_relative = 1e-15);
        assert_relative_eq!(atoms[2].location, 0.25, max_relative = 1e-15);
        let first: f64 = atoms.iter().map(|a| a.weight * a.location).sum();
        assert_relative_eq!(first, 1.0, max_relative = 1e-14);

        let lattice = ModelParams::new(LN2, 1.0, 2.0).unwrap();
        let atoms = support_set(&d, &lattice, 1.0, 4).unwrap();
        for (k, a) in atoms.iter().enumerate() {
            assert_relative_eq!(a.location, 2.0_f64.powi(1 - k as i32), max_relative = 1e-15);
        }
        assert_eq!(support_set(&gauss(0.1), &frag, 1.0, 3), Err(Error::NotDirac));
    }

    #[test]
    fn single_precision_series() {
        let p = InitialProfile::<f32>::log_gaussian(0.0, 0.1, 1.0).unwrap();
        let v32 = eval_v(&p, 2.0_f32, 1.0, 0.5, &SeriesTruncation::default()).unwrap();
        let v64 = eval_v(&gauss(0.1), 2.0, 1.0, 0.5, &tr()).unwrap();
        assert!(((v32 as f64) - v64).abs() < 1e-4 * v64);
    }

    proptest! {
        #[test]
        fn heaviside_support_containment(
            a in -2.0f64..-0.05, w in 0.05f64..1.5, t in 0.1f64..20.0, y in -15.0f64..1.0
        ) {
            let b = a + w;
            let p = InitialProfile::log_heaviside(a, b, 1.0).unwrap();
            let n = eval_n(&p, 2.0, t, y, &tr()).unwrap();
            let hit = (0..200).any(|k| {
                let z = y + k as f64 * LN2;
                z >= a && z <= b
            });
            if !hit {
                prop_assert_eq!(n, 0.0);
            } else {
                prop_assert!(n > 0.0);
            }
        }
    }
}
