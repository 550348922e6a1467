//! Initial size distributions `u0` with closed-form moments and Mellin transforms.
//!
//! Every family is parametrised through its log-size density
//! `n0(y) = e^{2y} u0(e^y)`, which is what the grid solver and the plots use.
//! In that coordinate the Mellin transform is a two-sided Laplace transform,
//! `U0(s) = ∫ n0(y) e^{(s-2)y} dy`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::num::{ComplexValue, Real};

/// Half-width, in standard deviations, of the region where a log-gaussian
/// profile is treated as non-negligible.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 12.0;

/// Below this distance from `s = 2` the log-heaviside transform switches to
/// its Taylor expansion.
const HEAVISIDE_TAYLOR_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape<T> {
    /// Gaussian in `y = ln x` with the given mean, deviation and total mass.
    LogGaussian { mu: T, sigma: T, mass: T },
    /// `n0 = height` on `[a, b]` in `y`, zero elsewhere.
    LogHeaviside { a: T, b: T, height: T },
    /// `weight * delta(x - x0)`.
    Dirac { x0: T, weight: T },
}

/// A validated initial profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialProfile<T> {
    shape: Shape<T>,
}

impl<T: Real> InitialProfile<T> {
    pub fn log_gaussian(mu: T, sigma: T, mass: T) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
        }
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::invalid("mass", format!("must be > 0, got {mass}")));
        }
        Ok(Self {
            shape: Shape::LogGaussian { mu, sigma, mass },
        })
    }

    pub fn log_heaviside(a: T, b: T, height: T) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid("a,b", format!("need finite a < b, got [{a}, {b}]")));
        }
        if !(height > T::zero()) || !height.is_finite() {
            return Err(Error::invalid("height", format!("must be > 0, got {height}")));
        }
        Ok(Self {
            shape: Shape::LogHeaviside { a, b, height },
        })
    }

    pub fn dirac(x0: T, weight: T) -> Result<Self> {
        if !(x0 > T::zero()) || !x0.is_finite() {
            return Err(Error::invalid("x0", format!("must be > 0, got {x0}")));
        }
        if !(weight > T::zero()) || !weight.is_finite() {
            return Err(Error::invalid("weight", format!("must be > 0, got {weight}")));
        }
        Ok(Self {
            shape: Shape::Dirac { x0, weight },
        })
    }

    #[inline]
    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self.shape, Shape::Dirac { .. })
    }

    /// Density `u0(x)`.
    pub fn eval_x(&self, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return Err(Error::Domain(format!("size must be > 0, got {x}")));
        }
        match self.shape {
            Shape::Dirac { .. } => Err(Error::NoPointwiseDensity),
            Shape::LogGaussian { .. } | Shape::LogHeaviside { .. } => {
                let n0 = self.eval_y(x.ln())?;
                Ok(n0 / (x * x))
            }
        }
    }

    /// Log-size density `n0(y) = e^{2y} u0(e^y)`.
    pub fn eval_y(&self, y: T) -> Result<T> {
        match self.shape {
            Shape::LogGaussian { mu, sigma, mass } => {
                let z = (y - mu) / sigma;
                let norm = mass / (sigma * (T::lit(2.0) * T::PI()).sqrt());
                Ok(norm * (-(z * z) / T::lit(2.0)).exp())
            }
            Shape::LogHeaviside { a, b, height } => {
                Ok(if y >= a && y <= b { height } else { T::zero() })
            }
            Shape::Dirac { .. } => Err(Error::NoPointwiseDensity),
        }
    }

    /// `ln n0(y)`, `-inf` outside the support.
    pub fn ln_eval_y(&self, y: T) -> Result<T> {
        match self.shape {
            Shape::LogGaussian { mu, sigma, mass } => {
                let z = (y - mu) / sigma;
                let ln_norm = mass.ln() - sigma.ln() - T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
                Ok(ln_norm - z * z / T::lit(2.0))
            }
            Shape::LogHeaviside { a, b, height } => Ok(if y >= a && y <= b {
                height.ln()
            } else {
                T::neg_infinity()
            }),
            Shape::Dirac { .. } => Err(Error::NoPointwiseDensity),
        }
    }

    /// Supremum of `n0`.
    pub fn peak_density(&self) -> Result<T> {
        match self.shape {
            Shape::LogGaussian { sigma, mass, .. } => {
                Ok(mass / (sigma * (T::lit(2.0) * T::PI()).sqrt()))
            }
            Shape::LogHeaviside { height, .. } => Ok(height),
            Shape::Dirac { .. } => Err(Error::NoPointwiseDensity),
        }
    }

    /// Interval in `y` outside which `n0` vanishes (or is below `e^{-72}` of
    /// its peak for the gaussian family).
    pub fn support_y(&self) -> (T, T) {
        match self.shape {
            Shape::LogGaussian { mu, sigma, .. } => {
                let w = T::lit(GAUSSIAN_SUPPORT_SIGMAS) * sigma;
                (mu - w, mu + w)
            }
            Shape::LogHeaviside { a, b, .. } => (a, b),
            Shape::Dirac { x0, .. } => (x0.ln(), x0.ln()),
        }
    }

    /// Mellin transform `U0(s) = ∫ u0(x) x^{s-1} dx`, entire for all three families.
    pub fn mellin(&self, s: ComplexValue<T>) -> ComplexValue<T> {
        let two = T::lit(2.0);
        let w = s - two;
        match self.shape {
            Shape::LogGaussian { mu, sigma, mass } => {
                (w * mu + w * w * (sigma * sigma / two)).exp() * mass
            }
            Shape::LogHeaviside { a, b, height } => {
                if w.norm() < T::lit(HEAVISIDE_TAYLOR_RADIUS) {
                    let c1 = b - a;
                    let c2 = (b * b - a * a) / two;
                    let c3 = (b * b * b - a * a * a) / T::lit(6.0);
                    (w * w * c3 + w * c2 + c1) * height
                } else {
                    (w * a).exp() * complex_exp_m1(w * (b - a)) / w * height
                }
            }
            Shape::Dirac { x0, weight } => (s - T::one()).scale(x0.ln()).exp() * weight,
        }
    }

    /// Real moment `∫ x^q u0(x) dx = U0(q + 1)`.
    pub fn moment(&self, q: T) -> T {
        self.mellin(ComplexValue::new(q + T::one(), T::zero())).re
    }

    /// First moment `U0(2)`, the quantity conserved by pure fragmentation.
    pub fn mass(&self) -> T {
        match self.shape {
            Shape::LogGaussian { mass, .. } => mass,
            Shape::LogHeaviside { a, b, height } => height * (b - a),
            Shape::Dirac { x0, weight } => weight * x0,
        }
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
fn complex_exp_m1<T: Real>(z: ComplexValue<T>) -> ComplexValue<T> {
    let half = (z.im / T::lit(2.0)).sin();
    ComplexValue::new(
        z.re.exp_m1() * z.im.cos() - T::lit(2.0) * half * half,
        z.re.exp() * z.im.sin(),
    )
}

impl<T: Real> fmt::Display for InitialProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::LogGaussian { mu, sigma, mass } => {
                write!(f, "loggaussian mu={mu} sigma={sigma} mass={mass}")
            }
            Shape::LogHeaviside { a, b, height } => {
                write!(f, "logheaviside a={a} b={b} height={height}")
            }
            Shape::Dirac { x0, weight } => write!(f, "dirac x0={x0} weight={weight}"),
        }
    }
}

impl<T: Real + FromStr> FromStr for InitialProfile<T> {
    type Err = Error;

    /// Parses `loggaussian mu=0 sigma=0.1 mass=1`, `logheaviside a=-0.2 b=0 height=1`
    /// or `dirac x0=1 weight=1`. `mu`, `mass`, `height` and `weight` are optional.
    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let family = words
            .next()
            .ok_or_else(|| Error::invalid("profile", "empty profile specification"))?
            .to_ascii_lowercase();
        let mut kv: Vec<(&str, T)> = Vec::new();
        for word in words {
            let (k, v) = word
                .split_once('=')
                .ok_or_else(|| Error::invalid("profile", format!("expected key=value, got `{word}`")))?;
            let v: T = v
                .parse()
                .map_err(|_| Error::invalid("profile", format!("`{k}` is not a number: `{v}`")))?;
            if kv.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::invalid("profile", format!("duplicate key `{k}`")));
            }
            kv.push((k, v));
        }
        let allowed: &[&str] = match family.as_str() {
            "loggaussian" => &["mu", "sigma", "mass"],
            "logheaviside" => &["a", "b", "height"],
            "dirac" => &["x0", "weight"],
            other => {
                return Err(Error::invalid("profile", format!("unknown family `{other}`")));
            }
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::invalid("profile", format!("unknown key `{k}` for {family}")));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let need = |key: &'static str| {
            get(key).ok_or_else(|| Error::invalid("profile", format!("missing `{key}`")))
        };
        match family.as_str() {
            "loggaussian" => Self::log_gaussian(
                get("mu").unwrap_or_else(T::zero),
                need("sigma")?,
                get("mass").unwrap_or_else(T::one),
            ),
            "logheaviside" => {
                Self::log_heaviside(need("a")?, need("b")?, get("height").unwrap_or_else(T::one))
            }
            _ => Self::dirac(need("x0")?, get("weight").unwrap_or_else(T::one)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss() -> InitialProfile<f64> {
        InitialProfile::log_gaussian(0.0, 0.1, 1.0).unwrap()
    }

    fn heavi() -> InitialProfile<f64> {
        InitialProfile::log_heaviside(-0.2, 0.0, 1.0).unwrap()
    }

    #[test]
    fn eval_x_examples() {
        let peak = 1.0 / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
        assert_relative_eq!(gauss().eval_x(1.0).unwrap(), peak, max_relative = 1e-15);
        assert_relative_eq!(peak, 3.98942, epsilon = 1e-5);
        assert_eq!(heavi().eval_x((-0.3_f64).exp()).unwrap(), 0.0);
        // x^{-2} * height at x = e^{-0.1}
        assert_relative_eq!(heavi().eval_x((-0.1_f64).exp()).unwrap(), 0.2_f64.exp(), max_relative = 1e-14);
    }

    #[test]
    fn eval_y_examples() {
        assert_relative_eq!(gauss().eval_y(0.0).unwrap(), 3.989422804014327, max_relative = 1e-15);
        // standard normal pdf at one deviation, divided by sigma
        let pdf1 = (-0.5_f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(gauss().eval_y(0.1).unwrap(), pdf1 / 0.1, max_relative = 1e-14);
        assert_relative_eq!(gauss().eval_y(0.1).unwrap(), 2.41971, epsilon = 1e-5);
        assert_eq!(heavi().eval_y(-0.1).unwrap(), 1.0);
    }

    #[test]
    fn dirac_has_no_density() {
        let d = InitialProfile::dirac(1.0, 1.0).unwrap();
        assert_eq!(d.eval_x(1.0), Err(Error::NoPointwiseDensity));
        assert_eq!(d.eval_y(0.0), Err(Error::NoPointwiseDensity));
        assert!(gauss().eval_x(0.0).is_err());
    }

    #[test]
    fn mellin_examples() {
        let one = |s: f64| ComplexValue::new(s, 0.0);
        assert_relative_eq!(gauss().mellin(one(2.0)).re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(heavi().mellin(one(2.0)).re, 0.2, max_relative = 1e-15);
        assert_relative_eq!(gauss().mellin(one(3.0)).re, 0.005_f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(gauss().mellin(one(3.0)).re, 1.005013, epsilon = 1e-6);
    }

    #[test]
    fn heaviside_taylor_branch_near_removable_point() {
        let h = heavi();
        // eight-term expansion of (e^{wb} - e^{wa}) / w as the reference
        let reference = |w: ComplexValue<f64>| {
            let (a, b) = (-0.2_f64, 0.0_f64);
            let mut acc = ComplexValue::new(0.0, 0.0);
            let mut wp = ComplexValue::new(1.0, 0.0);
            let mut fact = 1.0;
            for n in 1..=8 {
                fact *= n as f64;
                acc += wp * ((b.powi(n) - a.powi(n)) / fact);
                wp *= w;
            }
            acc
        };
        for d in [1e-9, 1e-7, 9.99e-7, 1.001e-6, 1e-5] {
            let s = ComplexValue::new(2.0 + d, 0.3 * d);
            let got = h.mellin(s);
            let want = reference(s - 2.0);
            assert!((got - want).norm() < 1e-13 * want.norm(), "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn moment_examples() {
        assert_relative_eq!(gauss().moment(1.0), 1.0, max_relative = 1e-15);
        let d = InitialProfile::dirac(0.5, 2.0).unwrap();
        assert_relative_eq!(d.moment(1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(heavi().moment(0.0), 0.2_f64.exp() - 1.0, max_relative = 1e-14);
        assert_relative_eq!(heavi().moment(0.0), 0.221403, epsilon = 1e-6);
        for p in [gauss(), heavi(), d] {
            assert_relative_eq!(p.mass(), p.moment(1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn parse_and_display() {
        let p: InitialProfile<f64> = "loggaussian mu=0 sigma=0.1 mass=1".parse().unwrap();
        assert_eq!(p, gauss());
        assert_eq!(p.to_string().parse::<InitialProfile<f64>>().unwrap(), p);
        let h: InitialProfile<f64> = "logheaviside a=-0.2 b=0".parse().unwrap();
        assert_eq!(h, heavi());
        assert!("loggaussian sigma=0".parse::<InitialProfile<f64>>().is_err());
        assert!("loggaussian sigma=0.1 foo=1".parse::<InitialProfile<f64>>().is_err());
        assert!("cauchy x=1".parse::<InitialProfile<f64>>().is_err());
        assert!("dirac weight=1".parse::<InitialProfile<f64>>().is_err());
    }

    #[test]
    fn single_precision_profile() {
        let p = InitialProfile::<f32>::log_gaussian(0.0, 0.1, 1.0).unwrap();
        assert!((p.eval_y(0.0).unwrap() - 3.989_423).abs() < 1e-5);
    }
}
