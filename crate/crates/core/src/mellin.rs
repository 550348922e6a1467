//! Spectral route: the kernel transform `K(s) = α^{2-s}`, the saddle `s₊`,
//! the rate function `Ψ`, numerical inversion of the Mellin representation
//!
//! ```text
//! v(t, x) = 1/(2πi) ∫_{ν-i∞}^{ν+i∞} U0(s) e^{(K(s)-1)t} x^{-s} ds
//! ```
//!
//! and the two large-time asymptotic formulas (theta sum over the saddles
//! `s_k = s₊ - 2πik/ln α`, and its Poisson resummation over dilations `α^n`).
//!
//! Complex powers of real bases are always `exp(s · ln base)` with the real
//! logarithm, which fixes the branch.

use crate::error::{Error, Result};
use crate::num::{CompensatedSum, ComplexValue, Real};
use crate::params::ModelParams;
use crate::profile::{InitialProfile, Shape};

/// `K(s) = α^{2-s}`, the Mellin transform of the fragmentation kernel.
pub fn k_of_s<T: Real>(alpha: T, s: ComplexValue<T>) -> ComplexValue<T> {
    ((ComplexValue::new(T::lit(2.0), T::zero()) - s) * alpha.ln()).exp()
}

/// Saddle abscissa `s₊(t, x) = 2 - ln(-ln x / (t ln α)) / ln α` for `0 < x < 1`, `t > 0`.
pub fn s_plus<T: Real>(alpha: T, t: T, x: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("s+ needs t > 0, got {t}")));
    }
    if !(x > T::zero() && x < T::one()) {
        return Err(Error::Domain(format!("s+ needs 0 < x < 1, got {x}")));
    }
    s_plus_on_ray(alpha, x.ln() / t)
}

/// `s₊` along the ray `x = e^{yt}`, which does not depend on `t`.
pub fn s_plus_on_ray<T: Real>(alpha: T, y: T) -> Result<T> {
    if !(y < T::zero()) {
        return Err(Error::Domain(format!("ray slope must be < 0, got {y}")));
    }
    let l = alpha.ln();
    Ok(T::lit(2.0) - (-y / l).ln() / l)
}

/// `s_k = s₊ - 2πik / ln α`.
pub fn s_k<T: Real>(s_plus: T, k: i64, alpha: T) -> ComplexValue<T> {
    let step = T::lit(2.0) * T::PI() / alpha.ln();
    ComplexValue::new(s_plus, -step * T::lit(k as f64))
}

/// `Ψ` and its first two derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Psi<T> {
    pub value: T,
    pub first: T,
    pub second: T,
}

/// Rate function `Ψ(y) = y ln(-y/ln α)/ln α - y/ln α - 1` governing growth along
/// rays `x = e^{yt}`. Maximal, and zero, at `y = -ln α`.
pub fn psi<T: Real>(alpha: T, y: T) -> Result<Psi<T>> {
    if !(y < T::zero()) {
        return Err(Error::Domain(format!("psi needs y < 0, got {y}")));
    }
    let l = alpha.ln();
    let first = (-y / l).ln() / l;
    Ok(Psi {
        value: first * y - y / l - T::one(),
        first,
        second: T::one() / (y * l),
    })
}

/// Asymptotic period `-ln α / y` of the normalised ray value.
pub fn ray_period<T: Real>(alpha: T, y: T) -> Result<T> {
    if !(y < T::zero()) {
        return Err(Error::Domain(format!("ray slope must be < 0, got {y}")));
    }
    Ok(-alpha.ln() / y)
}

/// Trapezoidal discretisation of the vertical contour `Re s = nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourQuad<T> {
    pub nu: T,
    /// The contour is cut to `|Im s| <= tau_max`.
    pub tau_max: T,
    /// Number of trapezoid intervals on `[-tau_max, tau_max]`.
    pub n_nodes: usize,
    /// Accepted relative discrepancy between step `h` and `2h` results.
    pub rel_tol: T,
}

impl<T: Real> ContourQuad<T> {
    pub fn new(nu: T, tau_max: T, n_nodes: usize, rel_tol: T) -> Result<Self> {
        if !(tau_max > T::zero()) {
            return Err(Error::invalid("tau_max", "must be > 0"));
        }
        if n_nodes < 2 || !n_nodes.is_multiple_of(2) {
            return Err(Error::invalid("n_nodes", "must be even and >= 2"));
        }
        if !nu.is_finite() {
            return Err(Error::invalid("nu", "must be finite"));
        }
        Ok(Self {
            nu,
            tau_max,
            n_nodes,
            rel_tol,
        })
    }

    /// Default contour for a log-gaussian profile. All decay along the contour
    /// comes from `|U0| ~ exp(-σ²τ²/2)` since `|e^{K(s)t}|` is periodic in `τ`;
    /// the cut is placed where that factor has fallen by `e^{-40}` beyond the
    /// dynamic range of the periodic factor. The step resolves the gaussian,
    /// the oscillation of `e^{K(s)t}` and that of `x^{-iτ}`.
    pub fn auto(p: &InitialProfile<T>, alpha: T, t: T, x: T, nu: T) -> Result<Self> {
        let Shape::LogGaussian { sigma, .. } = *p.shape() else {
            return Err(Error::SlowContourDecay);
        };
        let two = T::lit(2.0);
        let k_scale = alpha.powf(two - nu);
        let range = T::lit(40.0) + two * t * k_scale;
        let tau_max = (two * range).sqrt() / sigma;
        let quarter_pi = T::PI() / T::lit(4.0);
        let mut h = sigma / T::lit(4.0);
        if t > T::zero() {
            h = h.min(quarter_pi / (t * alpha.ln() * k_scale));
        }
        let lx = x.ln().abs();
        if lx > T::zero() {
            h = h.min(quarter_pi / lx);
        }
        let half = (tau_max / h).ceil().as_f64() as usize;
        Self::new(nu, tau_max, 2 * half.max(1), T::lit(1e-10))
    }
}

/// Value and error estimate of a contour inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourResult<T> {
    pub value: T,
    /// `|I_h - I_{2h}|`.
    pub error_estimate: T,
}

/// Inverts the Mellin representation of `v(t, x)` along `Re s = ν`.
/// Only log-gaussian profiles decay fast enough along the contour.
pub fn inverse_mellin_v<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    x: T,
    cq: &ContourQuad<T>,
) -> Result<T> {
    inverse_mellin_v_detailed(p, alpha, t, x, cq).map(|r| r.value)
}

pub fn inverse_mellin_v_detailed<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    x: T,
    cq: &ContourQuad<T>,
) -> Result<ContourResult<T>> {
    if !matches!(p.shape(), Shape::LogGaussian { .. }) {
        return Err(Error::SlowContourDecay);
    }
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("size must be > 0, got {x}")));
    }
    let ln_x = x.ln();
    let half = cq.n_nodes / 2;
    let h = cq.tau_max / T::of_usize(half);
    let integrand = |tau: T| -> ComplexValue<T> {
        let s = ComplexValue::new(cq.nu, tau);
        let growth = (k_of_s(alpha, s) - T::one()) * t;
        p.mellin(s) * (growth - s * ln_x).exp()
    };
    // The integrand is conjugate-symmetric in tau: fold onto tau >= 0.
    let mut fine = CompensatedSum::new();
    let mut coarse = CompensatedSum::new();
    let mut magnitude = CompensatedSum::new();
    for j in 0..=half {
        let f = integrand(T::of_usize(j) * h);
        let w = if j == 0 || j == half { T::one() } else { T::lit(2.0) };
        fine.add(w * f.re);
        magnitude.add(w * f.norm());
        if j % 2 == 0 {
            let wc = if j == 0 || j == half || (j == half - 1 && half % 2 == 1) {
                T::one()
            } else {
                T::lit(2.0)
            };
            coarse.add(wc * f.re);
        }
    }
    let scale = h / (T::lit(2.0) * T::PI());
    let value = fine.value() * scale;
    let coarse_value = coarse.value() * scale * T::lit(2.0);
    let error_estimate = (value - coarse_value).abs();
    let floor = T::lit(64.0) * T::epsilon() * magnitude.value() * scale;
    let tolerance = cq.rel_tol * value.abs() + floor;
    if error_estimate > tolerance {
        return Err(Error::QuadratureInaccurate {
            estimate: error_estimate.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    Ok(ContourResult {
        value,
        error_estimate,
    })
}

/// Truncation of the two infinite sums in the asymptotic formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsympTruncation {
    /// Theta sum runs over `|k| <= k_max`.
    pub k_max: usize,
    /// Poisson sum runs over `n_range.0 ..= n_range.1` (always contains 0).
    pub n_range: (i64, i64),
}

/// Cap on the theta-sum length for profiles whose transform decays slowly.
pub const THETA_K_CAP: usize = 4096;

impl AsympTruncation {
    pub fn new(k_max: usize, n_range: (i64, i64)) -> Result<Self> {
        if !(n_range.0 <= 0 && 0 <= n_range.1) {
            return Err(Error::invalid("n_range", "must contain 0"));
        }
        Ok(Self { k_max, n_range })
    }

    /// Smallest `k_max` with `|U0(s_k)| < 1e-16 |U0(s₊)|` (capped at
    /// [`THETA_K_CAP`]) and the dilation window of the profile's support.
    pub fn auto<T: Real>(p: &InitialProfile<T>, alpha: T, t: T, x: T) -> Result<Self> {
        let sp = s_plus(alpha, t, x)?;
        let base = p.mellin(ComplexValue::new(sp, T::zero())).norm();
        let cutoff = T::lit(1e-16) * base;
        let k_max = match *p.shape() {
            Shape::LogGaussian { sigma, .. } => {
                // |U0(s₊ + iω)| / |U0(s₊)| = exp(-σ²ω²/2)
                let omega = (T::lit(2.0 * 16.0 * std::f64::consts::LN_10)).sqrt() / sigma;
                let step = T::lit(2.0) * T::PI() / alpha.ln();
                ((omega / step).ceil().as_f64() as usize).min(THETA_K_CAP)
            }
            _ => (1..=THETA_K_CAP)
                .find(|&k| p.mellin(s_k(sp, k as i64, alpha)).norm() < cutoff)
                .unwrap_or(THETA_K_CAP),
        };
        let (lo, hi) = p.support_y();
        let l = alpha.ln();
        let ln_x = x.ln();
        let n_lo = ((lo - ln_x) / l).ceil().as_f64() as i64;
        let n_hi = ((hi - ln_x) / l).floor().as_f64() as i64;
        Self::new(k_max, (n_lo.min(0), n_hi.max(0)))
    }
}

fn check_unit_interval<T: Real>(t: T, x: T) -> Result<()> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("asymptotics need t > 0, got {t}")));
    }
    if !(x > T::zero() && x < T::one()) {
        return Err(Error::Domain(format!("asymptotics are stated for 0 < x < 1, got {x}")));
    }
    Ok(())
}

/// Denominator `√(2πt) α^{1-s₊/2}` shared by both asymptotic forms.
fn gaussian_width<T: Real>(alpha: T, t: T, sp: T) -> T {
    (T::lit(2.0) * T::PI() * t).sqrt() * alpha.powf(T::one() - sp / T::lit(2.0))
}

/// The theta-sum asymptotic for `v(t, x)` before taking the real part; the
/// imaginary part vanishes up to rounding because `±k` terms are conjugate.
pub fn asymp_v_theta_complex<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    x: T,
    tr: &AsympTruncation,
) -> Result<ComplexValue<T>> {
    check_unit_interval(t, x)?;
    let sp = s_plus(alpha, t, x)?;
    let l = alpha.ln();
    let ln_x = x.ln();
    let phase_step = T::lit(2.0) * T::PI() * ln_x / l;
    let term = |k: i64| {
        let phase = ComplexValue::new(T::zero(), phase_step * T::lit(k as f64)).exp();
        p.mellin(s_k(sp, k, alpha)) * phase
    };
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let centre = term(0);
    re.add(centre.re);
    im.add(centre.im);
    for k in 1..=tr.k_max as i64 {
        let pair = term(k) + term(-k);
        re.add(pair.re);
        im.add(pair.im);
    }
    let ln_pref = -sp * ln_x + (alpha.powf(T::lit(2.0) - sp) - T::one()) * t;
    let scale = ln_pref.exp() / (gaussian_width(alpha, t, sp) * l);
    Ok(ComplexValue::new(re.value(), im.value()) * scale)
}

/// Large-time approximation of `v(t, x)` from the saddles `s_k`, `|k| <= k_max`.
/// The `1 + o(t^{-β})` correction is omitted; `k_max = 0` keeps only the
/// smooth-kernel term `U0(s₊)`.
pub fn asymp_v_theta<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    x: T,
    tr: &AsympTruncation,
) -> Result<T> {
    asymp_v_theta_complex(p, alpha, t, x, tr).map(|z| z.re)
}

/// Poisson-resummed form of [`asymp_v_theta`]:
/// `e^{(α^{2-s₊}-1)t} Σ_n u0(α^n x) α^{s₊ n} / (√(2πt) α^{1-s₊/2})`.
pub fn asymp_v_poisson<T: Real>(
    p: &InitialProfile<T>,
    alpha: T,
    t: T,
    x: T,
    tr: &AsympTruncation,
) -> Result<T> {
    check_unit_interval(t, x)?;
    if p.is_dirac() {
        return Err(Error::NoPointwiseDensity);
    }
    let sp = s_plus(alpha, t, x)?;
    let l = alpha.ln();
    let ln_x = x.ln();
    let growth = (alpha.powf(T::lit(2.0) - sp) - T::one()) * t;
    let mut acc = CompensatedSum::new();
    for n in tr.n_range.0..=tr.n_range.1 {
        let shift = T::lit(n as f64) * l;
        // u0(α^n x) α^{s₊ n} = n0(ln x + n ln α) e^{-2 ln x + (s₊ - 2) n ln α}
        let ln_term = p.ln_eval_y(ln_x + shift)? - T::lit(2.0) * ln_x + (sp - T::lit(2.0)) * shift;
        acc.add((ln_term + growth).exp());
    }
    Ok(acc.value() / gaussian_width(alpha, t, sp))
}

/// Both displayed asymptotic forms for the growth-fragmentation density `u(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsympU<T> {
    pub theta: T,
    pub poisson: T,
}

/// Large-time approximation of `u(t, x)` for `b = 1`, written with
/// `s₊ = s₊(t, x e^{-gt})`. General `b` is reached by rescaling time.
pub fn asymp_u<T: Real>(
    params: &ModelParams<T>,
    p: &InitialProfile<T>,
    t: T,
    x: T,
    tr: &AsympTruncation,
) -> Result<AsympU<T>> {
    if params.b() != T::one() {
        return Err(Error::UnsupportedNormalization(params.b().as_f64()));
    }
    let (g, alpha) = (params.g(), params.alpha());
    let l = params.log_alpha();
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("size must be > 0, got {x}")));
    }
    let ln_z = x.ln() - g * t;
    let z = ln_z.exp();
    check_unit_interval(t, z)?;
    let sp = s_plus_on_ray(alpha, ln_z / t)?;
    let width = gaussian_width(alpha, t, sp);
    let two = T::lit(2.0);
    let k_factor = alpha.powf(two - sp);

    // theta form: x^{-s₊} e^{(α^{2-s₊} - 1 + g(s₊ - 1))t} Σ_k U0(s_k) e^{2πik ln(x e^{-gt})/ln α}
    let phase_step = two * T::PI() * ln_z / l;
    let term = |k: i64| {
        let phase = ComplexValue::new(T::zero(), phase_step * T::lit(k as f64)).exp();
        p.mellin(s_k(sp, k, alpha)) * phase
    };
    let mut re = CompensatedSum::new();
    re.add(term(0).re);
    for k in 1..=tr.k_max as i64 {
        re.add((term(k) + term(-k)).re);
    }
    let ln_pref = -sp * x.ln() + (k_factor - T::one() + g * (sp - T::one())) * t;
    let theta = re.value() * ln_pref.exp() / (width * l);

    // Poisson form: e^{(α^{2-s₊} - 1 - g)t} Σ_n u0(α^n x e^{-gt}) α^{s₊ n}
    let poisson = if p.is_dirac() {
        T::nan()
    } else {
        let growth = (k_factor - T::one() - g) * t;
        let mut acc = CompensatedSum::new();
        for n in tr.n_range.0..=tr.n_range.1 {
            let shift = T::lit(n as f64) * l;
            let ln_term = p.ln_eval_y(ln_z + shift)? - two * (ln_z + shift) + sp * shift;
            acc.add((ln_term + growth).exp());
        }
        acc.value() / width
    };
    Ok(AsympU { theta, poisson })
}
