use super::{check_time, concentration, DensitySource};
use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};
use crate::profile::InitialProfile;
use crate::quad::integrate;

/// `∫ w(y) n(t, y) dy` for a profile-driven source, by adaptive quadrature
/// over lattice cells `[edge - (j+1) ln α, edge - j ln α]` aligned with both
/// support edges, so heaviside jumps always fall on cell boundaries.
pub(super) fn profile_pairing<T: Real, S: DensitySource<T> + ?Sized>(
    src: &S,
    p: &InitialProfile<T>,
    t: T,
    w: &dyn Fn(T) -> T,
) -> Result<T> {
    let (lo, hi) = p.support_y();
    let l = src.alpha().ln();
    let cells = t + T::lit(12.0) * t.sqrt() + T::lit(30.0) + (hi - lo) / l;
    let cells = cells.ceil().as_f64() as usize;
    let mut cuts: Vec<T> = (0..=cells)
        .flat_map(|j| {
            let shift = T::of_usize(j) * l;
            [hi - shift, lo - shift]
        })
        .filter(|&y| y >= lo - T::of_usize(cells) * l)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut"));
    cuts.dedup();

    let mass = src.mass();
    let abs_tol = T::lit(1e-15) * mass.abs() / T::of_usize(cuts.len().max(1));
    let rel_tol = T::lit(1e-12);
    let failure = std::cell::RefCell::new(None);
    let density = |y: T| match src.n(t, y) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            T::zero()
        }
    };
    let mut total = CompensatedSum::new();
    let mut inside = CompensatedSum::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let m = integrate(density, a, b, abs_tol, rel_tol)?;
        inside.add(m.value);
        let q = integrate(|y| w(y) * density(y), a, b, abs_tol, rel_tol)?;
        total.add(q.value);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let captured = inside.value();
    if (captured - mass).abs() > T::lit(1e-9) * mass.abs() {
        return Err(Error::WindowMissesMass(format!(
            "window holds {captured} of mass {mass} at t={t}"
        )));
    }
    Ok(total.value())
}

/// `∫ φ(y) r(t, y) dy`.
pub fn weak_test<T: Real, S: DensitySource<T> + ?Sized>(
    src: &S,
    phi: &dyn Fn(T) -> T,
    t: T,
) -> Result<T> {
    check_time(t)?;
    src.pairing(t, &|y| phi(y / t))
}

/// `∫ φ(z) r̃(t, z) dz`, to be compared with `U0(2) ∫ φ G`.
pub fn weak_test_tilde<T: Real, S: DensitySource<T> + ?Sized>(
    src: &S,
    phi: &dyn Fn(T) -> T,
    t: T,
) -> Result<T> {
    check_time(t)?;
    let (y0, sigma) = concentration(src.alpha());
    let stretch = t.sqrt() / sigma;
    src.pairing(t, &|y| phi((y / t - y0) * stretch))
}

/// `∫ φ(z) G(z) dz` for the standard normal density `G`.
pub fn standard_normal_pairing<T: Real>(phi: &dyn Fn(T) -> T) -> Result<T> {
    let norm = (T::lit(2.0) * T::PI()).sqrt();
    let half = T::lit(20.0);
    let mut acc = CompensatedSum::new();
    for j in 0..40 {
        let a = -half + T::of_usize(j);
        let q = integrate(
            |z| phi(z) * (-z * z / T::lit(2.0)).exp() / norm,
            a,
            a + T::one(),
            T::lit(1e-17),
            T::lit(1e-13),
        )?;
        acc.add(q.value);
    }
    Ok(acc.value())
}

/// `sin²(π (y - a) / (b - a))` on `[a, b]`, zero elsewhere: bounded and `C¹`.
pub fn bump<T: Real>(a: T, b: T) -> impl Fn(T) -> T {
    move |y: T| {
        if y <= a || y >= b {
            T::zero()
        } else {
            let s = (T::PI() * (y - a) / (b - a)).sin();
            s * s
        }
    }
}
