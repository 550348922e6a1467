//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::num::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature<T = f64> {
    pub value: T,
    pub error: T,
}

#[derive(Clone, Copy, Debug)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.as_f64().total_cmp(&other.error.as_f64())
    }
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let pair = f(c - dx) + f(c + dx);
        kronrod += T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`, splitting the worst segment each round.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<Quadrature<T>> {
    const MAX_SEGMENTS: usize = 4000;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("quadrature bounds must be finite".into()));
    }
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureInaccurate {
                estimate: err.as_f64(),
                tolerance: abs_tol.max(rel_tol * total.abs()).as_f64(),
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let mut segs: Vec<Segment<T>> = heap.into_vec();
    segs.sort_by(|p, q| p.a.as_f64().total_cmp(&q.a.as_f64()));
    let value = crate::num::compensated_sum(segs.iter().map(|s| s.value));
    let error = crate::num::compensated_sum(segs.iter().map(|s| s.error));
    Ok(Quadrature { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x: f64| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((q.value - (255.0 / 8.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let q = integrate(|x: f64| (40.0 * x).cos(), 0.0, 3.0, 1e-13, 1e-13).unwrap();
        assert!((q.value - (120.0_f64).sin() / 40.0).abs() < 1e-12);
        let q = integrate(|x: f64| (-(x / 0.01).powi(2)).exp(), -1.0, 1.0, 1e-14, 1e-13).unwrap();
        assert!((q.value - 0.01 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
