use crate::error::{Error, Result};
use crate::num::Real;
use crate::pde::LogGrid;
use crate::profile::{InitialProfile, Shape};

/// Location and height of the maximum of `√t n(t, ·)`.
pub fn envelope_peak<T: Real>(grid: &LogGrid<T>, t: T) -> (T, T) {
    let (y, n) = grid.argmax();
    (y, t.sqrt() * n)
}

/// Standard deviation of `y` under the density `n(t, ·)`: the width of the
/// gaussian with the same first two moments.
pub fn envelope_width<T: Real>(grid: &LogGrid<T>) -> T {
    let mass = grid.mass();
    let mean = grid.pair(|y| y) / mass;
    (grid.pair(|y| (y - mean) * (y - mean)) / mass).sqrt()
}

/// Step structure of a heaviside-started density inside a window.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavisideShape<T> {
    /// Node gaps whose jump exceeds `1e-9` of the window maximum.
    pub steps: usize,
    /// Of those, the gaps containing a translate `a - k ln α` or `b - k ln α`.
    pub steps_on_lattice: usize,
    /// Midpoint of the gap with the largest jump and whether it is on the lattice.
    pub steepest_y: T,
    pub steepest_on_lattice: bool,
    /// Fraction of gaps in the window with no jump at all.
    pub plateau_fraction: T,
}

impl<T: Real> HeavisideShape<T> {
    /// Plateaus separated by jumps that sit only at translated edges.
    pub fn keeps_shape(&self) -> bool {
        self.steps > 0 && self.steps == self.steps_on_lattice && self.steepest_on_lattice
    }
}

/// Classify the jumps of `n` between consecutive nodes in `[y_lo, y_hi]`.
pub fn heaviside_shape<T: Real>(
    grid: &LogGrid<T>,
    p: &InitialProfile<T>,
    y_lo: T,
    y_hi: T,
) -> Result<HeavisideShape<T>> {
    let Shape::LogHeaviside { a, b, .. } = *p.shape() else {
        return Err(Error::invalid("profile", "shape analysis needs a log-heaviside profile"));
    };
    let l = grid.alpha().ln();
    let dy = grid.dy();
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.y(i) >= y_lo && grid.y(i) <= y_hi)
        .collect();
    if idx.len() < 2 {
        return Err(Error::invalid("window", "fewer than two nodes inside"));
    }
    let v = grid.values();
    let top = idx.iter().map(|&i| v[i]).fold(T::zero(), T::max);
    // a translate lies in the gap (y_i, y_{i+1}] up to rounding of the edge
    let on_lattice = |y0: T, y1: T| {
        let slack = dy * T::lit(1e-6);
        [a, b].iter().any(|&edge| {
            let k_lo = ((edge - y1) / l).ceil().as_f64() as i64;
            let k_hi = ((edge - y0) / l).floor().as_f64() as i64;
            (k_lo - 1..=k_hi + 1).any(|k| {
                let z = edge - T::lit(k as f64) * l;
                z >= y0 - slack && z <= y1 + slack
            })
        })
    };
    let mut steps = 0;
    let mut steps_on_lattice = 0;
    let mut flat = 0;
    let mut steepest = (T::zero(), T::neg_infinity(), false);
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        let jump = (v[j] - v[i]).abs();
        let (y0, y1) = (grid.y(i), grid.y(j));
        let lattice = on_lattice(y0, y1);
        if jump > T::lit(1e-9) * top {
            steps += 1;
            if lattice {
                steps_on_lattice += 1;
            }
        } else if jump == T::zero() {
            flat += 1;
        }
        if jump > steepest.1 {
            steepest = ((y0 + y1) / T::lit(2.0), jump, lattice);
        }
    }
    Ok(HeavisideShape {
        steps,
        steps_on_lattice,
        steepest_y: steepest.0,
        steepest_on_lattice: steepest.2,
        plateau_fraction: T::of_usize(flat) / T::of_usize(idx.len() - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{auto_y_range, build_grid, solve_n, SolveOptions};

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn heaviside_keeps_its_steps() {
        let p = InitialProfile::log_heaviside(-1.0, 0.0, 1.0).unwrap();
        let t = 10.0;
        let (lo, hi) = auto_y_range(&p, 2.0, t, &[]);
        let grid = build_grid(&p, 2.0, lo, hi, 64).unwrap();
        let traj = solve_n(&grid, &SolveOptions::new(t)).unwrap();
        let snap = traj.grid_at(t).unwrap();
        let c = -t * LN2;
        let shape = heaviside_shape(&snap, &p, c - 3.0, c + 3.0).unwrap();
        assert!(shape.keeps_shape(), "{shape:?}");
        assert!(shape.plateau_fraction > 0.9);
        let g = InitialProfile::log_gaussian(0.0, 0.1, 1.0).unwrap();
        assert!(heaviside_shape(&snap, &g, c - 3.0, c + 3.0).is_err());
    }

    #[test]
    fn gaussian_is_not_a_step_function() {
        let g = InitialProfile::log_gaussian(0.0, 0.1, 1.0).unwrap();
        let grid = build_grid(&g, 2.0, -3.0, 1.2, 64).unwrap();
        let fake = InitialProfile::log_heaviside(-0.05, 0.05, 1.0).unwrap();
        let shape = heaviside_shape(&grid, &fake, -1.0, 1.0).unwrap();
        assert!(!shape.keeps_shape());
    }

    #[test]
    fn width_grows_like_root_t() {
        let p = InitialProfile::log_gaussian(0.0, 0.1, 1.0).unwrap();
        let (lo, hi) = auto_y_range(&p, 2.0, 40.0, &[]);
        let grid = build_grid(&p, 2.0, lo, hi, 64).unwrap();
        let traj = solve_n(&grid, &SolveOptions::new(40.0).dt(0.05).snapshots(vec![10.0, 40.0])).unwrap();
        let w10 = envelope_width(&traj.grid_at(10.0).unwrap());
        let w40 = envelope_width(&traj.grid_at(40.0).unwrap());
        // variance L² t + σ²
        assert!((w10 - (LN2 * LN2 * 10.0 + 0.01f64).sqrt()).abs() < 1e-8);
        assert!((w40 / w10 - 2.0).abs() < 0.01);
        let (y, _) = envelope_peak(&traj.grid_at(40.0).unwrap(), 40.0);
        assert!((y + 40.0 * LN2).abs() <= LN2 + 2.0 * grid.dy());
    }
}
