//! Numerical laboratory for the critical growth-fragmentation equation
//!
//! ```text
//! ∂t u + ∂x (g x u) + b u = b α² u(t, α x)
//! ```
//!
//! solved by three independent routes: the explicit series ([`series`]), the
//! inverse Mellin contour integral ([`mellin`]) and a method-of-lines solver
//! on a log-size grid ([`pde`]). [`analysis`] holds the instruments used to
//! study the oscillatory long-time behaviour.
//!
//! All numerical code is generic over [`Real`]; the aliases at the crate root
//! fix the working precision to `f64`.
//!
//! ```
//! use growfrag::pde::{auto_y_range, build_grid, solve_n, SolveOptions};
//! use growfrag::{series, Profile, Truncation};
//!
//! let u0 = Profile::log_gaussian(0.0, 0.1, 1.0)?;
//! let exact = series::eval_v(&u0, 2.0, 5.0, 0.5, &Truncation::default())?;
//!
//! let (lo, hi) = auto_y_range(&u0, 2.0, 5.0, &[]);
//! let grid = build_grid(&u0, 2.0, lo, hi, 64)?;
//! let traj = solve_n(&grid, &SolveOptions::new(5.0).dt(0.01))?;
//! let on_grid = traj.v_from_grid(5.0, 0.5)?.value;
//! assert!((on_grid - exact).abs() < 1e-6 * exact);
//! # Ok::<(), growfrag::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod num;
pub mod params;
pub mod pde;
pub mod profile;
pub mod quad;
pub mod mellin;
pub mod series;

pub use error::{Error, Result};
pub use num::{ComplexValue, Real};
pub use params::ModelParams;
pub use profile::{InitialProfile, Shape};
pub use pde::{LogGrid, SolveOptions, Trajectory};
pub use series::{Atom, SeriesTruncation};
pub use analysis::{DensitySource, LineProbe, MellinSource, SeriesSource};

pub type Params = ModelParams<f64>;
pub type Profile = InitialProfile<f64>;
pub type Complex = ComplexValue<f64>;
pub type Truncation = SeriesTruncation<f64>;
pub type Grid = LogGrid<f64>;
pub type Solution = Trajectory<f64>;
pub type Probe = LineProbe<f64>;
