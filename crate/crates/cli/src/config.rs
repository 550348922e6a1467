//! Run configuration: a sectioned `key = value` file.
//!
//! ```text
//! [model]
//! alpha = 2
//! g = 0
//! b = 1
//! profile = loggaussian mu=0 sigma=0.1 mass=1
//!
//! [grid]
//! y_min = auto
//! y_max = auto
//! m = 64
//! ```
//!
//! Keys left out take their defaults; `auto` selects a value derived from
//! the rest of the configuration.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use growfrag::pde::{DEFAULT_CELLS_PER_LOG_ALPHA, DEFAULT_DT, DT_CAP};
use growfrag::{Params, Profile};
use ini::{Ini, ParseOption};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Svg,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(CliError::Config(format!("unknown output format `{s}` (csv, svg)"))),
        }
    }
}

/// Thresholds used by `analyze`.
#[derive(Clone, Debug, PartialEq)]
pub struct Checks {
    /// Relative tolerance on estimated periods.
    pub period_tol: f64,
    /// Relative drift allowed in `∫ n dy`.
    pub mass_tol: f64,
    /// Relative tolerance of `∫ cos(y) r(t_end, y) dy` against its limit.
    pub weak_tol: f64,
    pub pde_tol: f64,
    pub mellin_tol: f64,
    /// Largest relative error of the Poisson asymptotic on `x = α^{-t}` at the
    /// last of `asymp_times`.
    pub asymp_tol: f64,
    pub asymp_times: Vec<f64>,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            period_tol: 0.02,
            mass_tol: 1e-6,
            weak_tol: 0.02,
            pde_tol: 1e-7,
            mellin_tol: 1e-6,
            asymp_tol: 0.1,
            asymp_times: vec![10.0, 15.0, 20.0, 25.0, 30.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub g: f64,
    pub b: f64,
    pub profile: Profile,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub m: usize,
    pub t_end: f64,
    pub dt: f64,
    pub snapshots: Option<Vec<f64>>,
    pub rays: Option<Vec<f64>>,
    pub window_start: Option<f64>,
    pub compare_t: Vec<f64>,
    pub compare_x: Vec<f64>,
    pub checks: Checks,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            g: 0.0,
            b: 1.0,
            profile: Profile::log_gaussian(0.0, 0.1, 1.0).expect("valid default profile"),
            y_min: None,
            y_max: None,
            m: DEFAULT_CELLS_PER_LOG_ALPHA,
            t_end: 60.0,
            dt: DEFAULT_DT,
            snapshots: None,
            rays: None,
            window_start: None,
            compare_t: vec![1.0, 5.0],
            compare_x: vec![0.25, 0.5, 0.75],
            checks: Checks::default(),
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg],
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("model", &["alpha", "g", "b", "profile"]),
    ("grid", &["y_min", "y_max", "m"]),
    ("time", &["t_end", "dt", "snapshots"]),
    ("probes", &["rays", "window_start"]),
    ("compare", &["t", "x"]),
    (
        "checks",
        &["period_tol", "mass_tol", "weak_tol", "pde_tol", "mellin_tol", "asymp_tol", "asymp_times"],
    ),
    ("output", &["dir", "formats"]),
];

fn bad(key: &str, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {why}"))
}

fn real(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.trim().parse().map_err(|_| bad(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(x)
}

fn auto_real(key: &str, v: &str) -> Result<Option<f64>, CliError> {
    if v.trim() == "auto" {
        Ok(None)
    } else {
        real(key, v).map(Some)
    }
}

fn reals(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| real(key, s)).collect()
}

fn auto_reals(key: &str, v: &str) -> Result<Option<Vec<f64>>, CliError> {
    if v.trim() == "auto" {
        Ok(None)
    } else {
        reals(key, v).map(Some)
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn or_auto(v: Option<f64>) -> String {
    v.map_or("auto".into(), |x| x.to_string())
}

impl RunConfig {
    /// Parse a configuration file body; omitted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let opts = ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(text, opts).map_err(|e| CliError::Config(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let Some(section) = section else {
                    return Err(CliError::Config(format!("key `{key}` appears before any [section]")));
                };
                let name = format!("{section}.{key}");
                if !seen.insert(name.clone()) {
                    return Err(CliError::Config(format!("duplicate key `{name}`")));
                }
                cfg.set(&name, value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assign one `section.key`; the value uses the file syntax.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        let (section, key) = name
            .split_once('.')
            .ok_or_else(|| CliError::Config(format!("`{name}` is not of the form section.key")))?;
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| CliError::Config(format!("unknown section [{section}]")))?;
        if !known.1.contains(&key) {
            return Err(CliError::Config(format!("unknown key `{key}` in [{section}]")));
        }
        let v = value.trim();
        match name {
            "model.alpha" => self.alpha = real(name, v)?,
            "model.g" => self.g = real(name, v)?,
            "model.b" => self.b = real(name, v)?,
            "model.profile" => self.profile = v.parse().map_err(|e| bad(name, e))?,
            "grid.y_min" => self.y_min = auto_real(name, v)?,
            "grid.y_max" => self.y_max = auto_real(name, v)?,
            "grid.m" => self.m = v.parse().map_err(|_| bad(name, format!("`{v}` is not a positive integer")))?,
            "time.t_end" => self.t_end = real(name, v)?,
            "time.dt" => self.dt = real(name, v)?,
            "time.snapshots" => self.snapshots = auto_reals(name, v)?,
            "probes.rays" => self.rays = auto_reals(name, v)?,
            "probes.window_start" => self.window_start = auto_real(name, v)?,
            "compare.t" => self.compare_t = reals(name, v)?,
            "compare.x" => self.compare_x = reals(name, v)?,
            "checks.period_tol" => self.checks.period_tol = real(name, v)?,
            "checks.mass_tol" => self.checks.mass_tol = real(name, v)?,
            "checks.weak_tol" => self.checks.weak_tol = real(name, v)?,
            "checks.pde_tol" => self.checks.pde_tol = real(name, v)?,
            "checks.mellin_tol" => self.checks.mellin_tol = real(name, v)?,
            "checks.asymp_tol" => self.checks.asymp_tol = real(name, v)?,
            "checks.asymp_times" => self.checks.asymp_times = reals(name, v)?,
            "output.dir" => {
                if v.is_empty() {
                    return Err(bad(name, "must not be empty"));
                }
                self.out_dir = PathBuf::from(v);
            }
            "output.formats" => {
                let mut fs = v
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<Vec<Format>, _>>()?;
                fs.sort();
                fs.dedup();
                self.formats = fs;
            }
            _ => unreachable!("key table and match arms disagree on `{name}`"),
        }
        Ok(())
    }

    /// Re-check every invariant, as after any override.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        if self.m == 0 {
            return Err(bad("grid.m", "must be >= 1"));
        }
        if let (Some(lo), Some(hi)) = (self.y_min, self.y_max) {
            if lo >= hi {
                return Err(bad("grid.y_min", "must be below grid.y_max"));
            }
        }
        if let Some(hi) = self.y_max {
            let (_, edge) = self.profile.support_y();
            if !self.profile.is_dirac() && hi < edge - 1e-9 * edge.abs().max(1.0) {
                return Err(bad("grid.y_max", format!("{hi} is left of the profile support edge {edge}")));
            }
        }
        if self.t_end < 0.0 {
            return Err(bad("time.t_end", "must be >= 0"));
        }
        if !(self.dt > 0.0 && self.dt <= DT_CAP) {
            return Err(bad("time.dt", format!("must lie in (0, {DT_CAP}]")));
        }
        if let Some(s) = &self.snapshots {
            if let Some(t) = s.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
                return Err(bad("time.snapshots", format!("{t} outside [0, t_end]")));
            }
        }
        if let Some(r) = &self.rays {
            if r.iter().any(|&y| y >= 0.0) {
                return Err(bad("probes.rays", "ray slopes must be < 0"));
            }
        }
        if let Some(w) = self.window_start {
            if !(0.0..=self.t_end).contains(&w) {
                return Err(bad("probes.window_start", "must lie in [0, t_end]"));
            }
        }
        if self.compare_t.iter().any(|&t| t < 0.0) {
            return Err(bad("compare.t", "times must be >= 0"));
        }
        if self.compare_x.iter().any(|&x| x <= 0.0) {
            return Err(bad("compare.x", "sizes must be > 0"));
        }
        let c = &self.checks;
        for (name, v) in [
            ("checks.period_tol", c.period_tol),
            ("checks.mass_tol", c.mass_tol),
            ("checks.weak_tol", c.weak_tol),
            ("checks.pde_tol", c.pde_tol),
            ("checks.mellin_tol", c.mellin_tol),
            ("checks.asymp_tol", c.asymp_tol),
        ] {
            if v < 0.0 {
                return Err(bad(name, "must be >= 0"));
            }
        }
        if c.asymp_times.iter().any(|&t| t <= 0.0) {
            return Err(bad("checks.asymp_times", "times must be > 0"));
        }
        if self.formats.is_empty() {
            return Err(bad("output.formats", "name at least one of csv, svg"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Ok(Params::new(self.g, self.b, self.alpha)?)
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        match &self.snapshots {
            Some(s) => s.clone(),
            None => {
                let mut ts: Vec<f64> = (0..=4).map(|i| self.t_end * i as f64 / 4.0).collect();
                ts.dedup();
                ts
            }
        }
    }

    /// Ray slopes; by default `-2 ln α`, `-ln α`, `-ln α / 2`.
    pub fn ray_slopes(&self) -> Vec<f64> {
        match &self.rays {
            Some(r) => r.clone(),
            None => {
                let l = self.alpha.ln();
                vec![-2.0 * l, -l, -0.5 * l]
            }
        }
    }

    pub fn period_window_start(&self) -> f64 {
        self.window_start.unwrap_or(self.t_end / 3.0)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let c = &self.checks;
        let _ = writeln!(s, "[model]\nalpha = {}\ng = {}\nb = {}\nprofile = {}\n", self.alpha, self.g, self.b, self.profile);
        let _ = writeln!(s, "[grid]\ny_min = {}\ny_max = {}\nm = {}\n", or_auto(self.y_min), or_auto(self.y_max), self.m);
        let snaps = self.snapshots.as_deref().map_or("auto".into(), join);
        let _ = writeln!(s, "[time]\nt_end = {}\ndt = {}\nsnapshots = {snaps}\n", self.t_end, self.dt);
        let rays = self.rays.as_deref().map_or("auto".into(), join);
        let _ = writeln!(s, "[probes]\nrays = {rays}\nwindow_start = {}\n", or_auto(self.window_start));
        let _ = writeln!(s, "[compare]\nt = {}\nx = {}\n", join(&self.compare_t), join(&self.compare_x));
        let _ = writeln!(
            s,
            "[checks]\nperiod_tol = {}\nmass_tol = {}\nweak_tol = {}\npde_tol = {}\nmellin_tol = {}\nasymp_tol = {}\nasymp_times = {}\n",
            c.period_tol,
            c.mass_tol,
            c.weak_tol,
            c.pde_tol,
            c.mellin_tol,
            c.asymp_tol,
            join(&c.asymp_times)
        );
        let formats: Vec<_> = self.formats.iter().map(|f| f.name()).collect();
        let _ = write!(s, "[output]\ndir = {}\nformats = {}\n", self.out_dir.display(), formats.join(", "));
        f.write_str(&s)
    }
}
