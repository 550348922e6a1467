use super::LineProbe;
use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};

/// Relative amplitude below which a probe is reported as non-oscillating.
pub const NO_OSCILLATION: f64 = 1e-3;

const MIN_SAMPLES_PER_CYCLE: usize = 32;
const MIN_CYCLES: usize = 3;
const DETREND_CYCLES: f64 = 3.0;

/// Period read off the autocorrelation of a detrended probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodEstimate<T> {
    pub period: T,
    /// Autocorrelation peak over the largest competing local maximum
    /// between the first zero crossing and the peak (floored at 1e-3).
    pub confidence: T,
    /// Whole cycles of the estimated period inside the probe window.
    pub n_cycles: usize,
    /// Half the peak-to-peak range of the detrended, normalized probe.
    pub amplitude: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PeriodOutcome<T> {
    Periodic(PeriodEstimate<T>),
    NoOscillation { amplitude: T },
}

impl<T: Real> PeriodOutcome<T> {
    pub fn period(&self) -> Option<T> {
        match self {
            Self::Periodic(e) => Some(e.period),
            Self::NoOscillation { .. } => None,
        }
    }

    pub fn amplitude(&self) -> T {
        match self {
            Self::Periodic(e) => e.amplitude,
            Self::NoOscillation { amplitude } => *amplitude,
        }
    }
}

/// Relative fluctuation `f / mean - 1`, the mean taken over a centred window
/// of three expected periods (trapezoidal weights). Only samples whose
/// window fits inside the probe are returned.
fn detrend<T: Real>(probe: &LineProbe<T>) -> Result<(T, Vec<T>)> {
    let times = probe.times();
    let n = times.len();
    if n < 2 {
        return Err(Error::WindowTooShort("fewer than two samples".into()));
    }
    let dt = (times[n - 1] - times[0]) / T::of_usize(n - 1);
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= T::lit(1e-6) * dt);
    if !uniform {
        return Err(Error::invalid("times", "period estimation needs uniform sampling"));
    }
    let expected = probe.expected_period();
    let per_cycle = (expected / dt).as_f64();
    if per_cycle < MIN_SAMPLES_PER_CYCLE as f64 - 1e-9 {
        return Err(Error::WindowTooShort(format!(
            "{per_cycle:.1} samples per expected cycle, need {MIN_SAMPLES_PER_CYCLE}"
        )));
    }
    let half = (DETREND_CYCLES * per_cycle / 2.0).round() as usize;
    let needed = 2 * half + (MIN_CYCLES as f64 * per_cycle).ceil() as usize;
    if n < needed {
        return Err(Error::WindowTooShort(format!(
            "{n} samples, need {needed} ({MIN_CYCLES} cycles plus the detrending window)"
        )));
    }
    let v = probe.values();
    let mut out = Vec::with_capacity(n - 2 * half);
    let width = T::of_usize(2 * half);
    for i in half..n - half {
        let mut acc: CompensatedSum<T> = v[i - half..=i + half].iter().copied().collect();
        acc.add(-(v[i - half] + v[i + half]) / T::lit(2.0));
        let mean = acc.value() / width;
        if !(mean.abs() > T::zero()) {
            return Err(Error::Domain("probe mean vanishes; cannot normalize".into()));
        }
        out.push(v[i] / mean - T::one());
    }
    Ok((dt, out))
}

fn half_range<T: Real>(d: &[T]) -> T {
    let (lo, hi) = d
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    (hi - lo) / T::lit(2.0)
}

/// Relative oscillation amplitude of a probe after detrending.
pub fn oscillation_amplitude<T: Real>(probe: &LineProbe<T>) -> Result<T> {
    Ok(half_range(&detrend(probe)?.1))
}

/// Autocorrelation period of a probe: detrend, correlate, take the first
/// dominant peak after the first zero crossing and refine it parabolically.
pub fn estimate_period<T: Real>(probe: &LineProbe<T>) -> Result<PeriodOutcome<T>> {
    let (dt, d) = detrend(probe)?;
    let amplitude = half_range(&d);
    if amplitude < T::lit(NO_OSCILLATION) {
        return Ok(PeriodOutcome::NoOscillation { amplitude });
    }
    let n = d.len();
    let mean = d.iter().copied().collect::<CompensatedSum<T>>().value() / T::of_usize(n);
    let c: Vec<T> = d.iter().map(|&x| x - mean).collect();
    let max_lag = n / 2;
    let ac: Vec<T> = (0..=max_lag)
        .map(|lag| {
            let s: CompensatedSum<T> = (0..n - lag).map(|i| c[i] * c[i + lag]).collect();
            s.value() / T::of_usize(n - lag)
        })
        .collect();
    let var = ac[0];
    let ac: Vec<T> = ac.iter().map(|&a| a / var).collect();

    let no_peak = || Error::WindowTooShort("autocorrelation has no peak after its first zero".into());
    let zero = ac.iter().position(|&a| a < T::zero()).ok_or_else(no_peak)?;
    let top = ac[zero..].iter().copied().fold(T::neg_infinity(), T::max);
    if !(top > T::zero()) {
        return Err(no_peak());
    }
    let is_local_max = |k: usize| k < max_lag && ac[k] >= ac[k - 1] && ac[k] >= ac[k + 1];
    let peak = (zero.max(1)..max_lag)
        .find(|&k| is_local_max(k) && ac[k] >= T::lit(0.8) * top)
        .ok_or_else(no_peak)?;
    let secondary = (zero.max(1)..peak)
        .filter(|&k| is_local_max(k))
        .map(|k| ac[k])
        .fold(T::zero(), T::max);
    let (a, b, cc) = (ac[peak - 1], ac[peak], ac[peak + 1]);
    let curvature = a - T::lit(2.0) * b + cc;
    let shift = if curvature < T::zero() {
        T::lit(0.5) * (a - cc) / curvature
    } else {
        T::zero()
    };
    let period = (T::of_usize(peak) + shift) * dt;
    let span = *probe.times().last().expect("non-empty") - probe.times()[0];
    let n_cycles = (span / period).floor().as_f64() as usize;
    if n_cycles < MIN_CYCLES {
        return Err(Error::WindowTooShort(format!(
            "only {n_cycles} cycles of period {period} observed"
        )));
    }
    Ok(PeriodOutcome::Periodic(PeriodEstimate {
        period,
        confidence: b / secondary.max(T::lit(1e-3)),
        n_cycles,
        amplitude,
    }))
}

#[cfg(test)]
mod tests {
    use super::super::uniform_times;
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn synthetic(period: f64, amp: f64, t0: f64, t1: f64, per_cycle: usize) -> LineProbe<f64> {
        let n = ((t1 - t0) / period * per_cycle as f64).round() as usize + 1;
        let ts = uniform_times(t0, t1, n);
        let vs = ts
            .iter()
            .map(|&t| (1.0 + 0.3 / t.sqrt()) * (1.0 + amp * (2.0 * std::f64::consts::PI * t / period).sin()))
            .collect();
        LineProbe::new(-LN2 / period, 2.0, ts, vs).unwrap()
    }

    #[test]
    fn sinusoid_period_within_one_sample() {
        for period in [0.5, 1.0, 2.0] {
            let probe = synthetic(period, 0.2, 20.0, 20.0 + 12.0 * period, 64);
            let dt = probe.times()[1] - probe.times()[0];
            let est = estimate_period(&probe).unwrap();
            let PeriodOutcome::Periodic(e) = est else { panic!("no oscillation") };
            assert!((e.period - period).abs() < dt, "{} vs {period}", e.period);
            assert!(e.n_cycles >= 11);
            assert!((e.amplitude - 0.2).abs() < 0.01);
            assert!(e.confidence > 10.0);
        }
    }

    #[test]
    fn flat_probe_reports_no_oscillation() {
        let probe = synthetic(1.0, 1e-5, 10.0, 20.0, 64);
        let est = estimate_period(&probe).unwrap();
        assert!(est.period().is_none());
        assert!(est.amplitude() < 1e-4);
    }

    #[test]
    fn short_or_sparse_windows_error() {
        let short = synthetic(1.0, 0.1, 10.0, 14.0, 64);
        assert!(matches!(estimate_period(&short), Err(Error::WindowTooShort(_))));
        let sparse = synthetic(1.0, 0.1, 10.0, 30.0, 16);
        assert!(matches!(estimate_period(&sparse), Err(Error::WindowTooShort(_))));
    }

    #[test]
    fn harmonics_do_not_fool_the_peak_finder() {
        let ts = uniform_times(0.0, 10.0, 641);
        let tau = 2.0 * std::f64::consts::PI;
        let vs = ts
            .iter()
            .map(|&t| 2.0 + (tau * t).cos() + 0.5 * (2.0 * tau * t).cos() + 0.33 * (3.0 * tau * t).cos())
            .collect();
        let probe = LineProbe::new(-LN2, 2.0, ts, vs).unwrap();
        let e = estimate_period(&probe).unwrap();
        assert!((e.period().unwrap() - 1.0).abs() < 1.0 / 64.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn recovers_random_periods(period in 0.3f64..3.0, amp in 0.01f64..0.5, phase in 0.0f64..6.3) {
            let n = (10.0 * 48.0) as usize + 1;
            let ts = uniform_times(5.0, 5.0 + 10.0 * period, n);
            let vs = ts.iter().map(|&t| 1.0 + amp * (2.0 * std::f64::consts::PI * t / period + phase).sin()).collect();
            let probe = LineProbe::new(-LN2 / period, 2.0, ts.clone(), vs).unwrap();
            let e = estimate_period(&probe).unwrap();
            prop_assert!((e.period().unwrap() - period).abs() < ts[1] - ts[0]);
        }
    }
}
