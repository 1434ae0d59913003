//! Seeded synthetic load and electricity-price series.
//!
//! Real network data is proprietary, so scenarios run on reproducible
//! synthetic substitutes: a seasonal sinusoid modulated by a two-peak daily
//! profile with small seeded noise, normalized to a yearly energy target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::time::TimeVector;

use super::PlantError;

/// Seed used whenever a scenario does not declare one.
pub const DEFAULT_SEED: u64 = 0x5EED_0001;

const HOUR: i64 = 3600;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLoadSpec {
    /// Yearly energy target in MWh; the series is scaled to hit it.
    pub annual_mwh: f64,
    /// Number of hourly points (one non-leap year by default).
    pub n_hours: usize,
    /// Largest load the plant can serve; normalization must stay below it.
    pub peak_limit_mw: f64,
    pub seed: u64,
    /// Relative winter/summer swing of the seasonal sinusoid.
    pub seasonal_amplitude: f64,
    /// Relative height of the morning (~07:00) and evening (~19:00) peaks.
    pub morning_peak: f64,
    pub evening_peak: f64,
    /// Gaussian width of the daily peaks, in hours.
    pub peak_width_h: f64,
    /// Relative amplitude of the uniform multiplicative noise.
    pub noise_amplitude: f64,
    /// Absolute time of the first point (midnight, January 1st).
    pub origin: i64,
}

impl Default for SyntheticLoadSpec {
    fn default() -> Self {
        Self {
            annual_mwh: 21_217.0,
            n_hours: 8760,
            // gas 9.8 + biomass 3.05 + storage 1.0
            peak_limit_mw: 13.85,
            seed: DEFAULT_SEED,
            seasonal_amplitude: 0.5,
            morning_peak: 0.4,
            evening_peak: 0.5,
            peak_width_h: 2.0,
            noise_amplitude: 0.05,
            origin: 0,
        }
    }
}

fn gauss_bump(hour_of_day: f64, center: f64, width: f64) -> f64 {
    let d = hour_of_day - center;
    (-d * d / (2.0 * width * width)).exp()
}

/// Generates the hourly heat-load series (MW at hourly instants; one point
/// per hour, so MW values double as MWh per interval).
pub fn generate_synthetic_load(spec: &SyntheticLoadSpec) -> Result<TimeVector, PlantError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_hours;
    let mut raw = Vec::with_capacity(n);
    for h in 0..n {
        let seasonal = 1.0
            + spec.seasonal_amplitude * (2.0 * std::f64::consts::PI * h as f64 / 8760.0).cos();
        let hod = (h % 24) as f64;
        let daily = 1.0
            + spec.morning_peak * gauss_bump(hod, 7.0, spec.peak_width_h)
            + spec.evening_peak * gauss_bump(hod, 19.0, spec.peak_width_h);
        let noise = 1.0 + rng.gen_range(-spec.noise_amplitude..=spec.noise_amplitude);
        raw.push(seasonal * daily * noise);
    }
    let sum: f64 = raw.iter().sum();
    let scale = spec.annual_mwh / sum;
    let values: Vec<f64> = raw.iter().map(|v| v * scale).collect();
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak > spec.peak_limit_mw {
        return Err(PlantError::SpecInfeasible { peak_mw: peak, capacity_mw: spec.peak_limit_mw });
    }
    let times: Vec<i64> = (0..n).map(|h| spec.origin + h as i64 * HOUR).collect();
    Ok(TimeVector::new(times, values, "MW")?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPriceSpec {
    /// Off-peak electricity price, €/MWh.
    pub base: f64,
    /// Peak electricity price, €/MWh (daily hours `peak_hours`).
    pub peak: f64,
    /// Peak window as hours of day `[start, end)`.
    pub peak_hours: (u32, u32),
    pub n_points: usize,
    /// Sampling step in seconds.
    pub step_s: i64,
    pub seed: u64,
    /// Relative amplitude of multiplicative noise.
    pub noise_amplitude: f64,
    pub origin: i64,
}

impl Default for SyntheticPriceSpec {
    fn default() -> Self {
        Self {
            base: 40.0,
            peak: 100.0,
            peak_hours: (8, 20),
            n_points: 8760,
            step_s: HOUR,
            seed: DEFAULT_SEED ^ 0xE1EC,
            noise_amplitude: 0.02,
            origin: 0,
        }
    }
}

/// Two-level daily electricity price with small seeded noise; the peak to
/// off-peak ratio follows directly from `peak / base`.
pub fn generate_synthetic_price(spec: &SyntheticPriceSpec) -> Result<TimeVector, PlantError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut times = Vec::with_capacity(spec.n_points);
    let mut values = Vec::with_capacity(spec.n_points);
    for k in 0..spec.n_points {
        let t = spec.origin + k as i64 * spec.step_s;
        let hod = ((t.rem_euclid(24 * HOUR)) / HOUR) as u32;
        let level = if hod >= spec.peak_hours.0 && hod < spec.peak_hours.1 {
            spec.peak
        } else {
            spec.base
        };
        let noise = 1.0 + rng.gen_range(-spec.noise_amplitude..=spec.noise_amplitude);
        times.push(t);
        values.push(level * noise);
    }
    Ok(TimeVector::new(times, values, "EUR/MWh")?)
}

/// Extends a periodic series past its end by wrapping values from its start
/// (used to keep forecasts covering the final MPC windows of a yearly run).
pub fn extend_wrapped(tv: &TimeVector, extra_points: usize, step_s: i64) -> TimeVector {
    let mut times = tv.times().to_vec();
    let mut values = tv.values().to_vec();
    let last = tv.last_time();
    for k in 0..extra_points {
        times.push(last + (k as i64 + 1) * step_s);
        values.push(tv.values()[k % tv.len()]);
    }
    TimeVector::new(times, values, tv.unit()).expect("times remain increasing")
}
