//! Time bookkeeping: the tick-based time grid and timestamped value vectors.
//!
//! All absolute times are integer seconds since an arbitrary epoch and all
//! periods are integer seconds, so multi-day runs never accumulate floating
//! point drift.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TimeError {
    #[error("base period must be positive, got {0}")]
    InvalidPeriod(i64),
    #[error("time vector must have at least one point")]
    Empty,
    #[error("times and values have different lengths ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("times must be strictly increasing (t[{index}] = {time} does not increase)")]
    NotIncreasing { index: usize, time: i64 },
    #[error("shift of {dt} s expires every point (span is {span} s)")]
    AllPointsExpired { dt: i64, span: i64 },
    #[error("negative shift {0} is not allowed")]
    NegativeShift(i64),
    #[error("sample time {t} outside span [{first}, {last}]")]
    OutOfRange { t: i64, first: i64, last: i64 },
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Exact simulation clock: `current time = origin + tick * base_period`.
///
/// The base period is immutable after construction; only the tick counter
/// advances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeGrid {
    origin: i64,
    base_period: i64,
    tick: u64,
}

impl TimeGrid {
    pub fn new(origin: i64, base_period: i64) -> Result<Self, TimeError> {
        if base_period <= 0 {
            return Err(TimeError::InvalidPeriod(base_period));
        }
        Ok(Self { origin, base_period, tick: 0 })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn base_period(&self) -> i64 {
        self.base_period
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn current_time(&self) -> i64 {
        self.origin + self.tick as i64 * self.base_period
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }

    /// Number of ticks needed to reach `t_end` from the origin.
    /// `t_end` must lie exactly on the grid.
    pub fn ticks_to(&self, t_end: i64) -> Option<u64> {
        let span = t_end - self.origin;
        if span < 0 || span % self.base_period != 0 {
            return None;
        }
        Some((span / self.base_period) as u64)
    }
}

/// Interpolation mode used when sampling a [`TimeVector`] at an arbitrary time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Value of the greatest sample time not after the query time.
    HoldLast,
    /// Linear interpolation between the bracketing samples.
    Linear,
}

/// One quantity observed or forecast at several instants.
///
/// Times are strictly increasing; the vector is immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVector {
    times: Vec<i64>,
    values: Vec<f64>,
    unit: String,
}

impl TimeVector {
    pub fn new(times: Vec<i64>, values: Vec<f64>, unit: impl Into<String>) -> Result<Self, TimeError> {
        if times.is_empty() {
            return Err(TimeError::Empty);
        }
        if times.len() != values.len() {
            return Err(TimeError::LengthMismatch { times: times.len(), values: values.len() });
        }
        for i in 1..times.len() {
            if times[i] <= times[i - 1] {
                return Err(TimeError::NotIncreasing { index: i, time: times[i] });
            }
        }
        Ok(Self { times, values, unit: unit.into() })
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: length >= 1
    }

    pub fn first_time(&self) -> i64 {
        self.times[0]
    }

    pub fn last_time(&self) -> i64 {
        *self.times.last().unwrap()
    }

    pub fn span(&self) -> i64 {
        self.last_time() - self.first_time()
    }

    /// Drops every point strictly before `first_time + dt`. Times are kept
    /// unchanged; only expired points disappear.
    pub fn shift(&self, dt: i64) -> Result<TimeVector, TimeError> {
        if dt < 0 {
            return Err(TimeError::NegativeShift(dt));
        }
        if dt > self.span() {
            return Err(TimeError::AllPointsExpired { dt, span: self.span() });
        }
        let new_origin = self.times[0] + dt;
        let start = self.times.partition_point(|&t| t < new_origin);
        Ok(TimeVector {
            times: self.times[start..].to_vec(),
            values: self.values[start..].to_vec(),
            unit: self.unit.clone(),
        })
    }

    /// Samples the vector at `t`, which must lie within the covered span.
    pub fn sample(&self, t: i64, mode: SampleMode) -> Result<f64, TimeError> {
        if t < self.first_time() || t > self.last_time() {
            return Err(TimeError::OutOfRange { t, first: self.first_time(), last: self.last_time() });
        }
        // index of the last sample time <= t
        let idx = self.times.partition_point(|&ti| ti <= t) - 1;
        match mode {
            SampleMode::HoldLast => Ok(self.values[idx]),
            SampleMode::Linear => {
                if self.times[idx] == t || idx + 1 == self.len() {
                    Ok(self.values[idx])
                } else {
                    let (t0, t1) = (self.times[idx] as f64, self.times[idx + 1] as f64);
                    let (v0, v1) = (self.values[idx], self.values[idx + 1]);
                    Ok(v0 + (v1 - v0) * (t as f64 - t0) / (t1 - t0))
                }
            }
        }
    }

    /// Keeps only the points with time in `[from, to]` (inclusive).
    pub fn window(&self, from: i64, to: i64) -> Result<TimeVector, TimeError> {
        let start = self.times.partition_point(|&t| t < from);
        let end = self.times.partition_point(|&t| t <= to);
        if start >= end {
            return Err(TimeError::OutOfRange { t: from, first: self.first_time(), last: self.last_time() });
        }
        TimeVector::new(self.times[start..end].to_vec(), self.values[start..end].to_vec(), self.unit.clone())
    }

    /// Merges `other` into `self`; at coinciding times the new value wins.
    pub fn overlay(&self, other: &TimeVector) -> TimeVector {
        let mut times = Vec::with_capacity(self.len() + other.len());
        let mut values = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            if i < self.len() && (j >= other.len() || self.times[i] < other.times[j]) {
                times.push(self.times[i]);
                values.push(self.values[i]);
                i += 1;
            } else {
                if i < self.len() && self.times[i] == other.times[j] {
                    i += 1; // replaced by the new sample
                }
                times.push(other.times[j]);
                values.push(other.values[j]);
                j += 1;
            }
        }
        TimeVector { times, values, unit: self.unit.clone() }
    }

    /// Writes the `time,value` CSV form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), TimeError> {
        let io = |e: std::io::Error| TimeError::Io(e.to_string());
        writeln!(w, "time,value").map_err(io)?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t},{v}").map_err(io)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<(), TimeError> {
        let f = std::fs::File::create(path).map_err(|e| TimeError::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads the `time,value` CSV form produced by [`TimeVector::write_csv`].
    pub fn read_csv<R: Read>(r: R, unit: impl Into<String>) -> Result<TimeVector, TimeError> {
        let reader = BufReader::new(r);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| TimeError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 && line.eq_ignore_ascii_case("time,value") {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let parse = |s: Option<&str>, what: &str| -> Result<String, TimeError> {
                s.map(|s| s.trim().to_string()).ok_or_else(|| TimeError::CsvParse {
                    line: lineno + 1,
                    message: format!("missing {what}"),
                })
            };
            let t = parse(parts.next(), "time")?;
            let v = parse(parts.next(), "value")?;
            let t: i64 = t.parse().map_err(|_| TimeError::CsvParse {
                line: lineno + 1,
                message: format!("bad time {t:?}"),
            })?;
            let v: f64 = v.parse().map_err(|_| TimeError::CsvParse {
                line: lineno + 1,
                message: format!("bad value {v:?}"),
            })?;
            times.push(t);
            values.push(v);
        }
        TimeVector::new(times, values, unit)
    }

    pub fn read_csv_file(path: &Path, unit: impl Into<String>) -> Result<TimeVector, TimeError> {
        let f = std::fs::File::open(path).map_err(|e| TimeError::Io(format!("{}: {e}", path.display())))?;
        TimeVector::read_csv(f, unit)
    }
}

impl fmt::Display for TimeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeVector[{} pts, {}..{}, {}]", self.len(), self.first_time(), self.last_time(), self.unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(times: &[i64], values: &[f64]) -> TimeVector {
        TimeVector::new(times.to_vec(), values.to_vec(), "MW").unwrap()
    }

    #[test]
    fn grid_time_is_exact() {
        let mut g = TimeGrid::new(1_000_000, 3600).unwrap();
        for _ in 0..24 * 365 {
            g.advance();
        }
        assert_eq!(g.current_time(), 1_000_000 + 8760 * 3600);
        assert_eq!(g.ticks_to(1_000_000 + 10 * 3600), Some(10));
        assert_eq!(g.ticks_to(1_000_000 + 1800), None);
    }

    #[test]
    fn grid_rejects_nonpositive_period() {
        assert_eq!(TimeGrid::new(0, 0).unwrap_err(), TimeError::InvalidPeriod(0));
    }

    #[test]
    fn vector_validation() {
        assert_eq!(TimeVector::new(vec![], vec![], "x").unwrap_err(), TimeError::Empty);
        assert!(matches!(
            TimeVector::new(vec![0, 0], vec![1.0, 2.0], "x").unwrap_err(),
            TimeError::NotIncreasing { index: 1, .. }
        ));
        assert!(matches!(
            TimeVector::new(vec![0], vec![], "x").unwrap_err(),
            TimeError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn shift_drops_expired_points() {
        let v = tv(&[0, 3600, 7200], &[1.0, 2.0, 3.0]);
        let s = v.shift(3600).unwrap();
        assert_eq!(s.times(), &[3600, 7200]);
        assert_eq!(s.values(), &[2.0, 3.0]);
    }

    #[test]
    fn shift_zero_is_identity() {
        let v = tv(&[0, 3600], &[1.0, 2.0]);
        assert_eq!(v.shift(0).unwrap(), v);
    }

    #[test]
    fn shift_past_span_is_error() {
        let v = tv(&[0, 3600], &[1.0, 2.0]);
        assert!(matches!(v.shift(7200), Err(TimeError::AllPointsExpired { .. })));
    }

    #[test]
    fn sample_modes() {
        let v = tv(&[0, 10], &[0.0, 10.0]);
        assert_eq!(v.sample(5, SampleMode::Linear).unwrap(), 5.0);
        assert_eq!(v.sample(5, SampleMode::HoldLast).unwrap(), 0.0);
        assert_eq!(v.sample(10, SampleMode::Linear).unwrap(), 10.0);
        assert_eq!(v.sample(10, SampleMode::HoldLast).unwrap(), 10.0);
        assert!(matches!(v.sample(11, SampleMode::Linear), Err(TimeError::OutOfRange { .. })));
    }

    #[test]
    fn overlay_last_write_wins() {
        let a = tv(&[0, 10, 20], &[1.0, 2.0, 3.0]);
        let b = tv(&[10, 30], &[9.0, 4.0]);
        let c = a.overlay(&b);
        assert_eq!(c.times(), &[0, 10, 20, 30]);
        assert_eq!(c.values(), &[1.0, 9.0, 3.0, 4.0]);
    }

    #[test]
    fn csv_round_trip() {
        let v = tv(&[0, 3600, 7200], &[1.5, -2.0, 0.25]);
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        let back = TimeVector::read_csv(buf.as_slice(), "MW").unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn csv_parse_error_carries_line() {
        let err = TimeVector::read_csv("time,value\n0,1.0\nxx,2.0\n".as_bytes(), "").unwrap_err();
        assert!(matches!(err, TimeError::CsvParse { line: 3, .. }));
    }
}
