//! Instantaneous π-pulse trains.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("pulse interval must be positive and finite (got {0})")]
    BadInterval(f64),
    #[error("horizon must be non-negative and finite (got {0})")]
    BadHorizon(f64),
    #[error("pulse time #{index} = {time} must be positive and strictly increasing")]
    BadTime { index: usize, time: f64 },
}

/// Ordered pulse instants in scaled time. Each pulse is an ideal π flip of
/// both spins with zero duration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSchedule {
    times: Vec<f64>,
    uniform_interval: Option<f64>,
}

impl PulseSchedule {
    /// No pulses at all (free decay).
    pub fn free() -> Self {
        Self::default()
    }

    /// Pulses at `m·tau_s` for every `m ≥ 1` with `m·tau_s ≤ horizon`.
    pub fn uniform(tau_s: f64, horizon: f64) -> Result<Self, ScheduleError> {
        if !(tau_s.is_finite() && tau_s > 0.0) {
            return Err(ScheduleError::BadInterval(tau_s));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(ScheduleError::BadHorizon(horizon));
        }
        let times = (1u64..)
            .map(|m| m as f64 * tau_s)
            .take_while(|&t| t <= horizon)
            .collect();
        Ok(Self {
            times,
            uniform_interval: Some(tau_s),
        })
    }

    /// Arbitrary pulse instants; must be positive and strictly increasing.
    pub fn from_times(times: Vec<f64>) -> Result<Self, ScheduleError> {
        let mut previous = 0.0;
        for (index, &time) in times.iter().enumerate() {
            if !time.is_finite() || time <= previous {
                return Err(ScheduleError::BadTime { index, time });
            }
            previous = time;
        }
        Ok(Self {
            times,
            uniform_interval: None,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn uniform_interval(&self) -> Option<f64> {
        self.uniform_interval
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Number of pulses applied by time `t`; a pulse at exactly `t` counts.
    pub fn pulses_applied(&self, t: f64) -> usize {
        self.times.partition_point(|&p| p <= t)
    }
}
