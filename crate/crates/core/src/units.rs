use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Conversion between `1/gamma` time units and laboratory microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScale {
    /// `gamma` in rad/s.
    pub gamma: f64,
}

impl Default for TimeScale {
    /// `gamma = 2 pi x 1 MHz`.
    fn default() -> Self {
        TimeScale { gamma: 2.0 * PI * 1.0e6 }
    }
}

impl TimeScale {
    pub fn to_us(&self, t: f64) -> f64 {
        t / (self.gamma * 1e-6)
    }

    pub fn from_us(&self, t_us: f64) -> f64 {
        t_us * self.gamma * 1e-6
    }

    /// Rate in units of `gamma` to inverse microseconds.
    pub fn rate_to_per_us(&self, rate: f64) -> f64 {
        rate * self.gamma * 1e-6
    }

    pub fn rate_from_per_us(&self, rate: f64) -> f64 {
        rate / (self.gamma * 1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_microsecond() {
        let ts = TimeScale::default();
        assert!((ts.from_us(1.0) - 2.0 * PI).abs() < 1e-12);
        assert!((ts.to_us(ts.from_us(8.0)) - 8.0).abs() < 1e-12);
        assert!((ts.rate_to_per_us(1.0) - 2.0 * PI).abs() < 1e-12);
    }
}
