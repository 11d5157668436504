//! Noiseless sine series for the memorization benchmark.
//!
//! Window starts advance by a stride coprime with the period, so consecutive
//! windows sit at unrelated phases. With stride 1, neighbouring windows are
//! near-duplicates and one-window-per-step Adam keeps chasing the current phase.

use crate::error::{Error, Result};
use crate::network::Window;
use crate::numerics::Tensor2;

/// Sine parameters. Values stay inside `[0, 1]` like scaled LCD data.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSpec {
    pub windows: usize,
    pub lookback: usize,
    /// Period in steps.
    pub period: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Steps between consecutive window starts.
    pub stride: usize,
}

impl Default for SineSpec {
    fn default() -> Self {
        SineSpec {
            windows: 50,
            lookback: 10,
            period: 24.0,
            amplitude: 0.4,
            offset: 0.5,
            stride: 5,
        }
    }
}

impl SineSpec {
    pub fn value(&self, t: usize) -> f64 {
        self.offset + self.amplitude * (std::f64::consts::TAU * t as f64 / self.period).sin()
    }

    /// `windows` windows of width 1 over one continuous series.
    pub fn make_windows(&self) -> Result<Vec<Window>> {
        if self.windows == 0 || self.lookback == 0 || self.stride == 0 || !(self.period > 0.0) {
            return Err(Error::Config(format!(
                "sine benchmark needs positive windows, lookback, stride and period, got {}/{}/{}/{}",
                self.windows, self.lookback, self.stride, self.period
            )));
        }
        (0..self.windows)
            .map(|k| {
                let i = k * self.stride;
                let x = Tensor2::new(self.lookback, 1, (i..i + self.lookback).map(|t| self.value(t)).collect())?;
                Ok(Window {
                    x,
                    y: self.value(i + self.lookback),
                    target_row: i + self.lookback,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_follow_the_series() {
        let s = SineSpec::default();
        let ws = s.make_windows().unwrap();
        assert_eq!(ws.len(), 50);
        assert_eq!(ws[0].x.shape(), (10, 1));
        assert_eq!(ws[3].x.get(0, 0), s.value(15));
        assert_eq!(ws[3].y, s.value(25));
        assert_eq!(ws[3].target_row, 25);
        assert!(ws.iter().all(|w| (0.0..=1.0).contains(&w.y)));
    }
}
