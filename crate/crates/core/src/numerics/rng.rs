//! Seeded uniform sampling.
//!
//! The generator is ChaCha8 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64`. A draw in `[0, 1)` takes the top 53 bits of one
//! `next_u64()` output and multiplies by 2⁻⁵³; it is then mapped affinely onto
//! `[lo, hi)`. If rounding of the affine map lands exactly on `hi` the value is
//! replaced by the largest double below `hi`. The stream is therefore fully
//! determined by the seed and is identical on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor2;
use crate::error::{Error, Result};

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * UNIT
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((self.next_unit() * n as f64) as usize).min(n - 1)
    }

    pub fn uniform_scalar(&mut self, lo: f64, hi: f64) -> f64 {
        let v = lo + (hi - lo) * self.next_unit();
        if v >= hi {
            hi.next_down()
        } else {
            v
        }
    }

    pub fn uniform(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> Result<Tensor2> {
        check_range(lo, hi)?;
        let data = (0..rows * cols).map(|_| self.uniform_scalar(lo, hi)).collect();
        Tensor2::new(rows, cols, data)
    }

    /// Standard normal draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_unit();
        let u2 = self.next_unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter(format!(
            "uniform range needs finite lo < hi, got [{lo}, {hi})"
        )));
    }
    Ok(())
}

/// A fresh `rows × cols` tensor of uniform draws in `[lo, hi)` from `seed`.
pub fn seeded_uniform(seed: u64, rows: usize, cols: usize, lo: f64, hi: f64) -> Result<Tensor2> {
    SeededRng::new(seed).uniform(rows, cols, lo, hi)
}
