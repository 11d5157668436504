//! Single-timestep LSTM and GRU cells.
//!
//! Forward passes return the next [`CellState`] plus a cache of every
//! post-activation value the matching backward pass needs. Backward passes are
//! exact analytic gradients; they never recompute activations.
//!
//! Conventions (column vectors, `σ` logistic, `⊙` Hadamard):
//!
//! ```text
//! LSTM  i  = σ(W_i x + U_i h + b_i)      GRU  z = σ(W_z x + U_z h + b_z)
//!       f  = σ(W_f x + U_f h + b_f)           r = σ(W_r x + U_r h + b_r)
//!       g  = tanh(W_g x + U_g h + b_g)        h̃ = tanh(W_h x + U_h (r ⊙ h) + b_h)
//!       o  = σ(W_o x + U_o h + b_o)           h' = (1 − z) ⊙ h + z ⊙ h̃
//!       c' = f ⊙ c + i ⊙ g
//!       h' = o ⊙ tanh(c')
//! ```

mod gru;
mod lstm;

pub use gru::{gru_backward, gru_forward, GruBackward, GruCache, GruParams};
pub use lstm::{lstm_backward, lstm_forward, LstmBackward, LstmCache, LstmParams};

use crate::error::{Error, Result};
use crate::numerics::{SeededRng, Tensor2};

/// Input weights, recurrent weights and bias of one gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateWeights {
    /// `d_h × d_i`
    pub w: Tensor2,
    /// `d_h × d_h`
    pub u: Tensor2,
    /// `d_h × 1`
    pub b: Tensor2,
}

impl GateWeights {
    pub fn zeros(d_i: usize, d_h: usize) -> Self {
        GateWeights {
            w: Tensor2::zeros(d_h, d_i),
            u: Tensor2::zeros(d_h, d_h),
            b: Tensor2::zeros(d_h, 1),
        }
    }

    /// Weights uniform in `[-bound, bound)`, bias zero.
    pub fn random(rng: &mut SeededRng, d_i: usize, d_h: usize, bound: f64) -> Result<Self> {
        Ok(GateWeights {
            w: rng.uniform(d_h, d_i, -bound, bound)?,
            u: rng.uniform(d_h, d_h, -bound, bound)?,
            b: Tensor2::zeros(d_h, 1),
        })
    }

    pub fn d_i(&self) -> usize {
        self.w.cols()
    }

    pub fn d_h(&self) -> usize {
        self.w.rows()
    }

    pub fn tensors(&self) -> [&Tensor2; 3] {
        [&self.w, &self.u, &self.b]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor2; 3] {
        [&mut self.w, &mut self.u, &mut self.b]
    }

    fn check(&self, d_i: usize, d_h: usize) -> Result<()> {
        let expect = [(d_h, d_i), (d_h, d_h), (d_h, 1)];
        for (t, want) in self.tensors().into_iter().zip(expect) {
            if t.shape() != want {
                return Err(Error::shape("gate weights", t.shape(), want));
            }
        }
        Ok(())
    }

    /// `W x + U h + b`
    fn preactivation(&self, x: &Tensor2, h: &Tensor2) -> Result<Tensor2> {
        let mut a = self.w.matmul(x)?;
        a.add_assign(&self.u.matmul(h)?)?;
        a.add_assign(&self.b)?;
        Ok(a)
    }

    /// Adds this gate's parameter gradients for pre-activation gradient `da`.
    fn accumulate(&mut self, da: &Tensor2, x: &Tensor2, h: &Tensor2) -> Result<()> {
        self.w.add_outer(da, x)?;
        self.u.add_outer(da, h)?;
        self.b.add_assign(da)
    }
}

/// Hidden state (and LSTM cell state) carried between timesteps.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Tensor2,
    /// Present for LSTM only.
    pub c: Option<Tensor2>,
}

impl CellState {
    pub fn zeros_lstm(d_h: usize) -> Self {
        CellState {
            h: Tensor2::zeros(d_h, 1),
            c: Some(Tensor2::zeros(d_h, 1)),
        }
    }

    pub fn zeros_gru(d_h: usize) -> Self {
        CellState {
            h: Tensor2::zeros(d_h, 1),
            c: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        let zero = |t: &Tensor2| t.data().iter().all(|&v| v == 0.0);
        zero(&self.h) && self.c.as_ref().is_none_or(zero)
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.c.as_ref().is_none_or(Tensor2::is_finite)
    }
}

fn check_column(t: &Tensor2, rows: usize, what: &'static str) -> Result<()> {
    if t.shape() != (rows, 1) {
        return Err(Error::shape(what, t.shape(), (rows, 1)));
    }
    Ok(())
}

/// `1 - v²` elementwise: tanh derivative from its output.
fn tanh_grad(y: &Tensor2) -> Tensor2 {
    y.map(|v| 1.0 - v * v)
}

/// `v (1 - v)` elementwise: logistic derivative from its output.
fn sigmoid_grad(y: &Tensor2) -> Tensor2 {
    y.map(|v| v * (1.0 - v))
}
