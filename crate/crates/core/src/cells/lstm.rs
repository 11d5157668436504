use super::{check_column, sigmoid_grad, tanh_grad, CellState, GateWeights};
use crate::error::{Error, Result};
use crate::numerics::{SeededRng, Tensor2};

/// Parameters of one LSTM layer. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input: GateWeights,
    pub forget: GateWeights,
    pub candidate: GateWeights,
    pub output: GateWeights,
}

impl LstmParams {
    pub fn zeros(d_i: usize, d_h: usize) -> Self {
        LstmParams {
            input: GateWeights::zeros(d_i, d_h),
            forget: GateWeights::zeros(d_i, d_h),
            candidate: GateWeights::zeros(d_i, d_h),
            output: GateWeights::zeros(d_i, d_h),
        }
    }

    pub fn random(rng: &mut SeededRng, d_i: usize, d_h: usize, bound: f64) -> Result<Self> {
        Ok(LstmParams {
            input: GateWeights::random(rng, d_i, d_h, bound)?,
            forget: GateWeights::random(rng, d_i, d_h, bound)?,
            candidate: GateWeights::random(rng, d_i, d_h, bound)?,
            output: GateWeights::random(rng, d_i, d_h, bound)?,
        })
    }

    pub fn d_i(&self) -> usize {
        self.input.d_i()
    }

    pub fn d_h(&self) -> usize {
        self.input.d_h()
    }

    /// Gate order: input, forget, candidate, output; within a gate `W, U, b`.
    pub fn tensors(&self) -> Vec<&Tensor2> {
        [&self.input, &self.forget, &self.candidate, &self.output]
            .into_iter()
            .flat_map(GateWeights::tensors)
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        [&mut self.input, &mut self.forget, &mut self.candidate, &mut self.output]
            .into_iter()
            .flat_map(GateWeights::tensors_mut)
            .collect()
    }

    fn check(&self) -> Result<()> {
        let (d_i, d_h) = (self.d_i(), self.d_h());
        for g in [&self.forget, &self.candidate, &self.output, &self.input] {
            g.check(d_i, d_h)?;
        }
        Ok(())
    }
}

/// Everything one LSTM step produced that its backward pass reads.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub x: Tensor2,
    pub h_prev: Tensor2,
    pub c_prev: Tensor2,
    pub i: Tensor2,
    pub f: Tensor2,
    pub g: Tensor2,
    pub o: Tensor2,
    /// `tanh(c')`
    pub c_tanh: Tensor2,
}

#[derive(Debug, Clone)]
pub struct LstmBackward {
    pub grads: LstmParams,
    pub dx: Tensor2,
    pub dh_prev: Tensor2,
    pub dc_prev: Tensor2,
}

pub fn lstm_forward(x: &Tensor2, prev: &CellState, p: &LstmParams) -> Result<(CellState, LstmCache)> {
    p.check()?;
    let d_h = p.d_h();
    check_column(x, p.d_i(), "lstm input")?;
    check_column(&prev.h, d_h, "lstm hidden state")?;
    let c_prev = prev
        .c
        .as_ref()
        .ok_or_else(|| Error::Parameter("lstm step needs a cell state".into()))?;
    check_column(c_prev, d_h, "lstm cell state")?;

    let i = p.input.preactivation(x, &prev.h)?.sigmoid();
    let f = p.forget.preactivation(x, &prev.h)?.sigmoid();
    let g = p.candidate.preactivation(x, &prev.h)?.tanh();
    let o = p.output.preactivation(x, &prev.h)?.sigmoid();

    let mut c = f.mul(c_prev)?;
    c.add_assign(&i.mul(&g)?)?;
    let c_tanh = c.tanh();
    let h = o.mul(&c_tanh)?;

    let cache = LstmCache {
        x: x.clone(),
        h_prev: prev.h.clone(),
        c_prev: c_prev.clone(),
        i,
        f,
        g,
        o,
        c_tanh,
    };
    Ok((CellState { h, c: Some(c) }, cache))
}

/// Backpropagates upstream gradients `dh` (w.r.t. `h'`) and `dc` (w.r.t. `c'`).
pub fn lstm_backward(cache: &LstmCache, dh: &Tensor2, dc: &Tensor2, p: &LstmParams) -> Result<LstmBackward> {
    p.check()?;
    let d_h = p.d_h();
    check_column(dh, d_h, "lstm dh")?;
    check_column(dc, d_h, "lstm dc")?;
    check_column(&cache.i, d_h, "lstm cache")?;
    check_column(&cache.x, p.d_i(), "lstm cache input")?;

    // Gradient reaching c' through both the direct path and h' = o ⊙ tanh(c').
    let mut dc_total = dh.mul(&cache.o)?.mul(&tanh_grad(&cache.c_tanh))?;
    dc_total.add_assign(dc)?;

    let d_o = dh.mul(&cache.c_tanh)?.mul(&sigmoid_grad(&cache.o))?;
    let d_i = dc_total.mul(&cache.g)?.mul(&sigmoid_grad(&cache.i))?;
    let d_g = dc_total.mul(&cache.i)?.mul(&tanh_grad(&cache.g))?;
    let d_f = dc_total.mul(&cache.c_prev)?.mul(&sigmoid_grad(&cache.f))?;
    let dc_prev = dc_total.mul(&cache.f)?;

    let mut grads = LstmParams::zeros(p.d_i(), d_h);
    let mut dx = Tensor2::zeros(p.d_i(), 1);
    let mut dh_prev = Tensor2::zeros(d_h, 1);
    let pairs = [
        (&mut grads.input, &p.input, &d_i),
        (&mut grads.forget, &p.forget, &d_f),
        (&mut grads.candidate, &p.candidate, &d_g),
        (&mut grads.output, &p.output, &d_o),
    ];
    for (grad, gate, da) in pairs {
        grad.accumulate(da, &cache.x, &cache.h_prev)?;
        dx.add_assign(&gate.w.transpose_matmul(da)?)?;
        dh_prev.add_assign(&gate.u.transpose_matmul(da)?)?;
    }

    Ok(LstmBackward {
        grads,
        dx,
        dh_prev,
        dc_prev,
    })
}
