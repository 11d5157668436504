use super::{check_column, sigmoid_grad, tanh_grad, CellState, GateWeights};
use crate::error::Result;
use crate::numerics::{SeededRng, Tensor2};

/// Parameters of one GRU layer. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub update: GateWeights,
    pub reset: GateWeights,
    pub candidate: GateWeights,
}

impl GruParams {
    pub fn zeros(d_i: usize, d_h: usize) -> Self {
        GruParams {
            update: GateWeights::zeros(d_i, d_h),
            reset: GateWeights::zeros(d_i, d_h),
            candidate: GateWeights::zeros(d_i, d_h),
        }
    }

    pub fn random(rng: &mut SeededRng, d_i: usize, d_h: usize, bound: f64) -> Result<Self> {
        Ok(GruParams {
            update: GateWeights::random(rng, d_i, d_h, bound)?,
            reset: GateWeights::random(rng, d_i, d_h, bound)?,
            candidate: GateWeights::random(rng, d_i, d_h, bound)?,
        })
    }

    pub fn d_i(&self) -> usize {
        self.update.d_i()
    }

    pub fn d_h(&self) -> usize {
        self.update.d_h()
    }

    /// Gate order: update, reset, candidate; within a gate `W, U, b`.
    pub fn tensors(&self) -> Vec<&Tensor2> {
        [&self.update, &self.reset, &self.candidate]
            .into_iter()
            .flat_map(GateWeights::tensors)
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        [&mut self.update, &mut self.reset, &mut self.candidate]
            .into_iter()
            .flat_map(GateWeights::tensors_mut)
            .collect()
    }

    fn check(&self) -> Result<()> {
        let (d_i, d_h) = (self.d_i(), self.d_h());
        for g in [&self.reset, &self.candidate, &self.update] {
            g.check(d_i, d_h)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GruCache {
    pub x: Tensor2,
    pub h_prev: Tensor2,
    pub z: Tensor2,
    pub r: Tensor2,
    /// `r ⊙ h_prev`
    pub rh: Tensor2,
    /// Candidate state `h̃`.
    pub h_cand: Tensor2,
}

#[derive(Debug, Clone)]
pub struct GruBackward {
    pub grads: GruParams,
    pub dx: Tensor2,
    pub dh_prev: Tensor2,
}

pub fn gru_forward(x: &Tensor2, prev: &CellState, p: &GruParams) -> Result<(CellState, GruCache)> {
    p.check()?;
    check_column(x, p.d_i(), "gru input")?;
    check_column(&prev.h, p.d_h(), "gru hidden state")?;
    let h_prev = &prev.h;

    let z = p.update.preactivation(x, h_prev)?.sigmoid();
    let r = p.reset.preactivation(x, h_prev)?.sigmoid();
    let rh = r.mul(h_prev)?;
    let h_cand = p.candidate.preactivation(x, &rh)?.tanh();

    // h' = h + z ⊙ (h̃ − h)
    let h = h_prev.add(&z.mul(&h_cand.sub(h_prev)?)?)?;

    let cache = GruCache {
        x: x.clone(),
        h_prev: h_prev.clone(),
        z,
        r,
        rh,
        h_cand,
    };
    Ok((CellState { h, c: None }, cache))
}

pub fn gru_backward(cache: &GruCache, dh: &Tensor2, p: &GruParams) -> Result<GruBackward> {
    p.check()?;
    let d_h = p.d_h();
    check_column(dh, d_h, "gru dh")?;
    check_column(&cache.z, d_h, "gru cache")?;
    check_column(&cache.x, p.d_i(), "gru cache input")?;

    let one_minus_z = cache.z.map(|v| 1.0 - v);
    let mut dh_prev = dh.mul(&one_minus_z)?;

    let d_z = dh
        .mul(&cache.h_cand.sub(&cache.h_prev)?)?
        .mul(&sigmoid_grad(&cache.z))?;
    let d_cand = dh.mul(&cache.z)?.mul(&tanh_grad(&cache.h_cand))?;

    let mut grads = GruParams::zeros(p.d_i(), d_h);
    let mut dx = Tensor2::zeros(p.d_i(), 1);

    grads.candidate.accumulate(&d_cand, &cache.x, &cache.rh)?;
    dx.add_assign(&p.candidate.w.transpose_matmul(&d_cand)?)?;
    let d_rh = p.candidate.u.transpose_matmul(&d_cand)?;
    dh_prev.add_assign(&d_rh.mul(&cache.r)?)?;
    let d_r = d_rh.mul(&cache.h_prev)?.mul(&sigmoid_grad(&cache.r))?;

    for (grad, gate, da) in [
        (&mut grads.update, &p.update, &d_z),
        (&mut grads.reset, &p.reset, &d_r),
    ] {
        grad.accumulate(da, &cache.x, &cache.h_prev)?;
        dx.add_assign(&gate.w.transpose_matmul(da)?)?;
        dh_prev.add_assign(&gate.u.transpose_matmul(da)?)?;
    }

    Ok(GruBackward { grads, dx, dh_prev })
}
