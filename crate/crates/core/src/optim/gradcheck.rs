use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::network::{Gradients, StackedModel, Window};
use crate::numerics::SeededRng;

/// Probes drawn when a model has more scalar parameters than this.
pub const GRAD_CHECK_SUBSAMPLE: usize = 256;
const FULL_CHECK_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub probes: usize,
    /// `(tensor, element)` of the worst probe.
    pub worst: (usize, usize),
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

/// Max relative error between BPTT gradients and central differences.
///
/// Stateful models are checked from their current persisted states, which
/// stay untouched.
pub fn grad_check(model: &StackedModel, w: &Window, epsilon: f64) -> Result<f64> {
    let report = grad_check_with(model, w, epsilon, Execution::default(), |m, w| {
        m.bptt_window(w).map(|(_, g)| g)
    })?;
    Ok(report.max_relative_error)
}

/// [`grad_check`] against an arbitrary analytic gradient routine.
///
/// `analytic` receives a private clone of the model and must return gradients
/// in [`StackedModel::tensors`] order.
pub fn grad_check_with<F>(
    model: &StackedModel,
    w: &Window,
    epsilon: f64,
    exec: Execution,
    analytic: F,
) -> Result<GradCheckReport>
where
    F: FnOnce(&mut StackedModel, &Window) -> Result<Gradients>,
{
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let grads = analytic(&mut model.clone(), w)?;
    let shapes: Vec<(usize, usize)> = model.tensors().iter().map(|t| t.shape()).collect();
    if grads.0.len() != shapes.len() || grads.0.iter().zip(&shapes).any(|(g, &s)| g.shape() != s) {
        return Err(Error::Parameter("analytic gradients do not mirror the model parameters".into()));
    }

    let mut probes: Vec<(usize, usize)> = shapes
        .iter()
        .enumerate()
        .flat_map(|(ti, &(r, c))| (0..r * c).map(move |e| (ti, e)))
        .collect();
    if probes.len() > FULL_CHECK_LIMIT {
        let mut rng = SeededRng::new(model.config().seed ^ 0x9e37_79b9_7f4a_7c15);
        // Partial Fisher-Yates: the first GRAD_CHECK_SUBSAMPLE entries become a uniform sample.
        for i in 0..GRAD_CHECK_SUBSAMPLE {
            let j = i + rng.below(probes.len() - i);
            probes.swap(i, j);
        }
        probes.truncate(GRAD_CHECK_SUBSAMPLE);
    }

    let numeric = exec.map(&probes, |&(ti, e)| -> Result<f64> {
        let mut m = model.clone();
        let original = m.tensors()[ti].data()[e];
        m.tensors_mut()[ti].data_mut()[e] = original + epsilon;
        let plus = m.prediction(w)?;
        m.tensors_mut()[ti].data_mut()[e] = original - epsilon;
        let minus = m.prediction(w)?;
        // (p₊ − y)² − (p₋ − y)², factored so the squares never cancel.
        Ok((plus - minus) * (plus + minus - 2.0 * w.y) / (2.0 * epsilon))
    });

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        probes: probes.len(),
        worst: (0, 0),
        worst_analytic: 0.0,
        worst_numeric: 0.0,
    };
    for (&(ti, e), n) in probes.iter().zip(numeric) {
        let n = n?;
        let a = grads.0[ti].data()[e];
        let err = relative_error(a, n);
        if err > report.max_relative_error || err.is_nan() {
            report = GradCheckReport {
                max_relative_error: err,
                probes: report.probes,
                worst: (ti, e),
                worst_analytic: a,
                worst_numeric: n,
            };
        }
    }
    Ok(report)
}
