//! Training loop, metrics, reports and the site × month × model grid.
//!
//! Training is online: one BPTT pass, one clip and one Adam step per window,
//! windows in chronological order. Stateful models start every epoch (and
//! each evaluation pass) from zero state.

mod grid;
mod metrics;
mod reference;
mod report;

use std::time::{Duration, Instant};

pub use grid::{run_grid, write_grid_summary_csv, write_grid_table, DatasetSpec, GridResult, GridSpec, SUMMARY_HEADER};
pub use metrics::{mse, rmse};
pub use reference::paper_reference;
pub use report::{emit_plot_data, write_plot_data, write_summary, ExperimentReport, SeriesPoint};

use crate::data::PreparedData;
use crate::error::{Error, Result};
use crate::network::{CellKind, ModelConfig, StackedModel, StateMode, Window};
use crate::optim::{adam_step, clip_global_norm, AdamHyper, AdamState};

/// The four compared variants, in published table row order.
pub const VARIANTS: [(CellKind, StateMode); 4] = [
    (CellKind::Lstm, StateMode::Stateless),
    (CellKind::Lstm, StateMode::Stateful),
    (CellKind::Gru, StateMode::Stateless),
    (CellKind::Gru, StateMode::Stateful),
];

/// Human-readable variant name as used in the published table.
pub fn variant_label(cell: CellKind, mode: StateMode) -> &'static str {
    match (cell, mode) {
        (CellKind::Lstm, StateMode::Stateless) => "Stateless LSTM",
        (CellKind::Lstm, StateMode::Stateful) => "Stateful LSTM",
        (CellKind::Gru, StateMode::Stateless) => "Stateless GRU",
        (CellKind::Gru, StateMode::Stateful) => "Stateful GRU",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub model: ModelConfig,
    pub epochs: usize,
    pub adam: AdamHyper,
    /// Global gradient-norm ceiling; `None` disables clipping.
    pub clip: Option<f64>,
    pub site: String,
    pub month: String,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            model: ModelConfig::default(),
            epochs: 100,
            adam: AdamHyper::default(),
            clip: Some(5.0),
            site: String::new(),
            month: String::new(),
        }
    }
}

impl TrainSpec {
    /// Every problem at once, `; `-separated.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(Error::Config(m)) = self.model.validate() {
            out.push(m);
        }
        if self.epochs == 0 {
            out.push("epochs must be at least 1".into());
        }
        if let Err(Error::Config(m)) = self.adam.validate() {
            out.push(m);
        }
        if let Some(c) = self.clip {
            if !(c > 0.0 && c.is_finite()) {
                out.push(format!("clip norm must be positive, got {c}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p.join("; ")))
        }
    }
}

fn predict_all(model: &mut StackedModel, windows: &[Window]) -> Result<Vec<f64>> {
    model.reset_states();
    windows.iter().map(|w| model.predict(w)).collect()
}

/// Trains a fresh model and returns it with its report.
///
/// The report's series carries no timestamps or scale; [`run_experiment`]
/// fills those in from the dataset.
pub fn train_model(spec: &TrainSpec, train: &[Window], test: &[Window]) -> Result<(StackedModel, ExperimentReport)> {
    spec.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::Config(format!(
            "training needs windows on both sides, got {} train / {} test",
            train.len(),
            test.len()
        )));
    }
    let started = Instant::now();
    let mut model = StackedModel::build(spec.model.clone())?;
    let mut adam = AdamState::new(model.tensors());
    let mut epoch_losses = Vec::with_capacity(spec.epochs);

    for epoch in 1..=spec.epochs {
        model.reset_states();
        let mut total = 0.0;
        for w in train {
            let (loss, mut grads) = model.bptt_window(w)?;
            let norm = match spec.clip {
                Some(c) => clip_global_norm(&mut grads.0, c)?,
                None => grads.global_norm(),
            };
            if !loss.is_finite() || !norm.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    loss: if loss.is_finite() { norm } else { loss },
                });
            }
            adam_step(&mut model.tensors_mut(), &grads.0, &mut adam, &spec.adam)?;
            total += loss;
        }
        let mean = total / train.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        epoch_losses.push(mean);
    }

    let train_pred = predict_all(&mut model, train)?;
    let test_pred = predict_all(&mut model, test)?;
    let train_y: Vec<f64> = train.iter().map(|w| w.y).collect();
    let test_y: Vec<f64> = test.iter().map(|w| w.y).collect();
    if let Some(bad) = train_pred.iter().chain(&test_pred).find(|p| !p.is_finite()) {
        return Err(Error::Divergence {
            epoch: spec.epochs,
            loss: *bad,
        });
    }

    let report = ExperimentReport {
        site: spec.site.clone(),
        month: spec.month.clone(),
        config: spec.model.clone(),
        epochs: spec.epochs,
        adam: spec.adam,
        clip: spec.clip,
        epoch_losses,
        train_mse: mse(&train_pred, &train_y)?,
        train_rmse: rmse(&train_pred, &train_y)?,
        test_mse: mse(&test_pred, &test_y)?,
        test_rmse: rmse(&test_pred, &test_y)?,
        train_windows: train.len(),
        test_windows: test.len(),
        wall_time: Duration::ZERO,
        provenance: None,
        target_scale: None,
        test_series: test
            .iter()
            .zip(&test_pred)
            .map(|(w, &p)| SeriesPoint {
                target_row: w.target_row,
                timestamp: None,
                actual: w.y,
                predicted: p,
            })
            .collect(),
    };
    Ok((model, ExperimentReport {
        wall_time: started.elapsed(),
        ..report
    }))
}

/// [`train_model`] without the model.
pub fn train(spec: &TrainSpec, train: &[Window], test: &[Window]) -> Result<ExperimentReport> {
    train_model(spec, train, test).map(|(_, r)| r)
}

/// Trains on a prepared site-month and attaches timestamps, target scale and
/// imputation counters to the report. The model's input width and lookback
/// are taken from the data.
pub fn run_experiment(spec: &TrainSpec, data: &PreparedData) -> Result<(StackedModel, ExperimentReport)> {
    let mut spec = spec.clone();
    spec.model.input_width = data.input_width();
    if let Some(w) = data.train_windows.first() {
        spec.model.lookback = w.x.rows();
    }
    let (model, mut report) = train_model(&spec, &data.train_windows, &data.test_windows)?;
    let col = data.test.target_col;
    report.target_scale = Some((data.scaler.min[col], data.scaler.max[col]));
    report.provenance = Some(data.provenance().clone());
    for p in &mut report.test_series {
        p.timestamp = data.test.timestamps.get(p.target_row).copied();
    }
    Ok((model, report))
}
