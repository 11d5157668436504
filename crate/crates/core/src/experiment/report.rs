use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use chrono::NaiveDateTime;

use super::variant_label;
use crate::data::{Provenance, TIMESTAMP_FORMAT};
use crate::error::{Error, Result};
use crate::network::ModelConfig;
use crate::optim::AdamHyper;

/// One test-split prediction, in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    /// Row of the target hour within the test split.
    pub target_row: usize,
    pub timestamp: Option<NaiveDateTime>,
    pub actual: f64,
    pub predicted: f64,
}

/// Everything a training run produced. Metrics are in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub site: String,
    pub month: String,
    pub config: ModelConfig,
    pub epochs: usize,
    pub adam: AdamHyper,
    pub clip: Option<f64>,
    /// Mean per-window training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub train_rmse: f64,
    pub train_mse: f64,
    pub test_rmse: f64,
    pub test_mse: f64,
    pub train_windows: usize,
    pub test_windows: usize,
    /// Measured, never written to report files.
    pub wall_time: Duration,
    pub provenance: Option<Provenance>,
    /// Training-split `(min, max)` of the target, for denormalizing.
    pub target_scale: Option<(f64, f64)>,
    pub test_series: Vec<SeriesPoint>,
}

impl ExperimentReport {
    pub fn model_label(&self) -> &'static str {
        variant_label(self.config.cell, self.config.mode)
    }

    pub fn denormalize(&self, v: f64) -> f64 {
        match self.target_scale {
            Some((lo, hi)) => v * (hi - lo) + lo,
            None => v,
        }
    }
}

/// Key-value summary. Deterministic: wall time is left out.
pub fn write_summary<W: Write>(r: &ExperimentReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# windcast experiment report")?;
    writeln!(
        out,
        "# F1 is not reported: it needs class labels and no threshold turns this wind-speed regression into classes."
    )?;
    writeln!(out, "# RMSE and MSE are in min-max units fitted on the training split.")?;
    let c = &r.config;
    let mut kv: Vec<(String, String)> = vec![
        ("site".into(), r.site.clone()),
        ("month".into(), r.month.clone()),
        ("model".into(), r.model_label().into()),
        ("variant".into(), c.variant_name()),
        ("layers".into(), c.layers.to_string()),
        ("input_width".into(), c.input_width.to_string()),
        ("hidden_width".into(), c.hidden_width.to_string()),
        ("lookback".into(), c.lookback.to_string()),
        ("seed".into(), c.seed.to_string()),
        ("epochs".into(), r.epochs.to_string()),
        ("lr".into(), r.adam.lr.to_string()),
        ("beta1".into(), r.adam.beta1.to_string()),
        ("beta2".into(), r.adam.beta2.to_string()),
        ("adam_eps".into(), r.adam.eps.to_string()),
        ("clip".into(), r.clip.map_or("none".into(), |v| v.to_string())),
        ("train_windows".into(), r.train_windows.to_string()),
        ("test_windows".into(), r.test_windows.to_string()),
        ("train_rmse".into(), r.train_rmse.to_string()),
        ("test_rmse".into(), r.test_rmse.to_string()),
        ("train_mse".into(), r.train_mse.to_string()),
        ("test_mse".into(), r.test_mse.to_string()),
    ];
    if let Some((lo, hi)) = r.target_scale {
        kv.push(("target_min".into(), lo.to_string()));
        kv.push(("target_max".into(), hi.to_string()));
    }
    if let Some(p) = &r.provenance {
        kv.extend(p.entries().into_iter().map(|(k, v)| (format!("data.{k}"), v)));
    }
    for (i, l) in r.epoch_losses.iter().enumerate() {
        kv.push((format!("epoch_loss.{}", i + 1), l.to_string()));
    }
    for (k, v) in kv {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}

/// Test-split series as CSV: `timestamp,actual,predicted` in original units,
/// then the same pair normalized. Without timestamps the target row is used.
pub fn write_plot_data<W: Write>(r: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Format(format!("cannot write plot data: {e}"));
    w.write_record(["timestamp", "actual", "predicted", "actual_normalized", "predicted_normalized"])
        .map_err(to_err)?;
    for p in &r.test_series {
        let ts = p
            .timestamp
            .map_or_else(|| p.target_row.to_string(), |t| t.format(TIMESTAMP_FORMAT).to_string());
        w.write_record([
            ts,
            r.denormalize(p.actual).to_string(),
            r.denormalize(p.predicted).to_string(),
            p.actual.to_string(),
            p.predicted.to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Format(format!("cannot write plot data: {e}")))
}

pub fn emit_plot_data(r: &ExperimentReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_plot_data(r, BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> ExperimentReport {
        ExperimentReport {
            site: "S".into(),
            month: "July".into(),
            config: ModelConfig::default(),
            epochs: 1,
            adam: AdamHyper::default(),
            clip: Some(5.0),
            epoch_losses: vec![0.25],
            train_rmse: 0.5,
            train_mse: 0.25,
            test_rmse: 0.5,
            test_mse: 0.25,
            train_windows: 1,
            test_windows: 2,
            wall_time: Duration::from_secs(3),
            provenance: None,
            target_scale: Some((2.0, 12.0)),
            test_series: vec![
                SeriesPoint {
                    target_row: 24,
                    timestamp: None,
                    actual: 0.5,
                    predicted: 0.0,
                },
                SeriesPoint {
                    target_row: 25,
                    timestamp: None,
                    actual: 0.1,
                    predicted: 0.6,
                },
            ],
        }
    }

    #[test]
    fn plot_data_layout() {
        let mut buf = Vec::new();
        write_plot_data(&report(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "24,7,2,0.5,0");
        assert_eq!(lines[2], "25,3,8,0.1,0.6");
    }

    #[test]
    fn summary_has_no_timing() {
        let mut a = Vec::new();
        write_summary(&report(), &mut a).unwrap();
        let mut r = report();
        r.wall_time = Duration::from_secs(99);
        let mut b = Vec::new();
        write_summary(&r, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("F1"));
        assert!(text.contains("model=Stateless LSTM\n"));
        assert!(text.contains("epoch_loss.1=0.25\n"));
    }
}
