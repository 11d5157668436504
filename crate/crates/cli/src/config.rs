//! JSON run configuration: parsing, validation and resolution.
//!
//! Every field is optional in the file. Resolution fills defaults, applies
//! command-line overrides and turns relative paths into paths relative to the
//! config file's directory. The resolved form is itself a valid config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use windcast::data::synthetic::SineSpec;
use windcast::experiment::{DatasetSpec, TrainSpec, VARIANTS};
use windcast::network::{CellKind, ModelConfig, StateMode};
use windcast::optim::AdamHyper;

use crate::CliError;

pub const DEFAULT_OUT: &str = "windcast-out";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub model: RawModel,
    pub training: RawTraining,
    pub data: RawData,
    pub sine: Option<RawSine>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawModel {
    pub cell: Option<String>,
    pub mode: Option<String>,
    pub layers: Option<usize>,
    pub hidden_width: Option<usize>,
    pub lookback: Option<usize>,
    /// Grid variants such as `"stateless-lstm"`; all four when absent.
    pub variants: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawTraining {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub adam_eps: Option<f64>,
    /// A number, or `null` / `"none"` to disable clipping.
    #[serde(deserialize_with = "keep_null")]
    pub clip: Option<serde_json::Value>,
    pub split_ratio: Option<f64>,
}

/// Present-but-null stays distinguishable from absent.
fn keep_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<serde_json::Value>, D::Error> {
    serde_json::Value::deserialize(d).map(Some)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawData {
    pub cyclic_wind_direction: Option<bool>,
    pub datasets: Vec<RawDataset>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDataset {
    pub site: String,
    pub month: String,
    pub path: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawSine {
    pub windows: Option<usize>,
    pub period: Option<f64>,
    pub amplitude: Option<f64>,
    pub offset: Option<f64>,
    pub stride: Option<usize>,
}

/// Fully populated configuration, echoed as `resolved_config.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub model: ResolvedModel,
    pub training: ResolvedTraining,
    pub data: ResolvedData,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sine: Option<ResolvedSine>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedModel {
    pub cell: String,
    pub mode: String,
    pub layers: usize,
    pub hidden_width: usize,
    pub lookback: usize,
    pub variants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedTraining {
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub clip: Option<f64>,
    pub split_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedData {
    pub cyclic_wind_direction: bool,
    pub datasets: Vec<ResolvedDataset>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedDataset {
    pub site: String,
    pub month: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedSine {
    pub windows: usize,
    pub period: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub stride: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn read_raw(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// `"stateless-lstm"` style names.
pub fn parse_variant(v: &str) -> Option<(CellKind, StateMode)> {
    let (mode, cell) = v.split_once('-')?;
    Some((cell.parse().ok()?, mode.parse().ok()?))
}

fn bare(e: windcast::Error) -> String {
    match e {
        windcast::Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Fills defaults and applies overrides, collecting every problem.
/// `base` is the directory relative paths in the file are resolved against.
pub fn resolve(raw: RawConfig, base: &Path, ov: &Overrides) -> Result<Resolved, CliError> {
    let mut problems: Vec<String> = Vec::new();
    let md = ModelConfig::default();
    let ad = AdamHyper::default();
    let td = TrainSpec::default();
    let sd = SineSpec::default();

    let cell = raw.model.cell.unwrap_or_else(|| md.cell.to_string());
    let cell = match cell.parse::<CellKind>() {
        Ok(c) => c.to_string(),
        Err(e) => {
            problems.push(format!("model.cell: {}", bare(e)));
            cell
        }
    };
    let mode = raw.model.mode.unwrap_or_else(|| md.mode.to_string());
    let mode = match mode.parse::<StateMode>() {
        Ok(m) => m.to_string(),
        Err(e) => {
            problems.push(format!("model.mode: {}", bare(e)));
            mode
        }
    };

    let variants = match raw.model.variants {
        None => VARIANTS.iter().map(|&(c, m)| format!("{m}-{c}")).collect(),
        Some(list) => {
            if list.is_empty() {
                problems.push("model.variants must not be empty".into());
            }
            for v in &list {
                if parse_variant(v).is_none() {
                    problems.push(format!(
                        "model.variants: unknown variant {v:?}; allowed values: stateless-lstm, stateful-lstm, stateless-gru, stateful-gru"
                    ));
                }
            }
            list.iter().map(|v| v.to_ascii_lowercase()).collect()
        }
    };

    let mut positive = |name: &str, v: usize| {
        if v == 0 {
            problems.push(format!("{name} must be at least 1"));
        }
        v
    };
    let layers = positive("model.layers", raw.model.layers.unwrap_or(md.layers));
    let hidden_width = positive("model.hidden_width", raw.model.hidden_width.unwrap_or(md.hidden_width));
    let lookback = positive("model.lookback", raw.model.lookback.unwrap_or(md.lookback));
    let epochs = positive("training.epochs", raw.training.epochs.unwrap_or(td.epochs));

    let t = raw.training;
    let lr = t.lr.unwrap_or(ad.lr);
    if !(lr > 0.0 && lr.is_finite()) {
        problems.push(format!("training.lr must be positive, got {lr}"));
    }
    let beta1 = t.beta1.unwrap_or(ad.beta1);
    let beta2 = t.beta2.unwrap_or(ad.beta2);
    for (name, b) in [("training.beta1", beta1), ("training.beta2", beta2)] {
        if !(0.0..1.0).contains(&b) {
            problems.push(format!("{name} must lie in [0, 1), got {b}"));
        }
    }
    let adam_eps = t.adam_eps.unwrap_or(ad.eps);
    if !(adam_eps > 0.0) {
        problems.push(format!("training.adam_eps must be positive, got {adam_eps}"));
    }
    let clip = match t.clip {
        None => td.clip,
        Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::String(s)) if s.eq_ignore_ascii_case("none") => None,
        Some(serde_json::Value::Number(n)) => match n.as_f64() {
            Some(c) if c > 0.0 && c.is_finite() => Some(c),
            _ => {
                problems.push(format!("training.clip must be positive, got {n}"));
                None
            }
        },
        Some(other) => {
            problems.push(format!("training.clip must be a positive number or \"none\", got {other}"));
            None
        }
    };
    let split_ratio = t.split_ratio.unwrap_or(0.7);
    if !(split_ratio > 0.0 && split_ratio < 1.0) {
        problems.push(format!("training.split_ratio must lie in (0, 1), got {split_ratio}"));
    }

    let threads = ov.threads.or(raw.threads);
    if threads == Some(0) {
        problems.push("threads must be at least 1".into());
    }

    let mut datasets = Vec::new();
    for (i, d) in raw.data.datasets.into_iter().enumerate() {
        if d.site.trim().is_empty() {
            problems.push(format!("data.datasets[{i}].site is empty"));
        }
        if d.month.trim().is_empty() {
            problems.push(format!("data.datasets[{i}].month is empty"));
        }
        datasets.push(ResolvedDataset {
            site: d.site,
            month: d.month,
            path: resolve_path(base, &d.path),
        });
    }

    let sine = raw.sine.map(|s| {
        let r = ResolvedSine {
            windows: s.windows.unwrap_or(sd.windows),
            period: s.period.unwrap_or(sd.period),
            amplitude: s.amplitude.unwrap_or(sd.amplitude),
            offset: s.offset.unwrap_or(sd.offset),
            stride: s.stride.unwrap_or(sd.stride),
        };
        if r.windows == 0 || r.stride == 0 || !(r.period > 0.0) {
            problems.push("sine.windows, sine.stride and sine.period must be positive".into());
        }
        r
    });

    let out = match (&ov.out, raw.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => resolve_path(base, &o),
        (None, None) => base.join(DEFAULT_OUT),
    };

    if !problems.is_empty() {
        return Err(CliError::validation(problems.join("; ")));
    }
    Ok(Resolved {
        seed: ov.seed.or(raw.seed).unwrap_or(md.seed),
        out,
        threads,
        model: ResolvedModel {
            cell,
            mode,
            layers,
            hidden_width,
            lookback,
            variants,
        },
        training: ResolvedTraining {
            epochs,
            lr,
            beta1,
            beta2,
            adam_eps,
            clip,
            split_ratio,
        },
        data: ResolvedData {
            cyclic_wind_direction: raw.data.cyclic_wind_direction.unwrap_or(false),
            datasets,
        },
        sine,
    })
}

impl Resolved {
    pub fn train_spec(&self, site: &str, month: &str) -> TrainSpec {
        TrainSpec {
            model: ModelConfig {
                // Both were validated during resolution.
                cell: self.model.cell.parse().unwrap_or(CellKind::Lstm),
                mode: self.model.mode.parse().unwrap_or(StateMode::Stateless),
                layers: self.model.layers,
                input_width: ModelConfig::default().input_width,
                hidden_width: self.model.hidden_width,
                lookback: self.model.lookback,
                seed: self.seed,
            },
            epochs: self.training.epochs,
            adam: AdamHyper {
                lr: self.training.lr,
                beta1: self.training.beta1,
                beta2: self.training.beta2,
                eps: self.training.adam_eps,
            },
            clip: self.training.clip,
            site: site.into(),
            month: month.into(),
        }
    }

    pub fn variants(&self) -> Vec<(CellKind, StateMode)> {
        self.model.variants.iter().filter_map(|v| parse_variant(v)).collect()
    }

    pub fn dataset_specs(&self) -> Vec<DatasetSpec> {
        self.data
            .datasets
            .iter()
            .map(|d| DatasetSpec {
                site: d.site.clone(),
                month: d.month.clone(),
                path: d.path.clone(),
            })
            .collect()
    }

    pub fn sine_spec(&self) -> Option<SineSpec> {
        self.sine.as_ref().map(|s| SineSpec {
            windows: s.windows,
            lookback: self.model.lookback,
            period: s.period,
            amplitude: s.amplitude,
            offset: s.offset,
            stride: s.stride,
        })
    }

    /// Every dataset path that is not a readable file, as one data error.
    pub fn check_files(&self) -> Result<(), CliError> {
        let missing: Vec<String> = self
            .data
            .datasets
            .iter()
            .filter(|d| !d.path.is_file())
            .map(|d| d.path.display().to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::data(format!("missing dataset file(s): {}", missing.join(", "))))
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("resolved config serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Resolved, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::validation(e.to_string()))?;
        resolve(raw, Path::new("/cfg"), &Overrides::default())
    }

    #[test]
    fn defaults_are_filled() {
        let r = parse("{}").unwrap();
        assert_eq!(r.seed, 42);
        assert_eq!(r.model.layers, 10);
        assert_eq!(r.model.cell, "lstm");
        assert_eq!(r.training.epochs, 100);
        assert_eq!(r.training.clip, Some(5.0));
        assert_eq!(r.training.split_ratio, 0.7);
        assert_eq!(
            r.model.variants,
            ["stateless-lstm", "stateful-lstm", "stateless-gru", "stateful-gru"]
        );
    }

    #[test]
    fn variants_are_checked() {
        let r = parse(r#"{"model": {"variants": ["Stateful-GRU"]}}"#).unwrap();
        assert_eq!(r.variants(), [(CellKind::Gru, StateMode::Stateful)]);
        let err = parse(r#"{"model": {"variants": ["lstm"]}}"#).unwrap_err().to_string();
        assert!(err.contains("allowed values"), "{err}");
    }

    #[test]
    fn every_problem_is_listed() {
        let err = parse(r#"{"model": {"cell": "RNN", "layers": 0}, "training": {"lr": -1, "split_ratio": 2}}"#)
            .unwrap_err()
            .to_string();
        for needle in ["RNN", "allowed values: lstm, gru", "model.layers", "training.lr", "split_ratio"] {
            assert!(err.contains(needle), "{needle} missing from {err}");
        }
    }

    #[test]
    fn unknown_keys_fail() {
        assert!(parse(r#"{"modle": {}}"#).is_err());
    }

    #[test]
    fn overrides_and_paths() {
        let raw: RawConfig = serde_json::from_str(
            r#"{"seed": 1, "out": "o", "data": {"datasets": [{"site": "A", "month": "July", "path": "a.csv"}]}}"#,
        )
        .unwrap();
        let ov = Overrides {
            seed: Some(9),
            out: None,
            threads: Some(2),
        };
        let r = resolve(raw, Path::new("/cfg"), &ov).unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.out, PathBuf::from("/cfg/o"));
        assert_eq!(r.data.datasets[0].path, PathBuf::from("/cfg/a.csv"));
        assert_eq!(r.threads, Some(2));
    }

    #[test]
    fn clip_can_be_disabled_and_round_trips() {
        let r = parse(r#"{"training": {"clip": "none"}}"#).unwrap();
        assert_eq!(r.training.clip, None);
        let again = parse(&r.to_json()).unwrap();
        assert_eq!(again, r);
    }
}
