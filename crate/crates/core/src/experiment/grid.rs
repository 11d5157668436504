use std::io::Write;
use std::path::PathBuf;

use super::{paper_reference, run_experiment, variant_label, ExperimentReport, TrainSpec, VARIANTS};
use crate::data::{load_site_month, PrepareOptions};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::network::{CellKind, StateMode};

pub const SUMMARY_HEADER: &str =
    "site,month,model,train_rmse,test_rmse,train_mse,test_mse,paper_train_rmse,paper_test_rmse";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub site: String,
    pub month: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Site-months in declaration order.
    pub datasets: Vec<DatasetSpec>,
    /// Shared hyperparameters; cell kind, state mode, site and month are
    /// overridden per cell.
    pub train: TrainSpec,
    pub split_ratio: f64,
    pub cyclic_direction: bool,
    pub variants: Vec<(CellKind, StateMode)>,
}

impl GridSpec {
    pub fn new(datasets: Vec<DatasetSpec>, train: TrainSpec) -> Self {
        GridSpec {
            datasets,
            train,
            split_ratio: PrepareOptions::default().split_ratio,
            cyclic_direction: false,
            variants: VARIANTS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Dataset-major, then variant order.
    pub reports: Vec<ExperimentReport>,
}

/// Trains every (dataset, variant) cell. All files are checked before any
/// training starts; cells run through `exec` and come back in declaration order.
pub fn run_grid(spec: &GridSpec, exec: Execution) -> Result<GridResult> {
    if spec.datasets.is_empty() || spec.variants.is_empty() {
        return Err(Error::Config("grid needs at least one dataset and one variant".into()));
    }
    let missing: Vec<String> = spec
        .datasets
        .iter()
        .filter(|d| !d.path.is_file())
        .map(|d| d.path.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!("missing dataset file(s): {}", missing.join(", "))));
    }
    spec.train.validate()?;

    let opts = PrepareOptions {
        split_ratio: spec.split_ratio,
        lookback: spec.train.model.lookback,
        cyclic_direction: spec.cyclic_direction,
    };
    let prepared = exec
        .map(&spec.datasets, |d| load_site_month(&d.path, &opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, CellKind, StateMode)> = (0..spec.datasets.len())
        .flat_map(|d| spec.variants.iter().map(move |&(c, m)| (d, c, m)))
        .collect();
    let reports = exec
        .map(&jobs, |&(d, cell, mode)| {
            let mut t = spec.train.clone();
            t.model.cell = cell;
            t.model.mode = mode;
            t.site = spec.datasets[d].site.clone();
            t.month = spec.datasets[d].month.clone();
            run_experiment(&t, &prepared[d]).map(|(_, r)| r)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult { reports })
}

fn reference(r: &ExperimentReport) -> Option<(f64, f64)> {
    paper_reference(&r.site, &r.month, r.config.cell, r.config.mode)
}

/// One CSV row per report, with published values beside measured ones.
pub fn write_grid_summary_csv<W: Write>(reports: &[ExperimentReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        let (pt, pe) = reference(r).map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
        w.write_record([
            r.site.clone(),
            r.month.clone(),
            variant_label(r.config.cell, r.config.mode).to_string(),
            r.train_rmse.to_string(),
            r.test_rmse.to_string(),
            r.train_mse.to_string(),
            r.test_mse.to_string(),
            pt,
            pe,
        ])?;
    }
    w.flush()
}

fn unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Aligned text table: one block per site, one row per model, and for every
/// month the measured train/test RMSE followed by the published pair.
pub fn write_grid_table<W: Write>(reports: &[ExperimentReport], mut out: W) -> std::io::Result<()> {
    let sites = unique(reports.iter().map(|r| r.site.as_str()));
    let months = unique(reports.iter().map(|r| r.month.as_str()));
    const CELL: usize = 31;
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));

    write!(out, "{:<12}{:<16}", "", "")?;
    for m in &months {
        write!(out, "| {:<CELL$}", m)?;
    }
    writeln!(out)?;
    write!(out, "{:<12}{:<16}", "Site", "Model")?;
    for _ in &months {
        write!(out, "| {:<CELL$}", "Train  Test   (paper Train/Test)")?;
    }
    writeln!(out)?;
    writeln!(out, "{}", "-".repeat(28 + months.len() * (CELL + 2)))?;
    for site in &sites {
        let mut variants: Vec<(CellKind, StateMode)> = Vec::new();
        for r in reports.iter().filter(|r| r.site == *site) {
            let v = (r.config.cell, r.config.mode);
            if !variants.contains(&v) {
                variants.push(v);
            }
        }
        for (i, &(cell, mode)) in variants.iter().enumerate() {
            let label = if i == 0 { *site } else { "" };
            write!(out, "{:<12}{:<16}", label, variant_label(cell, mode))?;
            for m in &months {
                let r = reports
                    .iter()
                    .find(|r| r.site == *site && r.month == *m && r.config.cell == cell && r.config.mode == mode);
                let text = match r {
                    Some(r) => {
                        let p = reference(r);
                        format!(
                            "{:<6} {:<6} ({} / {})",
                            format!("{:.3}", r.train_rmse),
                            format!("{:.3}", r.test_rmse),
                            fmt(p.map(|p| p.0)),
                            fmt(p.map(|p| p.1))
                        )
                    }
                    None => "-".to_string(),
                };
                write!(out, "| {:<CELL$}", text)?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
