use std::path::Path;

use super::{clean, parse_lcd_file, CleanDataset, Feature, Provenance};
use crate::error::{Error, Result};
use crate::network::Window;
use crate::numerics::Tensor2;

/// Chronological split: the first `⌊n·ratio⌋` rows train, the rest test.
/// Each side must keep at least `lookback + 1` rows.
pub fn split(ds: &CleanDataset, ratio: f64, lookback: usize) -> Result<(CleanDataset, CleanDataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let n = ds.len();
    let n_train = (n as f64 * ratio).floor() as usize;
    let need = lookback + 1;
    if n_train < need || n - n_train < need {
        return Err(Error::Config(format!(
            "split of {n} rows at ratio {ratio} gives {n_train}/{} rows; each side needs at least {need} (lookback + 1)",
            n - n_train
        )));
    }
    Ok((ds.slice(0, n_train)?, ds.slice(n_train, n)?))
}

/// Per-column min-max scaling fitted on the training split.
///
/// Applying it to other data can produce values outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub columns: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaler(train: &CleanDataset) -> Result<Scaler> {
    if train.is_empty() {
        return Err(Error::Data("cannot fit a scaler on zero rows".into()));
    }
    let w = train.width();
    let mut min = vec![f64::INFINITY; w];
    let mut max = vec![f64::NEG_INFINITY; w];
    for row in train.matrix.data().chunks_exact(w) {
        for (c, &v) in row.iter().enumerate() {
            min[c] = min[c].min(v);
            max[c] = max[c].max(v);
        }
    }
    let constant: Vec<&str> = (0..w)
        .filter(|&c| !(max[c] > min[c]))
        .map(|c| train.columns[c].as_str())
        .collect();
    if !constant.is_empty() {
        return Err(Error::Data(format!(
            "constant feature(s) in the training split cannot be scaled: {}",
            constant.join(", ")
        )));
    }
    Ok(Scaler {
        columns: train.columns.clone(),
        min,
        max,
    })
}

impl Scaler {
    pub fn apply(&self, ds: &CleanDataset) -> Result<CleanDataset> {
        if ds.columns != self.columns {
            return Err(Error::Data("scaler columns differ from the dataset columns".into()));
        }
        let w = ds.width();
        let data = ds
            .matrix
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| self.transform(i % w, v))
            .collect();
        Ok(CleanDataset {
            matrix: Tensor2::new(ds.len(), w, data)?,
            ..ds.clone()
        })
    }

    pub fn transform(&self, col: usize, v: f64) -> f64 {
        (v - self.min[col]) / (self.max[col] - self.min[col])
    }

    pub fn inverse(&self, col: usize, v: f64) -> f64 {
        v * (self.max[col] - self.min[col]) + self.min[col]
    }
}

/// Replaces the wind direction column with its sine and cosine.
pub fn cyclic_wind_direction(ds: &CleanDataset) -> Result<CleanDataset> {
    let name = Feature::WindDirection.header();
    let dir = ds
        .columns
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| Error::Data(format!("dataset has no {name} column")))?;
    let mut columns = ds.columns.clone();
    columns.splice(dir..=dir, [format!("{name}Sin"), format!("{name}Cos")]);
    let w = ds.width();
    let mut data = Vec::with_capacity(ds.len() * (w + 1));
    for row in ds.matrix.data().chunks_exact(w) {
        for (c, &v) in row.iter().enumerate() {
            if c == dir {
                let rad = v.to_radians();
                data.push(rad.sin());
                data.push(rad.cos());
            } else {
                data.push(v);
            }
        }
    }
    Ok(CleanDataset {
        timestamps: ds.timestamps.clone(),
        matrix: Tensor2::new(ds.len(), w + 1, data)?,
        columns,
        target_col: ds.target_col + usize::from(ds.target_col > dir),
        provenance: ds.provenance.clone(),
    })
}

/// Stride-1 windows: window `i` holds rows `[i, i + lookback)` and targets row `i + lookback`.
pub fn make_windows(ds: &CleanDataset, lookback: usize) -> Result<Vec<Window>> {
    if lookback == 0 || ds.len() <= lookback {
        return Err(Error::Config(format!(
            "{} rows cannot form a window of lookback {lookback} plus a target",
            ds.len()
        )));
    }
    let w = ds.width();
    (0..ds.len() - lookback)
        .map(|i| {
            let x = Tensor2::new(lookback, w, ds.matrix.data()[i * w..(i + lookback) * w].to_vec())?;
            Ok(Window {
                x,
                y: ds.matrix.get(i + lookback, ds.target_col),
                target_row: i + lookback,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub split_ratio: f64,
    pub lookback: usize,
    pub cyclic_direction: bool,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            split_ratio: 0.7,
            lookback: 24,
            cyclic_direction: false,
        }
    }
}

/// One site-month after the full ingestion pipeline.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Scaled splits.
    pub train: CleanDataset,
    pub test: CleanDataset,
    pub train_windows: Vec<Window>,
    pub test_windows: Vec<Window>,
    pub scaler: Scaler,
}

impl PreparedData {
    pub fn from_clean(ds: &CleanDataset, opts: &PrepareOptions) -> Result<PreparedData> {
        let encoded;
        let ds = if opts.cyclic_direction {
            encoded = cyclic_wind_direction(ds)?;
            &encoded
        } else {
            ds
        };
        let (train, test) = split(ds, opts.split_ratio, opts.lookback)?;
        let scaler = fit_scaler(&train)?;
        let train = scaler.apply(&train)?;
        let test = scaler.apply(&test)?;
        Ok(PreparedData {
            train_windows: make_windows(&train, opts.lookback)?,
            test_windows: make_windows(&test, opts.lookback)?,
            train,
            test,
            scaler,
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.train.provenance
    }

    pub fn input_width(&self) -> usize {
        self.train.width()
    }
}

/// Parse, clean and prepare one LCD file.
pub fn load_site_month(path: &Path, opts: &PrepareOptions) -> Result<PreparedData> {
    let (records, report) = parse_lcd_file(path)?;
    if records.is_empty() {
        return Err(Error::Data(format!("{}: no hourly reports", path.display())));
    }
    let mut ds = clean(&records).map_err(|e| match e {
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    })?;
    ds.provenance.parse = report;
    PreparedData::from_clean(&ds, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn dataset(n: usize) -> CleanDataset {
        let start = NaiveDate::from_ymd_opt(2022, 7, 1).unwrap().and_hms_opt(0, 53, 0).unwrap();
        CleanDataset {
            timestamps: (0..n).map(|i| start + chrono::Duration::hours(i as i64)).collect(),
            matrix: Tensor2::from_fn(n, 9, |r, c| ((r * 7 + c * 3) % 11) as f64 + c as f64 * 0.5),
            columns: Feature::ALL.iter().map(|f| f.header().to_string()).collect(),
            target_col: 8,
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split(&dataset(100), 0.7, 24).unwrap();
        assert_eq!((tr.len(), te.len()), (70, 30));
        assert!(tr.timestamps.last() < te.timestamps.first());
        let ds = dataset(10);
        let (tr, te) = split(&ds, 0.5, 2).unwrap();
        assert_eq!((tr.len(), te.len()), (5, 5));
        assert_eq!(te.matrix.row(0), ds.matrix.row(5));
        assert!(matches!(split(&ds, 0.5, 5), Err(Error::Config(_))));
        assert!(split(&ds, 1.0, 1).is_err());
        assert!(split(&ds, 0.0, 1).is_err());
    }

    #[test]
    fn scaler_contract() {
        let ds = dataset(50);
        let (tr, te) = split(&ds, 0.6, 3).unwrap();
        let s = fit_scaler(&tr).unwrap();
        let scaled = s.apply(&tr).unwrap();
        for c in 0..9 {
            let col: Vec<f64> = (0..scaled.len()).map(|r| scaled.matrix.get(r, c)).collect();
            assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        let mut changed = te.clone();
        changed.matrix = changed.matrix.scale(100.0);
        assert_eq!(fit_scaler(&tr).unwrap(), s);
        assert!(s.apply(&changed).unwrap().matrix.is_finite());
        for r in 0..te.len() {
            for c in 0..9 {
                let v = te.matrix.get(r, c);
                assert!((s.inverse(c, s.transform(c, v)) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_feature_rejected() {
        let mut ds = dataset(20);
        for r in 0..20 {
            ds.matrix.set(r, 5, 10.0);
        }
        let err = fit_scaler(&ds).unwrap_err().to_string();
        assert!(err.contains("HourlyVisibility"), "{err}");
    }

    #[test]
    fn window_counts_and_contents() {
        assert_eq!(make_windows(&dataset(25), 24).unwrap().len(), 1);
        let ds = dataset(100);
        let ws = make_windows(&ds, 24).unwrap();
        assert_eq!(ws.len(), 76);
        assert_eq!(ws[0].y, ds.matrix.get(24, 8));
        for &i in &[0usize, 17, 51, 75] {
            for t in 0..24 {
                assert_eq!(ws[i].x.row(t), ds.matrix.row(i + t));
            }
            assert_eq!(ws[i].target_row, i + 24);
        }
        assert!(make_windows(&dataset(24), 24).is_err());
    }

    #[test]
    fn cyclic_encoding() {
        let mut ds = dataset(3);
        ds.matrix.set(0, 7, 90.0);
        let enc = cyclic_wind_direction(&ds).unwrap();
        assert_eq!(enc.width(), 10);
        assert_eq!(enc.target_col, 9);
        assert_eq!(enc.columns[7], "HourlyWindDirectionSin");
        assert!((enc.matrix.get(0, 7) - 1.0).abs() < 1e-15);
        assert!(enc.matrix.get(0, 8).abs() < 1e-15);
        assert_eq!(enc.target(), ds.target());
    }
}
