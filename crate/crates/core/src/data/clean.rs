use std::collections::HashSet;
use std::io::Write;

use chrono::{NaiveDateTime, Timelike};

use super::{Feature, HourlyRecord, ParseReport, TIMESTAMP_FORMAT};
use crate::error::{Error, Result};
use crate::numerics::Tensor2;

/// What cleaning (and, when known, parsing) did to the raw file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub parse: ParseReport,
    pub input_records: usize,
    /// Extra reports within an already-seen hour; the first report wins.
    pub duplicate_hours_dropped: usize,
    /// Rows before the first report with all nine features present.
    pub leading_rows_dropped: usize,
    /// Forward-filled cells per feature, in [`Feature::ALL`] order.
    pub imputed: [usize; Feature::COUNT],
}

impl Provenance {
    pub fn total_imputed(&self) -> usize {
        self.imputed.iter().sum()
    }

    /// `key=value` pairs in a stable order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let p = &self.parse;
        let mut out = vec![
            ("rows_read".to_string(), p.rows_read.to_string()),
            ("rows_without_hourly".to_string(), p.rows_without_hourly.to_string()),
            ("row_errors".to_string(), p.row_errors.len().to_string()),
            ("missing_cells".to_string(), p.missing_values.to_string()),
            ("suffix_stripped".to_string(), p.suffix_stripped.to_string()),
            ("out_of_range".to_string(), p.out_of_range.to_string()),
            ("unparseable".to_string(), p.unparseable.to_string()),
            ("input_records".to_string(), self.input_records.to_string()),
            ("duplicate_hours_dropped".to_string(), self.duplicate_hours_dropped.to_string()),
            ("leading_rows_dropped".to_string(), self.leading_rows_dropped.to_string()),
        ];
        for f in Feature::ALL {
            out.push((format!("imputed.{}", f.header()), self.imputed[f.index()].to_string()));
        }
        out.push(("imputed_total".to_string(), self.total_imputed().to_string()));
        out
    }
}

/// Gap-free, hour-unique feature matrix ready for splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanDataset {
    pub timestamps: Vec<NaiveDateTime>,
    /// `timestamps.len() × columns.len()`.
    pub matrix: Tensor2,
    pub columns: Vec<String>,
    /// Column holding the wind speed target.
    pub target_col: usize,
    pub provenance: Provenance,
}

impl CleanDataset {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn target(&self) -> Vec<f64> {
        (0..self.len()).map(|r| self.matrix.get(r, self.target_col)).collect()
    }

    /// Back to records; only valid for the raw nine-feature layout.
    pub fn to_records(&self) -> Result<Vec<HourlyRecord>> {
        if self.columns.iter().map(String::as_str).ne(Feature::ALL.iter().map(|f| f.header())) {
            return Err(Error::Data("to_records needs the raw nine-feature column layout".into()));
        }
        Ok(self
            .timestamps
            .iter()
            .enumerate()
            .map(|(r, &timestamp)| {
                let mut values = [None; Feature::COUNT];
                for (c, v) in values.iter_mut().enumerate() {
                    *v = Some(self.matrix.get(r, c));
                }
                HourlyRecord { timestamp, values }
            })
            .collect())
    }

    /// Rows `range` as a new dataset with the same columns and provenance.
    pub(crate) fn slice(&self, start: usize, end: usize) -> Result<CleanDataset> {
        let w = self.width();
        let data = self.matrix.data()[start * w..end * w].to_vec();
        Ok(CleanDataset {
            timestamps: self.timestamps[start..end].to_vec(),
            matrix: Tensor2::new(end - start, w, data)?,
            columns: self.columns.clone(),
            target_col: self.target_col,
            provenance: self.provenance.clone(),
        })
    }
}

fn hour_key(t: &NaiveDateTime) -> (chrono::NaiveDate, u32) {
    (t.date(), t.hour())
}

/// Dedupes to one report per clock hour (first wins), drops rows before the
/// first complete report, then forward-fills remaining gaps.
///
/// Missing hours are not synthesized. A feature that never has a value is an
/// error naming it.
pub fn clean(records: &[HourlyRecord]) -> Result<CleanDataset> {
    let mut prov = Provenance {
        input_records: records.len(),
        ..Provenance::default()
    };

    let mut seen = HashSet::new();
    let unique: Vec<&HourlyRecord> = records
        .iter()
        .filter(|r| seen.insert(hour_key(&r.timestamp)))
        .collect();
    prov.duplicate_hours_dropped = records.len() - unique.len();

    let empty: Vec<&str> = Feature::ALL
        .iter()
        .filter(|f| unique.iter().all(|r| r.get(**f).is_none()))
        .map(|f| f.header())
        .collect();
    if !empty.is_empty() {
        return Err(Error::Data(format!("no values at all for: {}", empty.join(", "))));
    }

    let first = unique
        .iter()
        .position(|r| r.is_complete())
        .ok_or_else(|| Error::Data("no report has all nine features present".into()))?;
    prov.leading_rows_dropped = first;

    let kept = &unique[first..];
    let mut data = Vec::with_capacity(kept.len() * Feature::COUNT);
    let mut last = [0.0; Feature::COUNT];
    for r in kept {
        for f in Feature::ALL {
            let i = f.index();
            match r.values[i] {
                Some(v) => last[i] = v,
                None => prov.imputed[i] += 1,
            }
            data.push(last[i]);
        }
    }

    Ok(CleanDataset {
        timestamps: kept.iter().map(|r| r.timestamp).collect(),
        matrix: Tensor2::new(kept.len(), Feature::COUNT, data)?,
        columns: Feature::ALL.iter().map(|f| f.header().to_string()).collect(),
        target_col: Feature::TARGET.index(),
        provenance: prov,
    })
}

/// Writes `timestamp` plus every column.
pub fn write_clean_csv<W: Write>(ds: &CleanDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Format(format!("cannot write CSV: {e}"));
    let mut header = vec!["timestamp".to_string()];
    header.extend(ds.columns.iter().cloned());
    w.write_record(&header).map_err(to_err)?;
    for (r, t) in ds.timestamps.iter().enumerate() {
        let mut row = vec![t.format(TIMESTAMP_FORMAT).to_string()];
        row.extend((0..ds.width()).map(|c| ds.matrix.get(r, c).to_string()));
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Format(format!("cannot write CSV: {e}")))
}

/// `key=value` report of the cleaning counters.
pub fn write_provenance<W: Write>(prov: &Provenance, mut out: W) -> std::io::Result<()> {
    for (k, v) in prov.entries() {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(h: u32, m: u32, values: [Option<f64>; 9]) -> HourlyRecord {
        HourlyRecord {
            timestamp: chrono::NaiveDate::from_ymd_opt(2022, 7, 1)
                .unwrap()
                .and_hms_opt(h, m, 0)
                .unwrap(),
            values,
        }
    }

    fn full(v: f64) -> [Option<f64>; 9] {
        std::array::from_fn(|i| Some(v + i as f64))
    }

    #[test]
    fn dedupe_fill_and_leading_drop() {
        let mut partial = full(0.0);
        partial[3] = None;
        let mut gap = full(20.0);
        gap[8] = None;
        gap[1] = None;
        let records = vec![
            rec(0, 53, partial),
            rec(1, 14, full(10.0)),
            rec(1, 53, full(99.0)),
            rec(2, 53, gap),
            rec(3, 53, full(30.0)),
        ];
        let ds = clean(&records).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.provenance.duplicate_hours_dropped, 1);
        assert_eq!(ds.provenance.leading_rows_dropped, 1);
        assert_eq!(ds.provenance.imputed[8], 1);
        assert_eq!(ds.provenance.imputed[1], 1);
        assert_eq!(ds.provenance.total_imputed(), 2);
        // First report in the hour wins; gaps take the previous hour's value.
        assert_eq!(ds.matrix.get(0, 8), 18.0);
        assert_eq!(ds.matrix.get(1, 8), 18.0);
        assert_eq!(ds.matrix.get(1, 1), 11.0);
        assert_eq!(ds.matrix.get(1, 0), 20.0);
        assert_eq!(ds.target(), vec![18.0, 18.0, 38.0]);
    }

    #[test]
    fn idempotent() {
        let mut a = full(1.0);
        a[5] = None;
        let records = vec![rec(0, 53, full(0.0)), rec(0, 58, full(5.0)), rec(1, 53, a), rec(2, 53, full(2.0))];
        let once = clean(&records).unwrap();
        let twice = clean(&once.to_records().unwrap()).unwrap();
        assert_eq!(once.timestamps, twice.timestamps);
        assert_eq!(once.matrix, twice.matrix);
        assert_eq!(twice.provenance.total_imputed(), 0);
        assert_eq!(twice.provenance.duplicate_hours_dropped, 0);
    }

    #[test]
    fn all_missing_feature_is_named() {
        let mut v = full(0.0);
        v[5] = None;
        let err = clean(&[rec(0, 53, v), rec(1, 53, v)]).unwrap_err().to_string();
        assert!(err.contains("HourlyVisibility"), "{err}");
    }

    #[test]
    fn csv_and_provenance_export() {
        let ds = clean(&[rec(0, 53, full(0.5)), rec(1, 53, full(1.0))]).unwrap();
        let mut buf = Vec::new();
        write_clean_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("timestamp,HourlyDewPointTemperature,"));
        assert!(text.contains("2022-07-01T01:53:00,1,2,"));
        let mut p = Vec::new();
        write_provenance(&ds.provenance, &mut p).unwrap();
        let p = String::from_utf8(p).unwrap();
        assert!(p.contains("duplicate_hours_dropped=0\n") && p.contains("imputed_total=0\n"));
    }
}
