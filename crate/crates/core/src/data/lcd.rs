use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;

use super::{Feature, HourlyRecord, TIMESTAMP_FORMAT};
use crate::error::{Error, Result};

/// A row that could not be turned into a record. Parsing continues past it.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line in the source file.
    pub line: u64,
    pub message: String,
}

/// Counters describing what the parser did with the raw rows and cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    pub rows_read: usize,
    /// Daily/monthly summary rows and rows with every hourly field blank.
    pub rows_without_hourly: usize,
    pub records: usize,
    /// Cells that were empty, `*`, `M` or `VRB`.
    pub missing_values: usize,
    /// Cells that carried a trailing quality letter, e.g. `72s`.
    pub suffix_stripped: usize,
    pub out_of_range: usize,
    pub unparseable: usize,
    pub row_errors: Vec<RowError>,
}

enum Cell {
    Missing,
    Value { v: f64, suffixed: bool },
    Unparseable,
}

fn parse_cell(raw: &str) -> Cell {
    let s = raw.trim();
    if s.is_empty() || s == "*" || s == "M" || s.eq_ignore_ascii_case("VRB") {
        return Cell::Missing;
    }
    let stripped = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    if stripped.is_empty() {
        // Trace precipitation and similar letter-only codes.
        return Cell::Missing;
    }
    match stripped.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value {
            v,
            suffixed: stripped.len() != s.len(),
        },
        _ => Cell::Unparseable,
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Parses an LCD CSV export. Columns are located by header name, so extra or
/// reordered columns are fine; `DATE` and the nine hourly headers are required.
///
/// Rows with a bad or out-of-order timestamp are reported in
/// [`ParseReport::row_errors`] and skipped. Returned records are in
/// strictly increasing timestamp order.
pub fn parse_lcd_csv<R: Read>(input: R) -> Result<(Vec<HourlyRecord>, ParseReport)> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("cannot read CSV header: {e}")))?
        .clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
    };

    let mut missing: Vec<&str> = Vec::new();
    let date_col = position("DATE");
    if date_col.is_none() {
        missing.push("DATE");
    }
    let mut cols = [0usize; Feature::COUNT];
    for f in Feature::ALL {
        match position(f.header()) {
            Some(i) => cols[f.index()] = i,
            None => missing.push(f.header()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Format(format!("missing required column(s): {}", missing.join(", "))));
    }
    let date_col = date_col.unwrap_or_default();
    let type_col = position("REPORT_TYPE");

    let mut report = ParseReport::default();
    let mut records: Vec<HourlyRecord> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        report.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(i as u64 + 2, |p| p.line());
                report.row_errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(i as u64 + 2, |p| p.line());
        let field = |c: usize| row.get(c).unwrap_or("");

        let summary = type_col.is_some_and(|c| {
            let t = field(c).trim();
            t.starts_with("SOD") || t.starts_with("SOM")
        });
        if summary || cols.iter().all(|&c| field(c).trim().is_empty()) {
            report.rows_without_hourly += 1;
            continue;
        }

        let Some(timestamp) = parse_timestamp(field(date_col)) else {
            report.row_errors.push(RowError {
                line,
                message: format!("unparseable DATE {:?}", field(date_col)),
            });
            continue;
        };
        if let Some(last) = records.last() {
            if timestamp <= last.timestamp {
                report.row_errors.push(RowError {
                    line,
                    message: format!("DATE {timestamp} does not follow the preceding report {}", last.timestamp),
                });
                continue;
            }
        }

        let mut values = [None; Feature::COUNT];
        for f in Feature::ALL {
            values[f.index()] = match parse_cell(field(cols[f.index()])) {
                Cell::Missing => {
                    report.missing_values += 1;
                    None
                }
                Cell::Unparseable => {
                    report.unparseable += 1;
                    None
                }
                Cell::Value { v, suffixed } => {
                    report.suffix_stripped += usize::from(suffixed);
                    let (lo, hi) = f.valid_range();
                    if (lo..=hi).contains(&v) {
                        Some(v)
                    } else {
                        report.out_of_range += 1;
                        None
                    }
                }
            };
        }
        records.push(HourlyRecord { timestamp, values });
    }
    report.records = records.len();
    Ok((records, report))
}

pub fn parse_lcd_file(path: &Path) -> Result<(Vec<HourlyRecord>, ParseReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lcd_csv(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writes records in the LCD layout (`DATE` plus the nine hourly columns).
/// Missing values become empty cells; the output parses back to equal records.
pub fn write_lcd_csv<W: Write>(records: &[HourlyRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Always)
        .from_writer(out);
    let to_err = |e: csv::Error| Error::Format(format!("cannot write CSV: {e}"));
    let mut header = vec!["DATE"];
    header.extend(Feature::ALL.iter().map(|f| f.header()));
    w.write_record(&header).map_err(to_err)?;
    for r in records {
        let mut row = vec![r.timestamp.format(TIMESTAMP_FORMAT).to_string()];
        row.extend(r.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Format(format!("cannot write CSV: {e}")))
}
