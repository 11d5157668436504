//! NOAA Local Climatological Data ingestion and preparation.
//!
//! Pipeline: [`parse_lcd_csv`] → [`clean`] → [`split`] → [`fit_scaler`] /
//! [`Scaler::apply`] → [`make_windows`].

mod clean;
mod lcd;
mod prepare;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;

pub use clean::{clean, write_clean_csv, write_provenance, CleanDataset, Provenance};
pub use lcd::{parse_lcd_csv, parse_lcd_file, write_lcd_csv, ParseReport, RowError};
pub use prepare::{
    cyclic_wind_direction, fit_scaler, load_site_month, make_windows, split, PreparedData,
    PrepareOptions, Scaler,
};

/// Timestamp text format used in LCD files and in every file this crate writes.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// The nine hourly model inputs, in matrix column order. Wind speed is the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    DewPoint,
    DryBulb,
    RelativeHumidity,
    SeaLevelPressure,
    StationPressure,
    Visibility,
    WetBulb,
    WindDirection,
    WindSpeed,
}

impl Feature {
    pub const ALL: [Feature; 9] = [
        Feature::DewPoint,
        Feature::DryBulb,
        Feature::RelativeHumidity,
        Feature::SeaLevelPressure,
        Feature::StationPressure,
        Feature::Visibility,
        Feature::WetBulb,
        Feature::WindDirection,
        Feature::WindSpeed,
    ];
    pub const COUNT: usize = 9;
    pub const TARGET: Feature = Feature::WindSpeed;

    pub fn index(self) -> usize {
        self as usize
    }

    /// LCD column header.
    pub fn header(self) -> &'static str {
        match self {
            Feature::DewPoint => "HourlyDewPointTemperature",
            Feature::DryBulb => "HourlyDryBulbTemperature",
            Feature::RelativeHumidity => "HourlyRelativeHumidity",
            Feature::SeaLevelPressure => "HourlySeaLevelPressure",
            Feature::StationPressure => "HourlyStationPressure",
            Feature::Visibility => "HourlyVisibility",
            Feature::WetBulb => "HourlyWetBulbTemperature",
            Feature::WindDirection => "HourlyWindDirection",
            Feature::WindSpeed => "HourlyWindSpeed",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Feature::DewPoint | Feature::DryBulb | Feature::WetBulb => "degF",
            Feature::RelativeHumidity => "percent",
            Feature::SeaLevelPressure | Feature::StationPressure => "inHg",
            Feature::Visibility => "miles",
            Feature::WindDirection => "degrees",
            Feature::WindSpeed => "mph",
        }
    }

    /// Physically admissible range; values outside it are treated as missing.
    pub fn valid_range(self) -> (f64, f64) {
        match self {
            Feature::DewPoint | Feature::DryBulb | Feature::WetBulb => (-80.0, 140.0),
            Feature::RelativeHumidity => (0.0, 100.0),
            Feature::SeaLevelPressure | Feature::StationPressure => (20.0, 33.0),
            Feature::Visibility => (0.0, 100.0),
            Feature::WindDirection => (0.0, 360.0),
            Feature::WindSpeed => (0.0, 200.0),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.header())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Feature::ALL
            .into_iter()
            .find(|f| f.header() == s)
            .ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

/// One hourly report with any of its nine features possibly missing.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRecord {
    pub timestamp: NaiveDateTime,
    pub values: [Option<f64>; Feature::COUNT],
}

impl HourlyRecord {
    pub fn get(&self, f: Feature) -> Option<f64> {
        self.values[f.index()]
    }

    pub fn wind_speed(&self) -> Option<f64> {
        self.get(Feature::WindSpeed)
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }
}
