use crate::network::{CellKind, StateMode};

/// Published `(train RMSE, test RMSE)` for the 2022 Mississippi grid, indexed
/// `[site][model][month]` with sites Starkville, Meridian; models in
/// [`super::VARIANTS`] order; months January, July, October.
const TABLE: [[[(f64, f64); 3]; 4]; 2] = [
    [
        [(0.15, 0.19), (0.07, 0.09), (0.14, 0.32)],
        [(0.91, 1.15), (2.73, 3.09), (1.03, 3.02)],
        [(0.16, 0.20), (0.29, 0.32), (1.41, 2.79)],
        [(1.01, 0.71), (0.53, 1.29), (1.04, 1.41)],
    ],
    [
        [(0.27, 0.21), (0.06, 0.13), (0.15, 0.16)],
        [(1.10, 0.48), (0.18, 0.27), (0.29, 0.33)],
        [(0.50, 0.59), (0.09, 0.16), (0.58, 0.61)],
        [(0.62, 0.94), (0.64, 0.75), (1.03, 0.77)],
    ],
];

fn site_index(site: &str) -> Option<usize> {
    let s = site.to_ascii_lowercase();
    if s.contains("starkville") {
        Some(0)
    } else if s.contains("meridian") {
        Some(1)
    } else {
        None
    }
}

fn month_index(month: &str) -> Option<usize> {
    let m = month.trim().to_ascii_lowercase();
    let numeric = m.rsplit(['-', '/']).next().and_then(|p| p.parse::<u32>().ok());
    match (m.get(..3), numeric) {
        (_, Some(1)) | (Some("jan"), _) => Some(0),
        (_, Some(7)) | (Some("jul"), _) => Some(1),
        (_, Some(10)) | (Some("oct"), _) => Some(2),
        _ => None,
    }
}

fn model_index(cell: CellKind, mode: StateMode) -> usize {
    match (cell, mode) {
        (CellKind::Lstm, StateMode::Stateless) => 0,
        (CellKind::Lstm, StateMode::Stateful) => 1,
        (CellKind::Gru, StateMode::Stateless) => 2,
        (CellKind::Gru, StateMode::Stateful) => 3,
    }
}

/// Published RMSE pair for a site/month/model, if one exists. Site names match
/// by substring; months accept names (`July`, `jul`) or numbers (`2022-07`, `7`).
pub fn paper_reference(site: &str, month: &str, cell: CellKind, mode: StateMode) -> Option<(f64, f64)> {
    Some(TABLE[site_index(site)?][model_index(cell, mode)][month_index(month)?])
}
