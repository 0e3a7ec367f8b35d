use colpitts_sync::{Algorithm, OptResult};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRow {
    pub experiment: usize,
    pub k1: f64,
    pub k3: f64,
    pub tss: f64,
}

/// Table of repeated optimizations with cost aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub algorithm: Algorithm,
    pub rows: Vec<BatchRow>,
    pub min_tss: f64,
    pub median_tss: f64,
    pub max_tss: f64,
    /// `max_tss - min_tss`.
    pub spread: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl BatchSummary {
    /// `results[i]` is experiment `i + 1`. Panics on an empty batch.
    pub fn from_results(algorithm: Algorithm, results: &[OptResult]) -> Self {
        assert!(!results.is_empty(), "batch needs at least one run");
        let rows: Vec<BatchRow> = results
            .iter()
            .enumerate()
            .map(|(i, r)| BatchRow {
                experiment: i + 1,
                k1: r.best_point[0],
                k3: r.best_point[1],
                tss: r.best_cost,
            })
            .collect();
        let tss: Vec<f64> = rows.iter().map(|r| r.tss).collect();
        let min_tss = tss.iter().copied().fold(f64::INFINITY, f64::min);
        let max_tss = tss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            algorithm,
            median_tss: median(&tss),
            spread: max_tss - min_tss,
            min_tss,
            max_tss,
            rows,
        }
    }
}
