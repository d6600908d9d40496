//! Per-seed metrics rows and their CSV form.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One row of `metrics_seed<k>.csv`. Rows are written at episode ends and at
/// evaluation points; empty cells mean "not measured since the last row".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub step: u64,
    pub episode_return: Option<f64>,
    pub eval_score: Option<f64>,
    /// Mean training loss over gradient steps since the previous row.
    pub loss: Option<f64>,
    pub mean_pool_alignment: Option<f64>,
    pub mean_selected_alignment: Option<f64>,
    pub epsilon: f64,
}

pub fn metrics_file_name(seed: u64) -> String {
    format!("metrics_seed{seed}.csv")
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| CliError::csv(path, e))).collect()
}

/// Running means of the per-gradient-step quantities between rows.
#[derive(Debug, Clone, Default)]
pub(crate) struct StepAccumulator {
    n: u64,
    loss: f64,
    pool: f64,
    selected: f64,
}

impl StepAccumulator {
    pub(crate) fn add(&mut self, loss: f64, pool: f64, selected: f64) {
        self.n += 1;
        self.loss += loss;
        self.pool += pool;
        self.selected += selected;
    }

    /// `(loss, pool, selected)` means, then reset.
    pub(crate) fn drain(&mut self) -> (Option<f64>, Option<f64>, Option<f64>) {
        let out = if self.n == 0 {
            (None, None, None)
        } else {
            let n = self.n as f64;
            (Some(self.loss / n), Some(self.pool / n), Some(self.selected / n))
        };
        *self = StepAccumulator::default();
        out
    }
}
