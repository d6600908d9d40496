//! Learning-curve comparison of two run directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::metrics::read_metrics;

/// Trailing moving-average window applied to each seed's evaluation curve.
pub const SMOOTHING_WINDOW: usize = 10;

pub type Curve = Vec<(u64, f64)>;

/// Evaluation curves of every `metrics_seed*.csv` in `dir`, keyed by seed.
pub fn load_eval_curves(dir: &Path) -> Result<BTreeMap<u64, Curve>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut curves = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if !(name.starts_with("metrics_seed") && name.ends_with(".csv")) {
            continue;
        }
        let rows = read_metrics(&path)?;
        let Some(seed) = rows.first().map(|r| r.seed) else {
            log::warn!("{}: no rows", path.display());
            continue;
        };
        let curve: Curve = rows.iter().filter_map(|r| r.eval_score.map(|s| (r.step, s))).collect();
        if curve.is_empty() {
            log::warn!("{}: no evaluation rows", path.display());
            continue;
        }
        curves.insert(seed, curve);
    }
    if curves.is_empty() {
        return Err(CliError::Data(format!("{}: no metrics_seed*.csv with evaluation rows", dir.display())));
    }
    Ok(curves)
}

/// Mean of the last `window` values at each point (fewer at the start).
pub fn trailing_moving_average(curve: &[(u64, f64)], window: usize) -> Curve {
    let window = window.max(1);
    let mut sum = 0.0;
    curve
        .iter()
        .enumerate()
        .map(|(i, &(step, v))| {
            sum += v;
            if i >= window {
                sum -= curve[i - window].1;
            }
            (step, sum / (i + 1).min(window) as f64)
        })
        .collect()
}

/// Linear-interpolated quantile of unsorted values, `q ∈ [0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Normalized area under an evaluation curve: the mean score over its points.
pub fn area_under_curve(curve: &[(u64, f64)]) -> f64 {
    curve.iter().map(|p| p.1).sum::<f64>() / curve.len() as f64
}

/// Value of `curve` at the point whose step is nearest to `step`.
fn nearest(curve: &[(u64, f64)], step: u64) -> (u64, f64) {
    *curve.iter().min_by_key(|p| p.0.abs_diff(step)).expect("non-empty curve")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Band {
    fn of(values: &[f64]) -> Self {
        Band { median: median(values), q25: quantile(values, 0.25), q75: quantile(values, 0.75) }
    }
}

/// Per-step median and interquartile band of smoothed curves across seeds,
/// on the step grid `grid`. Seeds without that exact step contribute their
/// nearest step, with a warning.
pub fn aggregate(curves: &BTreeMap<u64, Curve>, grid: &[u64], label: &str) -> Vec<Band> {
    let smoothed: Vec<(u64, Curve)> =
        curves.iter().map(|(&seed, c)| (seed, trailing_moving_average(c, SMOOTHING_WINDOW))).collect();
    grid.iter()
        .map(|&step| {
            let values: Vec<f64> = smoothed
                .iter()
                .map(|(seed, c)| {
                    let (found, v) = nearest(c, step);
                    if found != step {
                        log::warn!("{label} seed {seed}: no evaluation at step {step}, using step {found}");
                    }
                    v
                })
                .collect();
            Band::of(&values)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub seeds: usize,
    pub median_final: f64,
    pub iqr_final: f64,
    /// Median over seeds of the unsmoothed normalized area under the curve.
    pub median_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: ArmSummary,
    pub treatment: ArmSummary,
    /// Treatment minus baseline median at the final step.
    pub final_median_difference: f64,
    #[serde(skip)]
    pub steps: Vec<u64>,
    #[serde(skip)]
    pub baseline_bands: Vec<Band>,
    #[serde(skip)]
    pub treatment_bands: Vec<Band>,
}

fn summarize(curves: &BTreeMap<u64, Curve>, bands: &[Band]) -> ArmSummary {
    let last = bands.last().expect("non-empty grid");
    let aucs: Vec<f64> = curves.values().map(|c| area_under_curve(c)).collect();
    ArmSummary { seeds: curves.len(), median_final: last.median, iqr_final: last.q75 - last.q25, median_auc: median(&aucs) }
}

/// Compares smoothed evaluation curves of `baseline` against `treatment`.
/// The step grid is the baseline's first seed.
pub fn compare_curves(baseline: &BTreeMap<u64, Curve>, treatment: &BTreeMap<u64, Curve>) -> Comparison {
    let steps: Vec<u64> = baseline.values().next().expect("at least one seed").iter().map(|p| p.0).collect();
    let baseline_bands = aggregate(baseline, &steps, "baseline");
    let treatment_bands = aggregate(treatment, &steps, "treatment");
    let b = summarize(baseline, &baseline_bands);
    let t = summarize(treatment, &treatment_bands);
    Comparison {
        final_median_difference: t.median_final - b.median_final,
        baseline: b,
        treatment: t,
        steps,
        baseline_bands,
        treatment_bands,
    }
}

/// Reads both directories and writes `curves.csv` and `summary.json` to `out`.
pub fn compare_dirs(baseline_dir: &Path, treatment_dir: &Path, out: &Path) -> Result<Comparison> {
    let baseline = load_eval_curves(baseline_dir)?;
    let treatment = load_eval_curves(treatment_dir)?;
    let cmp = compare_curves(&baseline, &treatment);
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let curves_path: PathBuf = out.join("curves.csv");
    let mut w = csv::Writer::from_path(&curves_path).map_err(|e| CliError::csv(&curves_path, e))?;
    w.write_record([
        "step",
        "baseline_median",
        "baseline_q25",
        "baseline_q75",
        "treatment_median",
        "treatment_q25",
        "treatment_q75",
        "median_difference",
    ])
    .map_err(|e| CliError::csv(&curves_path, e))?;
    for ((step, b), t) in cmp.steps.iter().zip(&cmp.baseline_bands).zip(&cmp.treatment_bands) {
        let fields = [b.median, b.q25, b.q75, t.median, t.q25, t.q75, t.median - b.median];
        let mut record = vec![step.to_string()];
        record.extend(fields.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(|e| CliError::csv(&curves_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&curves_path, e))?;

    let summary_path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&cmp).expect("summary serializes");
    fs::write(&summary_path, json).map_err(|e| CliError::io(summary_path, e))?;
    Ok(cmp)
}
