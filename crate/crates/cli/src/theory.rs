//! Grid check of the two-update sign model against its closed forms, plus the
//! approximation-bound check on random triples.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tarl_core::rng::{stream, sub_stream, Stream};
use tarl_core::theorysim::{
    approximation_bound_check, binomial_sigma, monte_carlo_model, p_aligned, p_productive_given_aligned,
    random_assumption_triples, BoundCheck,
};
use tarl_core::UpdateModelParams;

use crate::config::ConfigError;
use crate::error::{CliError, Result};

/// Monte Carlo estimates must fall within this many binomial standard errors.
pub const SIGMA_TOLERANCE: f64 = 4.0;

fn default_lambdas() -> Vec<f64> {
    vec![0.55, 0.6, 0.75, 0.9]
}
fn default_cs() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.9, 1.0]
}
fn default_n_samples() -> u64 {
    1_000_000
}
fn default_triples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryGrid {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_cs")]
    pub cs: Vec<f64>,
    #[serde(default = "default_n_samples")]
    pub n_samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Random triples for the approximation-bound check.
    #[serde(default = "default_triples")]
    pub bound_triples: usize,
}

impl Default for TheoryGrid {
    fn default() -> Self {
        TheoryGrid { lambdas: default_lambdas(), cs: default_cs(), n_samples: default_n_samples(), seed: 0, bound_triples: default_triples() }
    }
}

impl TheoryGrid {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let grid: TheoryGrid = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::field(path, e.into_inner().to_string())
        })?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lambdas.is_empty() {
            return Err(ConfigError::field("lambdas", "at least one value is required"));
        }
        if let Some(l) = self.lambdas.iter().find(|&&l| !(l > 0.5 && l < 1.0)) {
            return Err(ConfigError::field("lambdas", format!("each λ must lie in (0.5, 1), got {l}")));
        }
        if self.cs.is_empty() {
            return Err(ConfigError::field("cs", "at least one value is required"));
        }
        if let Some(c) = self.cs.iter().find(|&&c| !(0.0..=1.0).contains(&c)) {
            return Err(ConfigError::field("cs", format!("each c must lie in [0, 1], got {c}")));
        }
        if self.n_samples == 0 {
            return Err(ConfigError::field("n_samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// One `(λ, c)` cell. `sigma` is the binomial standard error of the
/// conditional estimate `mc_p` around `closed_form_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryCell {
    pub lambda: f64,
    pub c: f64,
    pub closed_form_p_aligned: f64,
    pub mc_p_aligned: f64,
    pub closed_form_p: f64,
    pub mc_p: f64,
    pub mc_misaligned_p: f64,
    pub sigma: f64,
    #[serde(skip)]
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TheoryReport {
    pub cells: Vec<TheoryCell>,
    pub bound: BoundCheck,
}

impl TheoryReport {
    /// Every failed check, cell by cell, then the bound check.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.cells.iter().flat_map(|c| c.failures.iter().cloned()).collect();
        if self.bound.fraction != 1.0 {
            out.push(format!(
                "approximation bound held on {} of {} triples",
                self.bound.satisfying, self.bound.checked
            ));
        }
        out
    }
}

fn run_cell(lambda: f64, c: f64, n_samples: u64, seed: u64, index: u64) -> Result<TheoryCell> {
    let params = UpdateModelParams::new(lambda, c)?;
    let cf_aligned = p_aligned(&params);
    let cf_p = p_productive_given_aligned(&params);
    // Stream ids past the named ones keep cells independent of everything else.
    let mut rng = sub_stream(seed, 16 + index);
    let mc = monte_carlo_model(&params, n_samples, &mut rng)?;

    let mut failures = Vec::new();
    let tag = format!("λ={lambda} c={c}");
    if !mc.p_aligned.within_sigmas(cf_aligned, SIGMA_TOLERANCE) {
        failures.push(format!("{tag}: P(aligned) {} vs closed form {cf_aligned}", mc.p_aligned.value));
    }
    if !mc.p_productive_given_aligned.within_sigmas(cf_p, SIGMA_TOLERANCE) {
        failures.push(format!("{tag}: P(productive | aligned) {} vs closed form {cf_p}", mc.p_productive_given_aligned.value));
    }
    if c < 1.0 && !(cf_p > lambda) {
        failures.push(format!("{tag}: closed form {cf_p} does not exceed λ"));
    }
    if c == 1.0 && (cf_p - lambda).abs() >= 1e-12 {
        failures.push(format!("{tag}: closed form {cf_p} differs from λ at full correlation"));
    }
    Ok(TheoryCell {
        lambda,
        c,
        closed_form_p_aligned: cf_aligned,
        mc_p_aligned: mc.p_aligned.value,
        closed_form_p: cf_p,
        mc_p: mc.p_productive_given_aligned.value,
        mc_misaligned_p: mc.p_productive_given_misaligned.value,
        sigma: binomial_sigma(cf_p, mc.p_productive_given_aligned.trials),
        failures,
    })
}

pub fn run_theory(grid: &TheoryGrid) -> Result<TheoryReport> {
    grid.validate()?;
    let cells: Vec<(f64, f64)> = grid.lambdas.iter().flat_map(|&l| grid.cs.iter().map(move |&c| (l, c))).collect();
    let cells = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(l, c))| run_cell(l, c, grid.n_samples, grid.seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let triples = random_assumption_triples(grid.bound_triples, &mut stream(grid.seed, Stream::Theory));
    Ok(TheoryReport { cells, bound: approximation_bound_check(&triples) })
}

pub fn write_theory_csv(path: &Path, cells: &[TheoryCell]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(["λ", "c", "closed_form_p_aligned", "mc_p_aligned", "closed_form_p", "mc_p", "mc_misaligned_p", "sigma"])
        .map_err(|e| CliError::csv(path, e))?;
    for cell in cells {
        w.serialize((
            cell.lambda,
            cell.c,
            cell.closed_form_p_aligned,
            cell.mc_p_aligned,
            cell.closed_form_p,
            cell.mc_p,
            cell.mc_misaligned_p,
            cell.sigma,
        ))
        .map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
