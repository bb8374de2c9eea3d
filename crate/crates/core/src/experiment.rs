//! Convergence experiments: greedy error, theoretical bound and the median
//! Monte Carlo error side by side over a grid of `(p, dim, n)` cells.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::greedy::{GreedySolver, DEFAULT_CONSTANT};
use crate::instances::random_instance;
use crate::lp_geometry::SpaceSpec;
use crate::maurey::{maurey_sample_with, power_of_two_grid, summarize};

pub const CSV_HEADER: &str = "p,dim,n,k,greedy_error,bound,bound_ratio,maurey_median_error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p_grid: Vec<f64>,
    pub dims: Vec<usize>,
    pub n_points: Vec<usize>,
    #[serde(rename = "K_max")]
    pub k_max: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(rename = "constant_C", default = "default_constant")]
    pub constant_c: f64,
}

fn default_constant() -> f64 {
    DEFAULT_CONSTANT
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.dims.is_empty() || self.n_points.is_empty() {
            return Err(Error::InvalidInput("p_grid, dims and n_points must be nonempty".into()));
        }
        if self.k_max == 0 || self.trials == 0 {
            return Err(Error::InvalidInput("K_max and trials must be at least 1".into()));
        }
        if !(self.constant_c > 0.0 && self.constant_c.is_finite()) {
            return Err(Error::InvalidInput("constant_C must be positive".into()));
        }
        Ok(())
    }

    /// Cells in `(p, dim, n)` lexicographic order of the grids as given.
    fn cells(&self) -> Vec<(f64, usize, usize)> {
        let mut cells = Vec::new();
        for &p in &self.p_grid {
            for &dim in &self.dims {
                for &n in &self.n_points {
                    cells.push((p, dim, n));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub p: f64,
    pub dim: usize,
    pub n: usize,
    pub k: usize,
    pub greedy_error: f64,
    pub bound: f64,
    pub bound_ratio: f64,
    pub maurey_median_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowField {
    GreedyError,
    Bound,
    MaureyMedianError,
}

impl RowField {
    fn get(self, row: &ConvergenceRow) -> f64 {
        match self {
            RowField::GreedyError => row.greedy_error,
            RowField::Bound => row.bound,
            RowField::MaureyMedianError => row.maurey_median_error,
        }
    }
}

/// Instance seed for one cell, mixed from the experiment seed and the cell
/// coordinates with splitmix64.
pub fn cell_seed(seed: u64, p: f64, dim: usize, n: usize) -> u64 {
    let mut h = splitmix64(seed);
    for word in [p.to_bits(), dim as u64, n as u64] {
        h = splitmix64(h ^ word);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    run_convergence_with(config, Execution::default())
}

/// Cells run under `exec`; Monte Carlo trials inside a cell run sequentially
/// so the two levels do not oversubscribe the pool.
pub fn run_convergence_with(config: &ExperimentConfig, exec: Execution) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    let cells = config.cells();
    let results = exec.map_slice(&cells, |&(p, dim, n)| {
        run_cell(config, p, dim, n).map_err(|e| Error::Cell { p, dim, n, source: Box::new(e) })
    });
    let mut rows = Vec::new();
    for cell in results {
        rows.extend(cell?);
    }
    Ok(rows)
}

fn run_cell(config: &ExperimentConfig, p: f64, dim: usize, n: usize) -> Result<Vec<ConvergenceRow>> {
    let space = SpaceSpec::new(p, dim)?;
    let (set, target) = random_instance(dim, n, cell_seed(config.seed, p, dim, n), &space)?;
    let solver = GreedySolver::new(space)?.with_constant(config.constant_c)?;
    let trace = solver.run(&set, &target, config.k_max)?;
    let ks = power_of_two_grid(config.k_max);
    let report = maurey_sample_with(&set, &target, &space, &ks, config.trials, config.seed, Execution::Sequential)?;
    let medians = summarize(&report);
    Ok(ks
        .iter()
        .zip(medians)
        .map(|(&k, summary)| {
            let greedy_error = trace.residual_norms[k - 1];
            let bound = trace.bounds[k - 1];
            let bound_ratio = if bound > 0.0 { greedy_error / bound } else { 0.0 };
            ConvergenceRow {
                p,
                dim,
                n,
                k,
                greedy_error,
                bound,
                bound_ratio,
                maurey_median_error: summary.median,
            }
        })
        .collect())
}

/// Least-squares slope of `ln(value)` against `ln(k)` over points with
/// positive `k` and value. Needs at least four distinct `k`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, v)| *k > 0.0 && *v > 0.0 && v.is_finite())
        .map(|(k, v)| (k.ln(), v.ln()))
        .collect();
    let mut distinct: Vec<f64> = usable.iter().map(|(x, _)| *x).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::DegenerateFit { usable: distinct.len() });
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    Ok(sxy / sxx)
}

/// Slope of `field` over the rows of one cell.
pub fn fit_rate_rows(rows: &[ConvergenceRow], field: RowField) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, field.get(r))).collect();
    fit_rate(&points)
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-4 <= |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rows_to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_sig(r.p),
            r.dim,
            r.n,
            r.k,
            format_sig(r.greedy_error),
            format_sig(r.bound),
            format_sig(r.bound_ratio),
            format_sig(r.maurey_median_error)
        );
    }
    out
}
