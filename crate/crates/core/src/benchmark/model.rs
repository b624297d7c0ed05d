//! Latency/bandwidth runtime model for one time step workload on `p` processes:
//!
//! ```text
//! T(N, p) = (d1 N³ + d2 [N ln N]³) / (Bc p) + Ln + d3 ln p
//! ```
//!
//! An alternative form doubles the FFT term (`2 d2 [N ln N]³`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::records::ScalingRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// `d2 [N ln N]³`
    #[default]
    Final,
    /// `2 d2 [N ln N]³`
    DoubledFft,
}

impl FormulaVariant {
    fn fft_factor(self) -> f64 {
        match self {
            FormulaVariant::Final => 1.0,
            FormulaVariant::DoubledFft => 2.0,
        }
    }
}

/// Logarithm used in the network term `d3 log p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    pub variant: FormulaVariant,
    pub log_base: LogBase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfModelParams {
    /// Pointwise work per grid point.
    pub d1: f64,
    /// FFT work constant.
    pub d2: f64,
    /// Network constant multiplying `log p`.
    pub d3: f64,
    /// Per-core bandwidth.
    pub bc: f64,
    /// Minimum network latency, seconds.
    pub ln: f64,
}

impl PerfModelParams {
    pub fn new(d1: f64, d2: f64, d3: f64, bc: f64, ln: f64) -> Result<Self> {
        let p = Self { d1, d2, d3, bc, ln };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3), ("Ln", self.ln)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        if !(self.bc.is_finite() && self.bc > 0.0) {
            return Err(Error::InvalidParameter(format!("Bc = {} must be positive", self.bc)));
        }
        Ok(())
    }

    /// Coefficient of `1/p`: `(d1 N³ + f d2 [N ln N]³) / Bc`.
    pub fn work(&self, n: u64, options: ModelOptions) -> f64 {
        let (pointwise, fft) = work_terms(n);
        (self.d1 * pointwise + options.variant.fft_factor() * self.d2 * fft) / self.bc
    }
}

/// `(N³, [N ln N]³)`.
fn work_terms(n: u64) -> (f64, f64) {
    let n = n as f64;
    (n.powi(3), (n * n.ln()).powi(3))
}

/// Predicted seconds for grid size `n` on `p` processes.
pub fn model_time(params: &PerfModelParams, n: u64, p: u64, options: ModelOptions) -> f64 {
    let p = p.max(1) as f64;
    params.work(n, options) / p + params.ln + params.d3 * options.log_base.log(p)
}

/// Lumped three-term fit `T(p) = work/p + latency + network · log p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub n: u64,
    /// `(d1 N³ + d2 [N ln N]³)/Bc`; `d1` and `d2` are not separable at one `N`.
    pub work: f64,
    /// `Ln`
    pub latency: f64,
    /// `d3`
    pub network: f64,
    /// Root-mean-square residual, seconds.
    pub residual_rms: f64,
    pub points: usize,
    pub options: ModelOptions,
}

impl ModelFit {
    pub fn predict(&self, p: u64) -> f64 {
        let p = p.max(1) as f64;
        self.work / p + self.latency + self.network * self.options.log_base.log(p)
    }

    /// Continuous minimiser of the fitted curve, `work/network` scaled by the
    /// log base; `None` when the network term vanishes.
    pub fn optimal_processes(&self) -> Option<f64> {
        (self.network > 0.0).then(|| match self.options.log_base {
            LogBase::Natural => self.work / self.network,
            LogBase::Two => self.work * std::f64::consts::LN_2 / self.network,
        })
    }
}

/// Fits the lumped model to a strong-scaling series at grid size `n` by
/// non-negative least squares over the basis `{1/p, 1, log p}`.
pub fn fit_model(records: &[ScalingRecord], n: u64, options: ModelOptions) -> Result<ModelFit> {
    if records.len() < 4 {
        return Err(Error::Underdetermined(format!(
            "{} records; at least 4 are needed",
            records.len()
        )));
    }
    let mut distinct: Vec<u64> = records.iter().map(|r| r.cores).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Underdetermined(format!(
            "records span {} distinct process counts; at least 3 are needed",
            distinct.len()
        )));
    }
    if records.iter().all(|r| r.time_seconds == 0.0) {
        return Err(Error::Underdetermined("all times are zero".into()));
    }
    if let Some(bad) = records.iter().find(|r| !(r.time_seconds.is_finite() && r.time_seconds >= 0.0)) {
        return Err(Error::InvalidParameter(format!("time {} is not a valid duration", bad.time_seconds)));
    }

    let rows = records.len();
    let a = DMatrix::from_fn(rows, 3, |i, j| {
        let p = records[i].cores as f64;
        match j {
            0 => 1.0 / p,
            1 => 1.0,
            _ => options.log_base.log(p),
        }
    });
    let b = DVector::from_iterator(rows, records.iter().map(|r| r.time_seconds));
    let (x, residual_rms) = nnls(&a, &b);
    Ok(ModelFit {
        n,
        work: x[0],
        latency: x[1],
        network: x[2],
        residual_rms,
        points: rows,
        options,
    })
}

/// Separates `d1` and `d2` from series at two or more grid sizes, given `Bc`.
/// Basis: `{N³/(Bc p), f [N ln N]³/(Bc p), 1, log p}`.
pub fn fit_model_separated(samples: &[(u64, ScalingRecord)], bc: f64, options: ModelOptions) -> Result<(PerfModelParams, f64)> {
    if !(bc.is_finite() && bc > 0.0) {
        return Err(Error::InvalidParameter(format!("Bc = {bc} must be positive")));
    }
    let mut sizes: Vec<u64> = samples.iter().map(|(n, _)| *n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 || samples.len() < 5 {
        return Err(Error::Underdetermined(format!(
            "{} records at {} grid sizes; separating d1 and d2 needs at least 5 records at 2 sizes",
            samples.len(),
            sizes.len()
        )));
    }
    let a = DMatrix::from_fn(samples.len(), 4, |i, j| {
        let (n, r) = &samples[i];
        let p = r.cores as f64;
        let (pointwise, fft) = work_terms(*n);
        match j {
            0 => pointwise / (bc * p),
            1 => options.variant.fft_factor() * fft / (bc * p),
            2 => 1.0,
            _ => options.log_base.log(p),
        }
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|(_, r)| r.time_seconds));
    let (x, residual) = nnls(&a, &b);
    Ok((PerfModelParams { d1: x[0], d2: x[1], ln: x[2], d3: x[3], bc }, residual))
}

/// Exact non-negative least squares for a handful of columns: solves the
/// unconstrained problem on every column subset and keeps the best feasible one.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let cols = a.ncols();
    assert!(cols <= 8, "subset enumeration is for small bases only");
    // Columns are scaled to unit norm so the subset solves are well conditioned.
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    let rms = |x: &DVector<f64>| ((a * x - b).norm_squared() / b.len() as f64).sqrt();

    let mut best = DVector::zeros(cols);
    let mut best_rms = rms(&best);
    for mask in 1u32..(1 << cols) {
        let active: Vec<usize> = (0..cols).filter(|j| mask & (1 << j) != 0).collect();
        if active.len() > a.nrows() {
            continue;
        }
        let sub = DMatrix::from_fn(a.nrows(), active.len(), |i, k| a[(i, active[k])] / norms[active[k]]);
        let Ok(y) = sub.svd(true, true).solve(b, 1e-14) else { continue };
        if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
            continue;
        }
        let mut x = DVector::zeros(cols);
        for (k, &j) in active.iter().enumerate() {
            x[j] = y[k] / norms[j];
        }
        let r = rms(&x);
        if r < best_rms {
            best = x;
            best_rms = r;
        }
    }
    (best, best_rms)
}
