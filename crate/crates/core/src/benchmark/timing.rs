//! Wall-clock measurement of the fixed solver workload.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::records::ScalingRecord;
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::grid::Grid;
use crate::instrument;
use crate::stepper::{run, InitialCondition, SchemeOptions, SolverState};

#[derive(Debug, Clone)]
pub struct WorkloadConfig {
    pub grid: Arc<Grid>,
    pub steps: u64,
    pub repeats: u32,
    pub dt: f64,
    pub initial: InitialCondition,
    pub options: SchemeOptions,
    pub machine: String,
}

impl WorkloadConfig {
    /// 30 steps of `δt = 0.01` from a small Gaussian, best of 3.
    pub fn new(grid: Arc<Grid>) -> Self {
        Self {
            grid,
            steps: 30,
            repeats: 3,
            dt: 0.01,
            initial: InitialCondition::gaussian(0.1, 1.0),
            options: SchemeOptions::default(),
            machine: "local".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("workload needs at least one step".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("workload needs at least one repeat".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step {} must be positive", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// `cores` is the worker count, `time_seconds` the best repeat.
    pub record: ScalingRecord,
    pub steps: u64,
    pub n: [usize; 3],
    /// Local FFT time within the best repeat.
    pub transform_seconds: f64,
    /// Pack, exchange and unpack time within the best repeat.
    pub transpose_seconds: f64,
    pub repeats: u32,
    /// Every repeat, in order.
    pub times: Vec<f64>,
}

/// Times `cfg` on `workers` workers. Plan construction happens before the
/// clock starts; the timed region covers initialisation and the steps, with no
/// diagnostics and no I/O.
pub fn time_workload(cfg: &WorkloadConfig, workers: usize) -> Result<Measurement> {
    cfg.validate()?;
    let mut plan = FftPlan::new(cfg.grid.clone(), workers)?;
    let mut times = Vec::with_capacity(cfg.repeats as usize);
    let mut best: Option<(Duration, Duration, Duration)> = None;
    for _ in 0..cfg.repeats {
        plan.reset_timings();
        let before = instrument::snapshot();
        let start = Instant::now();
        let mut state = SolverState::initialize(&cfg.initial, cfg.dt, &mut plan, cfg.options)?;
        run(&mut state, cfg.steps, &mut plan, 0).map_err(|e| e.error)?;
        let elapsed = start.elapsed();
        let after = instrument::snapshot();
        assert_eq!(before, after, "timed region performed I/O or diagnostics");
        times.push(elapsed.as_secs_f64());
        let t = plan.timings();
        if best.is_none_or(|(b, _, _)| elapsed < b) {
            best = Some((elapsed, t.transform, t.transpose()));
        }
    }
    let (elapsed, transform, transpose) = best.expect("at least one repeat");
    Ok(Measurement {
        record: ScalingRecord::new(cfg.machine.clone(), workers as u64, elapsed.as_secs_f64())?,
        steps: cfg.steps,
        n: cfg.grid.n(),
        transform_seconds: transform.as_secs_f64(),
        transpose_seconds: transpose.as_secs_f64(),
        repeats: cfg.repeats,
        times,
    })
}

#[derive(Debug)]
pub struct SweepReport {
    pub measurements: Vec<Measurement>,
    /// Worker counts that could not run, with the reason.
    pub failures: Vec<(usize, Error)>,
}

/// Times the workload for each worker count in `counts`, which must be
/// non-empty and strictly increasing. Counts the grid cannot support are
/// reported in `failures` and the sweep continues.
pub fn sweep(cfg: &WorkloadConfig, counts: &[usize]) -> Result<SweepReport> {
    if counts.is_empty() {
        return Err(Error::Empty("worker counts"));
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("worker counts must be strictly increasing".into()));
    }
    cfg.validate()?;
    let mut measurements = Vec::new();
    let mut failures = Vec::new();
    for &p in counts {
        match time_workload(cfg, p) {
            Ok(m) => measurements.push(m),
            Err(e @ Error::InvalidWorkers { .. }) => failures.push((p, e)),
            Err(e) => return Err(e),
        }
    }
    Ok(SweepReport { measurements, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WorkloadConfig {
        let mut cfg = WorkloadConfig::new(Arc::new(Grid::cube(8).unwrap()));
        cfg.steps = 3;
        cfg.repeats = 2;
        cfg
    }

    #[test]
    fn measurement_fields() {
        let m = time_workload(&small(), 2).unwrap();
        assert_eq!(m.record.cores, 2);
        assert_eq!(m.times.len(), 2);
        assert_eq!(m.record.time_seconds, m.times.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(m.n, [8, 8, 8]);
        assert!(m.transform_seconds > 0.0);
        assert!(m.transform_seconds + m.transpose_seconds <= m.record.time_seconds);
    }

    #[test]
    fn sweep_reports_unsupported_counts() {
        let r = sweep(&small(), &[1, 2, 16]).unwrap();
        assert_eq!(r.measurements.len(), 2);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].0, 16);
    }

    #[test]
    fn sweep_rejects_bad_lists() {
        assert!(sweep(&small(), &[]).is_err());
        assert!(sweep(&small(), &[2, 1]).is_err());
        assert!(sweep(&small(), &[2, 2]).is_err());
        let mut cfg = small();
        cfg.repeats = 0;
        assert!(time_workload(&cfg, 1).is_err());
    }
}
