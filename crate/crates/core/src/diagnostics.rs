//! Energy, error and blow-up diagnostics.
//!
//! The energy
//!
//! ```text
//! E = ∫ ½|u_t|² + ½|u|² + ½|∇u|² - ¼|u|⁴ dx
//! ```
//!
//! is evaluated at the half level between two consecutive solver levels:
//! `u_t ≈ (uⁿ⁺¹ - uⁿ)/δt` and `u ≈ (uⁿ⁺¹ + uⁿ)/2`. Gradients use the spectral
//! `ik` multiplier with the Nyquist mode zeroed.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::field::{integrate_density, RealField, SpectralField};
use crate::instrument;
use crate::stepper::{ExactSolution, SolverState};

/// Guard against dividing by a zero reference energy.
pub const DRIFT_GUARD: f64 = 1e-300;

/// Column names of an energy CSV.
pub const ENERGY_CSV_HEADER: &str = "step,kinetic,mass,gradient,quartic,total,relative_drift";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub step_index: u64,
    /// `½∫|u_t|²`
    pub kinetic: f64,
    /// `½∫|u|²`
    pub mass: f64,
    /// `½∫|∇u|²`
    pub gradient: f64,
    /// `¼∫|u|⁴`
    pub quartic: f64,
    /// `kinetic + mass + gradient - quartic`
    pub total: f64,
    /// `|total - total₀| / max(|total₀|, guard)`
    pub relative_drift: f64,
}

impl EnergyReport {
    fn from_parts(kinetic: f64, mass: f64, gradient: f64, quartic: f64) -> Self {
        Self {
            step_index: 0,
            kinetic,
            mass,
            gradient,
            quartic,
            total: kinetic + mass + gradient - quartic,
            relative_drift: 0.0,
        }
    }

    /// Labels the report with its step and the reference total it drifts from.
    pub fn at(mut self, step_index: u64, reference_total: f64) -> Self {
        self.step_index = step_index;
        self.relative_drift = relative_change(self.total, reference_total);
        self
    }

    /// One CSV row, floats at 17 significant digits.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.step_index, self.kinetic, self.mass, self.gradient, self.quartic, self.total, self.relative_drift
        )
    }
}

fn relative_change(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(DRIFT_GUARD)
}

/// Energy between levels `uhat_a = ûⁿ` and `uhat_b = ûⁿ⁺¹`.
pub fn energy(uhat_a: &SpectralField, uhat_b: &SpectralField, dt: f64, plan: &mut FftPlan) -> Result<EnergyReport> {
    instrument::record_diagnostic();
    uhat_a.check_grid(plan.grid())?;
    uhat_b.check_grid(plan.grid())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
    }
    let grid = plan.grid().clone();
    let [nx, ny, nz] = grid.n();

    let mut half: Vec<Complex64> = uhat_a.data().iter().zip(uhat_b.data()).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut rate: Vec<Complex64> = uhat_a.data().iter().zip(uhat_b.data()).map(|(a, b)| (b - a) / dt).collect();

    let mut gradient = 0.0;
    for axis in 0..3 {
        let k = grid.k(axis);
        let mut d = half.clone();
        for (idx, z) in d.iter_mut().enumerate() {
            let [i, j, l] = grid.coords(idx);
            let m = [i, j, l][axis];
            *z = if grid.is_nyquist(axis, m) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k[m]) * *z };
        }
        plan.inverse_in_place(&mut d)?;
        gradient += 0.5 * integrate_density(&d, &grid, plan.team(), |z| z.norm_sqr());
    }
    debug_assert_eq!(half.len(), nx * ny * nz);

    plan.inverse_in_place(&mut half)?;
    plan.inverse_in_place(&mut rate)?;
    if !half.iter().chain(&rate).all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("energy levels"));
    }
    let kinetic = 0.5 * integrate_density(&rate, &grid, plan.team(), |z| z.norm_sqr());
    let mass = 0.5 * integrate_density(&half, &grid, plan.team(), |z| z.norm_sqr());
    let quartic = 0.25 * integrate_density(&half, &grid, plan.team(), |z| z.norm_sqr() * z.norm_sqr());
    if !gradient.is_finite() {
        return Err(Error::NonFinite("energy gradient"));
    }
    let report = EnergyReport::from_parts(kinetic, mass, gradient, quartic);
    debug_assert!(report.kinetic >= 0.0 && report.mass >= 0.0 && report.gradient >= 0.0 && report.quartic >= 0.0);
    Ok(report)
}

/// Largest relative deviation of any total from the first one.
pub fn drift_series(reports: &[EnergyReport]) -> Result<f64> {
    let first = reports.first().ok_or(Error::Empty("energy series"))?;
    Ok(reports.iter().map(|r| relative_change(r.total, first.total)).fold(0.0, f64::max))
}

/// Max-abs and root-mean-square error norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2: f64,
}

/// Compares the current level with `exact` at `t = step_index · δt`.
pub fn error_vs_exact(state: &SolverState, exact: &ExactSolution) -> Result<ErrorNorms> {
    let reference = exact.sample(state.grid(), state.time())?;
    field_error(state.u_now(), &reference)
}

/// Error norms of `u` against `reference` on the same grid.
pub fn field_error(u: &RealField, reference: &RealField) -> Result<ErrorNorms> {
    reference.check_grid(u.grid())?;
    if !u.is_finite() {
        return Err(Error::NonFinite("solution"));
    }
    let grid = u.grid();
    let diff: Vec<Complex64> = u.data().iter().zip(reference.data()).map(|(a, b)| a - b).collect();
    let linf = diff.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let serial = crate::team::WorkerTeam::serial();
    let l2 = (integrate_density(&diff, grid, &serial, |z| z.norm_sqr()) / grid.volume()).sqrt();
    Ok(ErrorNorms { linf, l2 })
}

/// Where and how large `|u|` got when blow-up was flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpReport {
    pub max_abs: f64,
    /// Grid index `(i, j, l)` of the largest (or first non-finite) value.
    pub location: [usize; 3],
    pub non_finite: bool,
}

impl fmt::Display for BlowUpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.non_finite {
            write!(f, "non-finite value at {:?}", self.location)
        } else {
            write!(f, "max |u| = {:e} at {:?}", self.max_abs, self.location)
        }
    }
}

/// Flags `u` when `max |u|` exceeds `threshold` or any entry is not finite.
pub fn blowup_check(u: &RealField, threshold: f64) -> Option<BlowUpReport> {
    let grid = u.grid();
    let mut max_abs = 0.0;
    let mut at = 0;
    for (idx, z) in u.data().iter().enumerate() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Some(BlowUpReport { max_abs: f64::INFINITY, location: grid.coords(idx), non_finite: true });
        }
        let a = z.norm();
        if a > max_abs {
            max_abs = a;
            at = idx;
        }
    }
    (max_abs > threshold).then(|| BlowUpReport { max_abs, location: grid.coords(at), non_finite: false })
}
