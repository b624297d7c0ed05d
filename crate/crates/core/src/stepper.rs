//! Semi-implicit second-order time stepping in Fourier space.
//!
//! The three-level scheme
//!
//! ```text
//! (u⁺ - 2u + u⁻)/δt² - Δ(u⁺ + 2u + u⁻)/4 + (u⁺ + 2u + u⁻)/4 = |u|² u
//! ```
//!
//! is diagonal in Fourier space. With `ρ = 1 + |k|²` and `N̂` the transform of
//! `|uⁿ|² uⁿ`, every mode updates independently:
//!
//! ```text
//! û⁺ = [ (2/δt²) û - (1/δt²) û⁻ - (ρ/4)(2û + û⁻) + N̂ ] / (1/δt² + ρ/4)
//! ```
//!
//! Each step costs exactly one forward and one inverse 3D transform.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{blowup_check, energy, EnergyReport};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::field::{cubic_term_on, RealField, SpectralField};
use crate::grid::{wrap_index, Grid};
use crate::team::split_mut_by_ranges;

/// Default blow-up threshold on `max |u|`.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e8;

const I: Complex64 = Complex64::new(0.0, 1.0);

type SampleFn = dyn Fn([f64; 3]) -> Complex64 + Send + Sync;

/// Spatial profile used for initial displacement or velocity.
#[derive(Clone)]
pub enum Profile {
    Zero,
    Constant(Complex64),
    /// `A exp(-Σ ((x_j - c_j)/w_j)²)`, centred in the box unless `center` is given.
    Gaussian {
        amplitude: Complex64,
        widths: [f64; 3],
        center: Option<[f64; 3]>,
    },
    /// `A exp(i k·x)` with `k_j = 2π m_j / L_j` for integer mode numbers `m`.
    PlaneWave { amplitude: Complex64, modes: [i64; 3] },
    /// `A sech(x_axis - c)`, constant in the other two directions.
    SechLine {
        amplitude: f64,
        axis: usize,
        center: Option<f64>,
    },
    Custom(Arc<SampleFn>),
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Constant(a) => write!(f, "Constant({a})"),
            Profile::Gaussian { amplitude, widths, center } => f
                .debug_struct("Gaussian")
                .field("amplitude", amplitude)
                .field("widths", widths)
                .field("center", center)
                .finish(),
            Profile::PlaneWave { amplitude, modes } => f
                .debug_struct("PlaneWave")
                .field("amplitude", amplitude)
                .field("modes", modes)
                .finish(),
            Profile::SechLine { amplitude, axis, center } => f
                .debug_struct("SechLine")
                .field("amplitude", amplitude)
                .field("axis", axis)
                .field("center", center)
                .finish(),
            Profile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn wavevector(grid: &Grid, modes: [i64; 3]) -> [f64; 3] {
    let l = grid.length();
    [0, 1, 2].map(|a| 2.0 * PI * modes[a] as f64 / l[a])
}

impl Profile {
    fn validate(&self, grid: &Grid) -> Result<()> {
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        match self {
            Profile::Zero | Profile::Custom(_) => Ok(()),
            Profile::Constant(a) if finite(a) => Ok(()),
            Profile::Gaussian { amplitude, widths, center }
                if finite(amplitude)
                    && widths.iter().all(|w| w.is_finite() && *w > 0.0)
                    && center.is_none_or(|c| c.iter().all(|v| v.is_finite())) =>
            {
                Ok(())
            }
            Profile::PlaneWave { amplitude, modes } if finite(amplitude) => {
                for a in 0..3 {
                    let half = (grid.n()[a] / 2) as i64;
                    if modes[a] <= -half || modes[a] >= half {
                        return Err(Error::InvalidParameter(format!(
                            "plane-wave mode {} on axis {a} is not resolved by {} points",
                            modes[a],
                            grid.n()[a]
                        )));
                    }
                }
                Ok(())
            }
            Profile::SechLine { amplitude, axis, center }
                if amplitude.is_finite() && *axis < 3 && center.is_none_or(f64::is_finite) =>
            {
                Ok(())
            }
            other => Err(Error::InvalidParameter(format!("invalid profile parameters {other:?}"))),
        }
    }

    /// Samples the profile on the grid points.
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<RealField> {
        self.validate(grid)?;
        let l = grid.length();
        Ok(match self {
            Profile::Zero => RealField::zeros(grid.clone()),
            Profile::Constant(a) => RealField::from_fn(grid.clone(), |_| *a),
            Profile::Gaussian { amplitude, widths, center } => {
                let c = center.unwrap_or([l[0] / 2.0, l[1] / 2.0, l[2] / 2.0]);
                RealField::from_fn(grid.clone(), |x| {
                    let r2: f64 = (0..3).map(|a| ((x[a] - c[a]) / widths[a]).powi(2)).sum();
                    amplitude * (-r2).exp()
                })
            }
            Profile::PlaneWave { amplitude, modes } => {
                let k = wavevector(grid, *modes);
                RealField::from_fn(grid.clone(), |x| {
                    amplitude * Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])
                })
            }
            Profile::SechLine { amplitude, axis, center } => {
                let c = center.unwrap_or(l[*axis] / 2.0);
                RealField::from_fn(grid.clone(), |x| {
                    Complex64::new(amplitude / (x[*axis] - c).cosh(), 0.0)
                })
            }
            Profile::Custom(f) => RealField::from_fn(grid.clone(), |x| f(x)),
        })
    }
}

/// Initial velocity specification.
#[derive(Debug, Clone)]
pub enum Velocity {
    Zero,
    Profile(Profile),
    /// `v⁰ = -iω u⁰`, the velocity of the exact solution `A e^{i(k·x - ωt)}`.
    /// Only valid for plane-wave or constant displacement.
    Travelling,
}

/// Initial data: displacement `u⁰` and velocity `v⁰`.
#[derive(Debug, Clone)]
pub struct InitialCondition {
    pub displacement: Profile,
    pub velocity: Velocity,
}

/// Closed-form solutions used for verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExactSolution {
    Zero,
    /// `A e^{i(k·x - ωt)}` with `ω² = 1 + |k|² - |A|²`; zero modes give the
    /// spatially constant oscillation.
    PlaneWave { amplitude: Complex64, modes: [i64; 3] },
}

impl ExactSolution {
    /// Angular frequency on `grid`; errors when `ω²` is not positive.
    pub fn omega(&self, grid: &Grid) -> Result<f64> {
        match self {
            ExactSolution::Zero => Ok(0.0),
            ExactSolution::PlaneWave { amplitude, modes } => {
                let k = wavevector(grid, *modes);
                let w2 = 1.0 + k.iter().map(|v| v * v).sum::<f64>() - amplitude.norm_sqr();
                if !(w2 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "plane wave with |A|² = {} and |k|² = {} has no real frequency",
                        amplitude.norm_sqr(),
                        w2 - 1.0 + amplitude.norm_sqr()
                    )));
                }
                Ok(w2.sqrt())
            }
        }
    }

    /// Samples the solution at time `t`.
    pub fn sample(&self, grid: &Arc<Grid>, t: f64) -> Result<RealField> {
        match self {
            ExactSolution::Zero => Ok(RealField::zeros(grid.clone())),
            ExactSolution::PlaneWave { amplitude, modes } => {
                let omega = self.omega(grid)?;
                Profile::PlaneWave { amplitude: *amplitude, modes: *modes }.validate(grid)?;
                let k = wavevector(grid, *modes);
                Ok(RealField::from_fn(grid.clone(), |x| {
                    amplitude
                        * Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2] - omega * t)
                }))
            }
        }
    }
}

impl InitialCondition {
    pub fn zero() -> Self {
        Self { displacement: Profile::Zero, velocity: Velocity::Zero }
    }

    /// Centred isotropic Gaussian at rest.
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            displacement: Profile::Gaussian {
                amplitude: Complex64::new(amplitude, 0.0),
                widths: [width; 3],
                center: None,
            },
            velocity: Velocity::Zero,
        }
    }

    /// Exact travelling wave `A e^{i(k·x - ωt)}`.
    pub fn plane_wave(amplitude: Complex64, modes: [i64; 3]) -> Self {
        Self {
            displacement: Profile::PlaneWave { amplitude, modes },
            velocity: Velocity::Travelling,
        }
    }

    /// Exact spatially constant oscillation `A e^{-iωt}`, `ω² = 1 - |A|²`.
    pub fn oscillating_constant(amplitude: Complex64) -> Self {
        Self::plane_wave(amplitude, [0; 3])
    }

    /// Static line soliton `√2 sech(x - x₀)` along `axis`.
    pub fn sech_line(axis: usize, center: Option<f64>) -> Self {
        Self {
            displacement: Profile::SechLine { amplitude: 2f64.sqrt(), axis, center },
            velocity: Velocity::Zero,
        }
    }

    /// The closed-form solution these data start, when one is known.
    pub fn exact_solution(&self) -> Option<ExactSolution> {
        match (&self.displacement, &self.velocity) {
            (Profile::Zero, Velocity::Zero) => Some(ExactSolution::Zero),
            (Profile::PlaneWave { amplitude, modes }, Velocity::Travelling) => {
                Some(ExactSolution::PlaneWave { amplitude: *amplitude, modes: *modes })
            }
            (Profile::Constant(a), Velocity::Travelling) => {
                Some(ExactSolution::PlaneWave { amplitude: *a, modes: [0; 3] })
            }
            _ => None,
        }
    }

    /// Samples `(u⁰, v⁰)` on the grid.
    pub fn sample(&self, grid: &Arc<Grid>) -> Result<(RealField, RealField)> {
        let u0 = self.displacement.sample(grid)?;
        let v0 = match &self.velocity {
            Velocity::Zero => RealField::zeros(grid.clone()),
            Velocity::Profile(p) => p.sample(grid)?,
            Velocity::Travelling => {
                let exact = self.exact_solution().ok_or_else(|| {
                    Error::InvalidParameter(
                        "travelling velocity needs a plane-wave or constant displacement".into(),
                    )
                })?;
                let omega = exact.omega(grid)?;
                u0.map(|z| -I * omega * z)
            }
        };
        Ok((u0, v0))
    }
}

/// Per-run switches of the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeOptions {
    /// Zero the top third of the nonlinear term's spectrum along each axis.
    pub dealias: bool,
    /// Blow-up is flagged when `max |u|` exceeds this.
    pub blowup_threshold: f64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { dealias: false, blowup_threshold: DEFAULT_BLOWUP_THRESHOLD }
    }
}

/// Whether index `m` survives the 2/3 rule on an axis of `n` points.
#[inline]
pub fn dealias_keeps(m: usize, n: usize) -> bool {
    3 * wrap_index(m, n).unsigned_abs() < n as u64
}

/// Two consecutive time levels plus everything needed to advance them.
#[derive(Debug, Clone)]
pub struct SolverState {
    grid: Arc<Grid>,
    uhat_prev: SpectralField,
    uhat_now: SpectralField,
    u_now: RealField,
    dt: f64,
    step_index: u64,
    options: SchemeOptions,
}

impl SolverState {
    /// Samples the initial data and builds the back level by a second-order Taylor start,
    /// `u⁻¹ = u⁰ - δt v⁰ + (δt²/2)(Δu⁰ - u⁰ + |u⁰|²u⁰)`.
    pub fn initialize(ic: &InitialCondition, dt: f64, plan: &mut FftPlan, options: SchemeOptions) -> Result<Self> {
        check_dt(dt)?;
        check_options(&options)?;
        let grid = plan.grid().clone();
        let (u0, v0) = ic.sample(&grid)?;
        if !u0.is_finite() || !v0.is_finite() {
            return Err(Error::NonFinite("initial data"));
        }
        let uhat0 = plan.forward(&u0)?;
        let vhat0 = plan.forward(&v0)?;
        let nhat0 = plan.forward(&cubic_term_on(&u0, plan.team()))?;
        let half_dt2 = 0.5 * dt * dt;
        let mut back = SpectralField::zeros(grid.clone());
        let [nx, ny, nz] = grid.n();
        for i in 0..nx {
            for j in 0..ny {
                for l in 0..nz {
                    let idx = grid.index(i, j, l);
                    let rho = 1.0 + grid.k_squared(i, j, l);
                    let u = uhat0.data()[idx];
                    back.data_mut()[idx] = u - dt * vhat0.data()[idx] + half_dt2 * (nhat0.data()[idx] - rho * u);
                }
            }
        }
        Ok(Self {
            grid,
            uhat_prev: back,
            uhat_now: uhat0,
            u_now: u0,
            dt,
            step_index: 0,
            options,
        })
    }

    /// Rebuilds a state from two stored spectral levels.
    pub fn from_levels(
        uhat_prev: SpectralField,
        uhat_now: SpectralField,
        dt: f64,
        step_index: u64,
        options: SchemeOptions,
        plan: &mut FftPlan,
    ) -> Result<Self> {
        check_dt(dt)?;
        check_options(&options)?;
        uhat_prev.check_grid(plan.grid())?;
        uhat_now.check_grid(plan.grid())?;
        let u_now = plan.inverse(&uhat_now)?;
        Ok(Self {
            grid: plan.grid().clone(),
            uhat_prev,
            uhat_now,
            u_now,
            dt,
            step_index,
            options,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn uhat_prev(&self) -> &SpectralField {
        &self.uhat_prev
    }

    pub fn uhat_now(&self) -> &SpectralField {
        &self.uhat_now
    }

    pub fn u_now(&self) -> &RealField {
        &self.u_now
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    pub fn options(&self) -> SchemeOptions {
        self.options
    }

    /// Advances one level. On blow-up the state still advances so the
    /// offending level can be inspected, and `Error::BlowUp` is returned.
    pub fn step(&mut self, plan: &mut FftPlan) -> Result<()> {
        self.u_now.check_grid(plan.grid())?;
        let grid = self.grid.clone();
        let [nx, ny, nz] = grid.n();

        // Nonlinear term in physical space, then forward transform.
        let mut nhat = cubic_term_on(&self.u_now, plan.team()).into_vec();
        plan.forward_in_place(&mut nhat)?;

        let inv_dt2 = 1.0 / (self.dt * self.dt);
        let dealias = self.options.dealias;
        let chunks = plan.x_chunks();
        let now = self.uhat_now.data();
        {
            // û⁺ overwrites û⁻ in place.
            let parts: Vec<_> = split_mut_by_ranges(self.uhat_prev.data_mut(), &chunks)
                .into_iter()
                .zip(&chunks)
                .collect();
            let nhat = &nhat;
            let grid = &grid;
            plan.team().scatter(parts, |_, (prev, range)| {
                for (off, slot) in prev.iter_mut().enumerate() {
                    let idx = range.start + off;
                    let [i, j, l] = grid.coords(idx);
                    let rho = 1.0 + grid.k_squared(i, j, l);
                    let n = if dealias && !(dealias_keeps(i, nx) && dealias_keeps(j, ny) && dealias_keeps(l, nz)) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        nhat[idx]
                    };
                    let u = now[idx];
                    let u_old = *slot;
                    let rhs = 2.0 * inv_dt2 * u - inv_dt2 * u_old - 0.25 * rho * (2.0 * u + u_old) + n;
                    *slot = rhs / (inv_dt2 + 0.25 * rho);
                }
            });
        }
        std::mem::swap(&mut self.uhat_prev, &mut self.uhat_now);

        let mut u = nhat;
        u.copy_from_slice(self.uhat_now.data());
        plan.inverse_in_place(&mut u)?;
        self.u_now = RealField::from_vec(grid, u)?;
        self.step_index += 1;

        if let Some(report) = blowup_check(&self.u_now, self.options.blowup_threshold) {
            return Err(Error::BlowUp { step: self.step_index, report });
        }
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive and finite")));
    }
    Ok(())
}

fn check_options(o: &SchemeOptions) -> Result<()> {
    if !(o.blowup_threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "blow-up threshold {} must be positive",
            o.blowup_threshold
        )));
    }
    Ok(())
}

/// Failure of [`run`], carrying the diagnostics recorded before it.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct RunError {
    #[source]
    pub error: Error,
    pub series: Vec<EnergyReport>,
}

/// Takes `steps` steps, recording energy at the start and then every
/// `diagnostics_every` steps (`0` disables diagnostics).
pub fn run(
    state: &mut SolverState,
    steps: u64,
    plan: &mut FftPlan,
    diagnostics_every: u64,
) -> std::result::Result<Vec<EnergyReport>, RunError> {
    let mut series = Vec::new();
    if steps == 0 {
        return Err(RunError {
            error: Error::InvalidParameter("run needs at least one step".into()),
            series,
        });
    }
    let mut reference = None;
    let mut record = |state: &SolverState, plan: &mut FftPlan, series: &mut Vec<EnergyReport>| -> Result<()> {
        let mut report = energy(&state.uhat_prev, &state.uhat_now, state.dt, plan)?;
        let total0 = *reference.get_or_insert(report.total);
        report = report.at(state.step_index, total0);
        series.push(report);
        Ok(())
    };
    let fail = |error, series| RunError { error, series };

    if diagnostics_every > 0 {
        if let Err(e) = record(state, plan, &mut series) {
            return Err(fail(e, series));
        }
    }
    for s in 1..=steps {
        if let Err(e) = state.step(plan) {
            return Err(fail(e, series));
        }
        if diagnostics_every > 0 && s % diagnostics_every == 0 {
            if let Err(e) = record(state, plan, &mut series) {
                return Err(fail(e, series));
            }
        }
    }
    Ok(series)
}
