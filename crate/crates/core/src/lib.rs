//! Fourier pseudospectral solver for the focusing cubic Klein-Gordon equation
//!
//! ```text
//! u_tt - Δu + u = |u|² u
//! ```
//!
//! on a triply periodic box, together with the machinery used to benchmark it:
//! a slab-decomposed 3D FFT with an explicit all-to-all transpose, energy
//! diagnostics, strong-scaling timing, and a latency/bandwidth runtime model.

pub mod benchmark;
pub mod checkpoint;
pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod instrument;
pub mod reduce;
pub mod stepper;
pub mod team;

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use fft::{FftPlan, PhaseTimings, SlabAxis, TransformCounts};
pub use field::{cubic_term, integrate, RealField, SpectralField};
pub use grid::{laplacian_multiplier, Grid, GridSpec};
pub use team::WorkerTeam;
pub use stepper::{run, ExactSolution, InitialCondition, Profile, SchemeOptions, SolverState, Velocity};
pub use diagnostics::{drift_series, energy, error_vs_exact, blowup_check, EnergyReport};
