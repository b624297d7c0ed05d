//! Binary snapshots of a solver state.
//!
//! Layout, all little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 8 | magic `KGCKPT01` |
//! | 4 | format version, `u32` |
//! | 24 | `nx, ny, nz`, `u64` each |
//! | 24 | `Lx, Ly, Lz`, `f64` each |
//! | 8 | `δt`, `f64` |
//! | 8 | step index, `u64` |
//! | 4 | flags, `u32` (bit 0: dealiasing) |
//! | 8 | blow-up threshold, `f64` |
//! | 16·N | `ûⁿ⁻¹`, `(re, im)` pairs of `f64` in row-major order |
//! | 16·N | `ûⁿ` |

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::stepper::{SchemeOptions, SolverState};

pub const MAGIC: &[u8; 8] = b"KGCKPT01";
pub const VERSION: u32 = 1;
/// Size of everything before the field data.
pub const HEADER_LEN: usize = 8 + 4 + 24 + 24 + 8 + 8 + 4 + 8;

const FLAG_DEALIAS: u32 = 1;

/// Decoded snapshot, not yet attached to an FFT plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub dt: f64,
    pub step_index: u64,
    pub options: SchemeOptions,
    pub uhat_prev: Vec<Complex64>,
    pub uhat_now: Vec<Complex64>,
}

impl Checkpoint {
    pub fn from_state(state: &SolverState) -> Self {
        Self {
            grid: (**state.grid()).clone(),
            dt: state.dt(),
            step_index: state.step_index(),
            options: state.options(),
            uhat_prev: state.uhat_prev().data().to_vec(),
            uhat_now: state.uhat_now().data().to_vec(),
        }
    }

    /// Rebuilds the solver state on `plan`, whose grid must match.
    pub fn into_state(self, plan: &mut FftPlan) -> Result<SolverState> {
        if !plan.grid().same_shape(&self.grid) {
            return Err(Error::ShapeMismatch { expected: plan.grid().n(), found: self.grid.n() });
        }
        let grid: Arc<Grid> = plan.grid().clone();
        let prev = SpectralField::from_vec(grid.clone(), self.uhat_prev)?;
        let now = SpectralField::from_vec(grid, self.uhat_now)?;
        SolverState::from_levels(prev, now, self.dt, self.step_index, self.options, plan)
    }
}

pub fn encode(state: &SolverState) -> Vec<u8> {
    encode_checkpoint(&Checkpoint::from_state(state))
}

pub fn encode_checkpoint(c: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 32 * c.uhat_now.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in c.grid.n() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for l in c.grid.length() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&c.dt.to_le_bytes());
    out.extend_from_slice(&c.step_index.to_le_bytes());
    let flags = if c.options.dealias { FLAG_DEALIAS } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&c.options.blowup_threshold.to_le_bytes());
    for z in c.uhat_prev.iter().chain(&c.uhat_now) {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        let end = self.at + K;
        let slice = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated while reading {what}")))?;
        self.at = end;
        Ok(slice.try_into().expect("slice length is K"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        self.take::<8>(what).map(u64::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }
}

/// Parses a snapshot. The declared grid size is checked against the input
/// length before any field storage is allocated.
pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut c = Cursor { bytes, at: 0 };
    if &c.take::<8>("magic")? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let version = c.u32("version")?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let mut n = [0usize; 3];
    for (axis, slot) in n.iter_mut().enumerate() {
        let v = c.u64("grid size")?;
        *slot = usize::try_from(v).map_err(|_| Error::Checkpoint(format!("grid size {v} on axis {axis} is too large")))?;
    }
    let mut length = [0.0; 3];
    for slot in &mut length {
        *slot = c.f64("box length")?;
    }
    let dt = c.f64("time step")?;
    let step_index = c.u64("step index")?;
    let flags = c.u32("flags")?;
    if flags & !FLAG_DEALIAS != 0 {
        return Err(Error::Checkpoint(format!("unknown flags {flags:#x}")));
    }
    let blowup_threshold = c.f64("blow-up threshold")?;

    let points = n
        .iter()
        .try_fold(1usize, |acc, &v| acc.checked_mul(v))
        .ok_or_else(|| Error::Checkpoint("grid size overflows".into()))?;
    let body = points
        .checked_mul(32)
        .ok_or_else(|| Error::Checkpoint("grid size overflows".into()))?;
    let remaining = bytes.len() - c.at;
    if remaining != body {
        return Err(Error::Checkpoint(format!(
            "field data is {remaining} bytes; grid {n:?} needs {body}"
        )));
    }
    let grid = Grid::new(n, length)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Checkpoint(format!("time step {dt} must be positive")));
    }
    if !(blowup_threshold > 0.0) {
        return Err(Error::Checkpoint(format!("blow-up threshold {blowup_threshold} must be positive")));
    }

    let data = &bytes[c.at..];
    let read = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let level = |offset: usize| -> Vec<Complex64> {
        (0..points).map(|i| Complex64::new(read(offset + 2 * i), read(offset + 2 * i + 1))).collect()
    };
    Ok(Checkpoint {
        grid,
        dt,
        step_index,
        options: SchemeOptions { dealias: flags & FLAG_DEALIAS != 0, blowup_threshold },
        uhat_prev: level(0),
        uhat_now: level(2 * points),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::InitialCondition;

    fn state(plan: &mut FftPlan) -> SolverState {
        let mut s = SolverState::initialize(&InitialCondition::gaussian(0.1, 1.0), 0.01, plan, SchemeOptions::default()).unwrap();
        s.step(plan).unwrap();
        s
    }

    #[test]
    fn round_trip_resumes_bitwise() {
        let mut plan = FftPlan::new(Arc::new(Grid::cube(8).unwrap()), 2).unwrap();
        let mut a = state(&mut plan);
        let bytes = encode(&a);
        assert_eq!(bytes.len(), HEADER_LEN + 32 * 512);
        let mut b = decode(&bytes).unwrap().into_state(&mut plan).unwrap();
        assert_eq!(b.step_index(), 1);
        for _ in 0..3 {
            a.step(&mut plan).unwrap();
            b.step(&mut plan).unwrap();
        }
        assert_eq!(a.u_now().data(), b.u_now().data());
    }

    #[test]
    fn rejects_corruption() {
        let mut plan = FftPlan::new(Arc::new(Grid::cube(4).unwrap()), 1).unwrap();
        let bytes = encode(&state(&mut plan));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut huge = bytes.clone();
        huge[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(&huge).is_err());
        let mut flags = bytes.clone();
        flags[HEADER_LEN - 12] = 0x80;
        assert!(decode(&flags).is_err());
    }

    #[test]
    fn grid_must_match_plan() {
        let mut small = FftPlan::new(Arc::new(Grid::cube(4).unwrap()), 1).unwrap();
        let bytes = encode(&state(&mut small));
        let mut other = FftPlan::new(Arc::new(Grid::cube(8).unwrap()), 1).unwrap();
        assert!(matches!(decode(&bytes).unwrap().into_state(&mut other), Err(Error::ShapeMismatch { .. })));
    }
}
