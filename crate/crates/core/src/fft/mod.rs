//! Three-dimensional FFTs over a slab decomposition.
//!
//! A field in the natural `[x][y][z]` layout is split into x-slabs, one per
//! worker. A forward transform runs the y and z transforms slab-locally,
//! redistributes to z-slabs in `[z][y][x]` layout so that x lines become
//! contiguous, transforms along x, and redistributes back. The forward
//! transform is unnormalized; the inverse carries the full `1/(nx ny nz)`.

mod transpose;

use std::ops::Range;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::team::{balanced_ranges, split_mut_by_ranges, WorkerTeam};
use transpose::{exchange, Exchange};

/// The 1D transform library behind the plans.
pub const BACKEND: &str = "rustfft 6";

/// Axis along which a buffer is split across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabAxis {
    /// `[x][y][z]` layout, split along x.
    X,
    /// `[z][y][x]` layout, split along z.
    Z,
}

/// Wall-clock time spent in each phase, accumulated over transforms.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct PhaseTimings {
    pub transform: Duration,
    pub pack: Duration,
    pub exchange: Duration,
    pub unpack: Duration,
}

impl PhaseTimings {
    /// Total time spent redistributing data.
    pub fn transpose(&self) -> Duration {
        self.pack + self.exchange + self.unpack
    }
}

/// Number of 3D transforms performed by a plan.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct TransformCounts {
    pub forward: u64,
    pub inverse: u64,
}

impl TransformCounts {
    pub fn total(&self) -> u64 {
        self.forward + self.inverse
    }
}

struct WorkerScratch {
    plane: Vec<Complex64>,
    fft: Vec<Complex64>,
}

struct Line {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Line {
    fn get(&self, dir: FftDirection) -> &Arc<dyn Fft<f64>> {
        match dir {
            FftDirection::Forward => &self.forward,
            FftDirection::Inverse => &self.inverse,
        }
    }
}

/// Reusable plan: decomposition, 1D transforms, worker team and scratch.
///
/// Transforms take `&mut self`, so one plan never serves two transforms at once.
pub struct FftPlan {
    grid: Arc<Grid>,
    team: WorkerTeam,
    x_slabs: Vec<Range<usize>>,
    z_slabs: Vec<Range<usize>>,
    lines: [Line; 3],
    workers: Vec<WorkerScratch>,
    pencil: Vec<Complex64>,
    send: Vec<Complex64>,
    recv: Vec<Complex64>,
    timings: PhaseTimings,
    counts: TransformCounts,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan")
            .field("n", &self.grid.n())
            .field("workers", &self.team.size())
            .field("x_slabs", &self.x_slabs)
            .field("z_slabs", &self.z_slabs)
            .finish()
    }
}

impl FftPlan {
    /// Plans transforms on `grid` for `workers` workers, `1 <= workers <= min(nx, nz)`.
    pub fn new(grid: Arc<Grid>, workers: usize) -> Result<Self> {
        let [nx, ny, nz] = grid.n();
        let max = nx.min(nz);
        if workers == 0 || workers > max {
            return Err(Error::InvalidWorkers { workers, max });
        }
        let team = WorkerTeam::new(workers)?;
        let mut planner = FftPlanner::new();
        let lines = [nx, ny, nz].map(|n| Line {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        });
        let fft_scratch = lines
            .iter()
            .flat_map(|l| [l.forward.get_inplace_scratch_len(), l.inverse.get_inplace_scratch_len()])
            .max()
            .unwrap_or(0);
        let zero = Complex64::new(0.0, 0.0);
        let scratch = (0..workers)
            .map(|_| WorkerScratch {
                plane: vec![zero; ny * nz],
                fft: vec![zero; fft_scratch],
            })
            .collect();
        let len = grid.len();
        let buffers = if workers > 1 { len } else { 0 };
        Ok(Self {
            x_slabs: balanced_ranges(nx, workers),
            z_slabs: balanced_ranges(nz, workers),
            grid,
            team,
            lines,
            workers: scratch,
            pencil: vec![zero; len],
            send: vec![zero; buffers],
            recv: vec![zero; buffers],
            timings: PhaseTimings::default(),
            counts: TransformCounts::default(),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn workers(&self) -> usize {
        self.team.size()
    }

    pub fn team(&self) -> &WorkerTeam {
        &self.team
    }

    /// Ranges of x planes owned by each worker in the natural layout.
    pub fn x_slabs(&self) -> &[Range<usize>] {
        &self.x_slabs
    }

    /// Ranges of z planes owned by each worker in the transposed layout.
    pub fn z_slabs(&self) -> &[Range<usize>] {
        &self.z_slabs
    }

    /// Flat index ranges of each worker's x-slab in the natural layout.
    pub fn x_chunks(&self) -> Vec<Range<usize>> {
        let plane = self.grid.n()[1] * self.grid.n()[2];
        self.x_slabs.iter().map(|r| r.start * plane..r.end * plane).collect()
    }

    pub fn timings(&self) -> PhaseTimings {
        self.timings
    }

    pub fn reset_timings(&mut self) {
        self.timings = PhaseTimings::default();
    }

    pub fn counts(&self) -> TransformCounts {
        self.counts
    }

    /// Unnormalized forward transform.
    pub fn forward(&mut self, u: &RealField) -> Result<SpectralField> {
        u.check_grid(&self.grid)?;
        let mut data = u.data().to_vec();
        self.forward_in_place(&mut data)?;
        SpectralField::from_vec(self.grid.clone(), data)
    }

    /// Inverse transform scaled by `1/(nx ny nz)`.
    pub fn inverse(&mut self, uhat: &SpectralField) -> Result<RealField> {
        uhat.check_grid(&self.grid)?;
        let mut data = uhat.data().to_vec();
        self.inverse_in_place(&mut data)?;
        RealField::from_vec(self.grid.clone(), data)
    }

    /// Forward transform of a natural-layout buffer, in place.
    pub fn forward_in_place(&mut self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform(data, FftDirection::Forward);
        self.counts.forward += 1;
        Ok(())
    }

    pub fn inverse_in_place(&mut self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        self.transform(data, FftDirection::Inverse);
        let scale = 1.0 / self.grid.len() as f64;
        let t = Instant::now();
        let chunks = self.x_chunks();
        self.team.scatter(split_mut_by_ranges(data, &chunks), |_, chunk| {
            for z in chunk {
                *z *= scale;
            }
        });
        self.timings.transform += t.elapsed();
        self.counts.inverse += 1;
        Ok(())
    }

    /// Redistributes a buffer split along `from` into the other slab layout.
    pub fn transpose_exchange(&mut self, buffer: &[Complex64], from: SlabAxis) -> Result<Vec<Complex64>> {
        self.check_len(buffer.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); buffer.len()];
        let [nx, ny, nz] = self.grid.n();
        let shape = match from {
            SlabAxis::X => Exchange { na: nx, ny, nb: nz, src: &self.x_slabs, dst: &self.z_slabs },
            SlabAxis::Z => Exchange { na: nz, ny, nb: nx, src: &self.z_slabs, dst: &self.x_slabs },
        };
        let (mut send, mut recv) = (std::mem::take(&mut self.send), std::mem::take(&mut self.recv));
        let times = exchange(&self.team, shape, buffer, &mut out, &mut send, &mut recv);
        (self.send, self.recv) = (send, recv);
        self.record(times);
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::InvalidParameter(format!(
                "buffer holds {len} values, plan grid {:?} needs {}",
                self.grid.n(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    fn record(&mut self, t: transpose::ExchangeTimes) {
        self.timings.pack += t.pack;
        self.timings.exchange += t.exchange;
        self.timings.unpack += t.unpack;
    }

    fn transform(&mut self, data: &mut [Complex64], dir: FftDirection) {
        let [nx, ny, nz] = self.grid.n();
        let Self {
            team,
            x_slabs,
            z_slabs,
            lines,
            workers,
            pencil,
            send,
            recv,
            timings,
            ..
        } = self;

        // y and z lines are complete inside each x-slab.
        let t = Instant::now();
        {
            let plane_len = ny * nz;
            let chunks: Vec<_> = x_slabs.iter().map(|r| r.start * plane_len..r.end * plane_len).collect();
            let parts: Vec<_> = split_mut_by_ranges(data, &chunks)
                .into_iter()
                .zip(workers.iter_mut())
                .collect();
            let (fz, fy) = (lines[2].get(dir), lines[1].get(dir));
            team.scatter(parts, |_, (slab, scratch)| {
                for plane in slab.chunks_exact_mut(plane_len) {
                    fz.process_with_scratch(plane, &mut scratch.fft);
                    transpose::local_transpose(plane, &mut scratch.plane, ny, 1, nz);
                    fy.process_with_scratch(&mut scratch.plane, &mut scratch.fft);
                    transpose::local_transpose(&scratch.plane, plane, nz, 1, ny);
                }
            });
        }
        timings.transform += t.elapsed();

        let to_z = Exchange { na: nx, ny, nb: nz, src: x_slabs, dst: z_slabs };
        let times = exchange(team, to_z, data, pencil, send, recv);
        timings.pack += times.pack;
        timings.exchange += times.exchange;
        timings.unpack += times.unpack;

        // x lines are contiguous in the z-slab layout.
        let t = Instant::now();
        {
            let plane_len = ny * nx;
            let chunks: Vec<_> = z_slabs.iter().map(|r| r.start * plane_len..r.end * plane_len).collect();
            let parts: Vec<_> = split_mut_by_ranges(pencil, &chunks)
                .into_iter()
                .zip(workers.iter_mut())
                .collect();
            let fx = lines[0].get(dir);
            team.scatter(parts, |_, (slab, scratch)| {
                if !slab.is_empty() {
                    fx.process_with_scratch(slab, &mut scratch.fft);
                }
            });
        }
        timings.transform += t.elapsed();

        let to_x = Exchange { na: nz, ny, nb: nx, src: z_slabs, dst: x_slabs };
        let times = exchange(team, to_x, pencil, data, send, recv);
        timings.pack += times.pack;
        timings.exchange += times.exchange;
        timings.unpack += times.unpack;
    }
}
