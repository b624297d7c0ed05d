//! Physical- and Fourier-space fields on a shared [`Grid`].

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::reduce::{tree_sum, tree_sum_map};
use crate::team::WorkerTeam;

macro_rules! field_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            grid: Arc<Grid>,
            data: Vec<Complex64>,
        }

        impl $name {
            pub fn zeros(grid: Arc<Grid>) -> Self {
                let data = vec![Complex64::new(0.0, 0.0); grid.len()];
                Self { grid, data }
            }

            pub fn from_vec(grid: Arc<Grid>, data: Vec<Complex64>) -> Result<Self> {
                if data.len() != grid.len() {
                    return Err(Error::InvalidParameter(format!(
                        "field has {} values, grid {:?} needs {}",
                        data.len(),
                        grid.n(),
                        grid.len()
                    )));
                }
                Ok(Self { grid, data })
            }

            /// Samples `f(position)` at every grid point.
            pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 3]) -> Complex64) -> Self {
                let [nx, ny, nz] = grid.n();
                let mut data = Vec::with_capacity(grid.len());
                for i in 0..nx {
                    for j in 0..ny {
                        for l in 0..nz {
                            data.push(f(grid.position(i, j, l)));
                        }
                    }
                }
                Self { grid, data }
            }

            /// Fills the field from a function of the integer index `(i, j, l)`.
            pub fn from_index_fn(grid: Arc<Grid>, f: impl Fn(usize, usize, usize) -> Complex64) -> Self {
                let [nx, ny, nz] = grid.n();
                let mut data = Vec::with_capacity(grid.len());
                for i in 0..nx {
                    for j in 0..ny {
                        for l in 0..nz {
                            data.push(f(i, j, l));
                        }
                    }
                }
                Self { grid, data }
            }

            pub fn grid(&self) -> &Arc<Grid> {
                &self.grid
            }

            pub fn data(&self) -> &[Complex64] {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut [Complex64] {
                &mut self.data
            }

            pub fn into_vec(self) -> Vec<Complex64> {
                self.data
            }

            pub fn get(&self, i: usize, j: usize, l: usize) -> Complex64 {
                self.data[self.grid.index(i, j, l)]
            }

            pub fn set(&mut self, i: usize, j: usize, l: usize, v: Complex64) {
                let idx = self.grid.index(i, j, l);
                self.data[idx] = v;
            }

            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
            }

            /// Largest `|self - other|` over the grid.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.data
                    .iter()
                    .zip(&other.data)
                    .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
            }

            pub fn check_grid(&self, grid: &Grid) -> Result<()> {
                if self.grid.n() != grid.n() {
                    return Err(Error::ShapeMismatch {
                        expected: grid.n(),
                        found: self.grid.n(),
                    });
                }
                Ok(())
            }

            /// `a * self + b * other`, pointwise.
            pub fn axpby(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
                other.check_grid(&self.grid)?;
                let data = self
                    .data
                    .iter()
                    .zip(&other.data)
                    .map(|(x, y)| a * x + b * y)
                    .collect();
                Ok(Self { grid: self.grid.clone(), data })
            }

            pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
                Self {
                    grid: self.grid.clone(),
                    data: self.data.iter().map(|&z| f(z)).collect(),
                }
            }
        }
    };
}

field_type!(
    /// Complex samples of `u` at the grid points.
    RealField
);
field_type!(
    /// Fourier coefficients `û(k)`, stored in FFT index order.
    SpectralField
);

impl SpectralField {
    /// Largest violation of `û(-k) = conj(û(k))`, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let [nx, ny, nz] = self.grid.n();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                for l in 0..nz {
                    let a = self.get(i, j, l);
                    let b = self.get((nx - i) % nx, (ny - j) % ny, (nz - l) % nz);
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst / scale
    }
}

/// Pointwise `|u|² u`.
pub fn cubic_term(u: &RealField) -> RealField {
    cubic_term_on(u, &WorkerTeam::serial())
}

pub fn cubic_term_on(u: &RealField, team: &WorkerTeam) -> RealField {
    let mut out = u.clone();
    team.for_each_chunk_mut(out.data_mut(), |_, chunk| {
        for z in chunk {
            *z *= z.norm_sqr();
        }
    });
    out
}

/// `∫ f dx`, as a fixed-order sum times the cell volume.
pub fn integrate(f: &RealField) -> Complex64 {
    integrate_on(f, &WorkerTeam::serial())
}

pub fn integrate_on(f: &RealField, team: &WorkerTeam) -> Complex64 {
    tree_sum(f.data(), team) * f.grid().cell_volume()
}

/// `∫ density(u) dx` for a real-valued pointwise density of the samples.
pub fn integrate_density(
    values: &[Complex64],
    grid: &Grid,
    team: &WorkerTeam,
    density: impl Fn(Complex64) -> f64 + Sync + Send,
) -> f64 {
    tree_sum_map(values, team, density) * grid.cell_volume()
}
