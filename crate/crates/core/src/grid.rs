//! The discrete periodic box.
//!
//! Arrays on a [`Grid`] are stored contiguously with the last axis fastest,
//! so point `(i, j, l)` lives at offset `(i * ny + j) * nz + l`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted number of points along an axis.
pub const MIN_POINTS: usize = 4;

/// Periodic box with `n[j]` points and edge length `length[j]` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    length: [f64; 3],
    spacing: [f64; 3],
    k: [Vec<f64>; 3],
}

/// Plain description of a grid, used in output metadata and checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub length: [f64; 3],
}

/// Maps FFT index `m` in `[0, n)` to its signed frequency in `[-n/2, n/2)`.
pub fn wrap_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

impl Grid {
    /// Builds a grid, rejecting odd or tiny sizes and non-positive lengths.
    pub fn new(n: [usize; 3], length: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            if n[axis] < MIN_POINTS || !n[axis].is_multiple_of(2) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has {} points; sizes must be even and at least {MIN_POINTS}",
                    n[axis]
                )));
            }
            if !(length[axis].is_finite() && length[axis] > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has length {}; lengths must be positive and finite",
                    length[axis]
                )));
            }
        }
        let spacing = [0, 1, 2].map(|a| length[a] / n[a] as f64);
        let k = [0, 1, 2].map(|a| {
            (0..n[a])
                .map(|m| 2.0 * PI * wrap_index(m, n[a]) as f64 / length[a])
                .collect()
        });
        Ok(Self {
            n,
            length,
            spacing,
            k,
        })
    }

    /// Cubic grid of `n` points per axis on the `[0, 2π)³` box.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new([n; 3], [2.0 * PI; 3])
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.n, spec.length)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            length: self.length,
        }
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn length(&self) -> [f64; 3] {
        self.length
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Angular wavenumbers along `axis`, in FFT order.
    pub fn k(&self, axis: usize) -> &[f64] {
        &self.k[axis]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn volume(&self) -> f64 {
        self.length[0] * self.length[1] * self.length[2]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + l
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let l = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], l]
    }

    /// Physical position of point `(i, j, l)`; the box origin is at zero.
    #[inline]
    pub fn position(&self, i: usize, j: usize, l: usize) -> [f64; 3] {
        [
            i as f64 * self.spacing[0],
            j as f64 * self.spacing[1],
            l as f64 * self.spacing[2],
        ]
    }

    /// `|k|²` of mode `(i, j, l)`, Nyquist frequencies included at full magnitude.
    #[inline]
    pub fn k_squared(&self, i: usize, j: usize, l: usize) -> f64 {
        let (kx, ky, kz) = (self.k[0][i], self.k[1][j], self.k[2][l]);
        kx * kx + ky * ky + kz * kz
    }

    /// Whether index `m` along `axis` is the unpaired Nyquist frequency.
    #[inline]
    pub fn is_nyquist(&self, axis: usize, m: usize) -> bool {
        m == self.n[axis] / 2
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.n == other.n && self.length == other.length
    }
}

/// Fourier symbol of the Laplacian, `-|k|²`, for every mode of `grid`.
pub fn laplacian_multiplier(grid: &Grid) -> Vec<f64> {
    let [nx, ny, nz] = grid.n();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..nx {
        for j in 0..ny {
            for l in 0..nz {
                out.push(-grid.k_squared(i, j, l));
            }
        }
    }
    out
}
