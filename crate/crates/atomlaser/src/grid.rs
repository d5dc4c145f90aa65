//! Periodic simulation grid and its Fourier lattice.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Uniform periodic grid, 1d or 2d, `n` points per axis.
///
/// `length` is the domain size per axis as a plain number; the dimensionless
/// solver reads it in units of the healing length `l0`, the coupled solver
/// in meters. Fields are stored row-major with x fastest, so a 2d sample
/// sits at `iy * n + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    /// `dim` must be 1 or 2, `n` a power of two of at least 8, `length > 0`.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length:e}")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing per axis.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Total number of samples, `n^dim`.
    pub fn total(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Domain volume, `length^dim`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Sample positions along one axis, `x_i = i * dx` on `[0, length)`.
    pub fn x_axis(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|i| i as f64 * dx).collect()
    }

    /// Wavenumbers along one axis in FFT storage order:
    /// `k_j = 2 pi j / length` with `j` running over `[-n/2, n/2)`.
    pub fn wavenumber_axis(&self) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|i| {
                let j = if i < n / 2 { i } else { i - n };
                TAU * j as f64 / self.length
            })
            .collect()
    }

    /// `|k|^2` on the full lattice, same layout as the field.
    pub fn k_squared(&self) -> Vec<f64> {
        let axis = self.wavenumber_axis();
        match self.dim {
            1 => axis.iter().map(|k| k * k).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.total());
                for ky in &axis {
                    for kx in &axis {
                        out.push(kx * kx + ky * ky);
                    }
                }
                out
            }
        }
    }

    /// Nearest lattice mode along x for a requested wavenumber `q >= 0`:
    /// returns `(mode_index, q_snapped)`. Errors past the largest positive
    /// mode `2 pi (n/2 - 1) / length`.
    pub fn snap_wavenumber(&self, q: f64) -> Result<(usize, f64)> {
        if !q.is_finite() {
            return Err(Error::NonFinite("wavenumber".into()));
        }
        let dq = TAU / self.length;
        let max_m = self.n / 2 - 1;
        let m = (q.abs() / dq).round();
        if m > max_m as f64 {
            return Err(Error::OutsideLattice { q, max: max_m as f64 * dq });
        }
        let m = m as usize;
        Ok((m, m as f64 * dq))
    }
}
