//! FFT plumbing shared by the spectral steppers.
//!
//! 2d transforms are row FFTs, a transpose, row FFTs again and a transpose
//! back; fields are small enough that the extra copies do not matter.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::C64;

pub(crate) struct Spectral {
    n: usize,
    dim: usize,
    total: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    flip: Vec<C64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        let scratch = vec![C64::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        let flip = if grid.dim() == 2 { vec![C64::default(); grid.total()] } else { Vec::new() };
        Spectral { n: grid.n(), dim: grid.dim(), total: grid.total(), fwd, inv, scratch, flip }
    }

    /// In-place forward transform, normalized by 1/total so a uniform field
    /// of value `a` has `a` in its zero mode.
    pub fn forward(&mut self, field: &mut [C64]) {
        self.transform(field, true);
        let s = 1.0 / self.total as f64;
        for v in field.iter_mut() {
            *v *= s;
        }
    }

    /// In-place inverse transform (no normalization; pairs with `forward`).
    pub fn inverse(&mut self, field: &mut [C64]) {
        self.transform(field, false);
    }

    fn transform(&mut self, field: &mut [C64], forward: bool) {
        debug_assert_eq!(field.len(), self.total);
        let plan = if forward { &self.fwd } else { &self.inv };
        for row in field.chunks_exact_mut(self.n) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        if self.dim == 2 {
            transpose(field, &mut self.flip, self.n);
            for row in self.flip.chunks_exact_mut(self.n) {
                plan.process_with_scratch(row, &mut self.scratch);
            }
            transpose(&self.flip, field, self.n);
        }
    }
}

fn transpose(src: &[C64], dst: &mut [C64], n: usize) {
    for iy in 0..n {
        for ix in 0..n {
            dst[ix * n + iy] = src[iy * n + ix];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn max_err(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn forward_inverse_round_trips_1d() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let mut s = Spectral::new(&g);
        let orig: Vec<C64> =
            (0..64).map(|i| C64::new((i as f64).sin(), (3 * i) as f64 % 7.0)).collect();
        let mut f = orig.clone();
        s.forward(&mut f);
        s.inverse(&mut f);
        assert!(max_err(&f, &orig) < 1e-12);
    }

    #[test]
    fn plane_wave_lands_in_its_single_mode() {
        let g = Grid::new(1, 32, 4.0).unwrap();
        let mut s = Spectral::new(&g);
        let q = TAU * 3.0 / 4.0; // mode 3
        let mut f: Vec<C64> =
            g.x_axis().iter().map(|&x| C64::new(0.0, q * x).exp() * 2.5).collect();
        s.forward(&mut f);
        for (i, v) in f.iter().enumerate() {
            if i == 3 {
                assert!((v - C64::new(2.5, 0.0)).norm() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12, "leakage in mode {i}: {v}");
            }
        }
    }

    #[test]
    fn forward_inverse_round_trips_2d() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let mut s = Spectral::new(&g);
        let orig: Vec<C64> = (0..256)
            .map(|i| C64::new((0.3 * i as f64).cos(), (0.11 * i as f64).sin()))
            .collect();
        let mut f = orig.clone();
        s.forward(&mut f);
        s.inverse(&mut f);
        assert!(max_err(&f, &orig) < 1e-12);
    }

    #[test]
    fn separable_2d_wave_lands_in_one_mode() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let mut s = Spectral::new(&g);
        let (mx, my) = (2usize, 5usize);
        let xs = g.x_axis();
        let mut f = vec![C64::default(); 256];
        for iy in 0..16 {
            for ix in 0..16 {
                let ph = TAU * (mx as f64 * xs[ix] + my as f64 * xs[iy]) / 2.0;
                f[iy * 16 + ix] = C64::new(0.0, ph).exp();
            }
        }
        s.forward(&mut f);
        for iy in 0..16 {
            for ix in 0..16 {
                let v = f[iy * 16 + ix];
                if (ix, iy) == (mx, my) {
                    assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
                } else {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
    }
}
