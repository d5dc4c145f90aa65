//! Scalar observables extracted from field snapshots, and fits on top of
//! their time series.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::Spectral;
use crate::C64;

/// Observables of one snapshot.
///
/// `mode_amplitudes` holds `(q, |phi_hat(q)|)` for each probed wavenumber,
/// with `q` already snapped to the grid lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    /// Time in whatever unit the producing solver evolves (dimensionless
    /// tau for the reduced equation, tau = gamma_c t when produced by the
    /// coupled system).
    pub tau: f64,
    /// Total particle number: mean density times domain volume.
    pub mass: f64,
    pub mean_density: f64,
    /// `(max|phi| - min|phi|) / (max|phi| + min|phi|)`, 0 for a zero field.
    pub modulation_contrast: f64,
    pub mode_amplitudes: Vec<(f64, f64)>,
}

/// Builds a record from a field and its already-transformed spectrum.
/// `probes` pairs each flattened spectral index with its snapped wavenumber.
pub(crate) fn record(
    tau: f64,
    phi: &[C64],
    volume: f64,
    probes: &[(usize, f64)],
    phi_hat: &[C64],
) -> DiagnosticsRecord {
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for v in phi {
        let a = v.norm();
        sum += a * a;
        lo = lo.min(a);
        hi = hi.max(a);
    }
    let mean_density = sum / phi.len() as f64;
    let modulation_contrast = if hi > 0.0 { (hi - lo) / (hi + lo) } else { 0.0 };
    DiagnosticsRecord {
        tau,
        mass: mean_density * volume,
        mean_density,
        modulation_contrast,
        mode_amplitudes: probes.iter().map(|&(i, q)| (q, phi_hat[i].norm())).collect(),
    }
}

/// Least-squares slope of `ln |phi_hat(q)|` against time over `window`,
/// an empirical growth rate to set against the dispersion relation.
///
/// `q` must match one of the probed (snapped) wavenumbers; the window must
/// lie inside the recorded span and contain at least 4 records with
/// nonzero amplitude.
pub fn measured_growth_rate(
    records: &[DiagnosticsRecord],
    q: f64,
    window: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = window;
    if records.is_empty() || !(lo < hi) {
        return Err(Error::WindowOutOfRange { lo, hi });
    }
    let span = (records[0].tau, records[records.len() - 1].tau);
    if lo < span.0 - 1e-12 || hi > span.1 + 1e-12 {
        return Err(Error::WindowOutOfRange { lo, hi });
    }
    let col = records[0]
        .mode_amplitudes
        .iter()
        .position(|&(qr, _)| (qr - q).abs() <= 1e-9 * q.abs().max(1.0))
        .ok_or(Error::UnknownMode(q))?;

    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for r in records {
        if r.tau < lo || r.tau > hi {
            continue;
        }
        let amp = r.mode_amplitudes[col].1;
        if amp <= 0.0 {
            return Err(Error::DegenerateFit("mode amplitude vanished inside the fit window"));
        }
        ts.push(r.tau);
        ys.push(amp.ln());
    }
    if ts.len() < 4 {
        return Err(Error::DegenerateFit("fewer than 4 records in the fit window"));
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in ts.iter().zip(&ys) {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (y - ym);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("zero time spread in the fit window"));
    }
    Ok(sxy / sxx)
}

/// Right-hand side of the particle-number balance of the reduced equation,
///
/// ```text
/// dN/dtau = 2 INT (eps |phi|^2 - |phi|^4) dV - 2 INT |grad phi|^2 dV
/// ```
///
/// with the gradient integral evaluated spectrally. Finite differences of
/// recorded masses should match this on smooth fields.
pub fn mass_balance_rhs(phi: &[C64], grid: &Grid, eps: f64) -> Result<f64> {
    if phi.len() != grid.total() {
        return Err(Error::InvalidGrid(format!(
            "field has {} entries for a grid of {}",
            phi.len(),
            grid.total()
        )));
    }
    let mut spec = Spectral::new(grid);
    let mut hat = phi.to_vec();
    spec.forward(&mut hat);
    let k2 = grid.k_squared();
    let grad2: f64 = hat.iter().zip(&k2).map(|(h, k2)| k2 * h.norm_sqr()).sum();
    let local: f64 = phi
        .iter()
        .map(|v| {
            let rho = v.norm_sqr();
            eps * rho - rho * rho
        })
        .sum::<f64>()
        / phi.len() as f64;
    Ok(2.0 * grid.volume() * (local - grad2))
}
