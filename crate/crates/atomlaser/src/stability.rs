//! Plane-wave stability of the reduced equation.
//!
//! The homogeneous lasing state `|phi|^2 = eps` is modulationally stable
//! exactly when `1 + c1 c2 > 0` (the Benjamin-Feir criterion, sideband
//! form). The full dispersion relation behind it comes from linearizing
//! about the lasing state with a Bogoliubov pair `(u, v*) ~ exp(i q x)`,
//! which closes into a 2x2 complex eigenproblem per wavenumber.

use crate::error::{Error, Result};
use crate::params::{reduce, PhysicalParams};
use crate::C64;

/// One sample of the dispersion relation: dominant perturbation growth
/// rate `lambda_max` at sideband wavenumber `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub q: f64,
    pub lambda_max: f64,
}

/// Samples the dispersion relation on `points` evenly spaced wavenumbers
/// over `[0, q_max]`.
pub fn dispersion_scan(
    eps: f64,
    c1: f64,
    c2: f64,
    q_max: f64,
    points: usize,
) -> Result<Vec<DispersionPoint>> {
    if points < 2 || !(q_max > 0.0) {
        return Err(Error::RangeSpec(format!("dispersion scan q_max={q_max}, points={points}")));
    }
    (0..points)
        .map(|i| {
            let q = q_max * i as f64 / (points - 1) as f64;
            Ok(DispersionPoint { q, lambda_max: max_growth_rate(eps, c1, c2, q)? })
        })
        .collect()
}

/// Outcome of the sideband criterion at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub c1: f64,
    pub c2: f64,
    /// `1 + c1 c2`; positive means stable.
    pub margin: f64,
    /// `margin > 0`. The marginal case `margin == 0` counts as not stable.
    pub stable: bool,
}

/// Benjamin-Feir verdict for gradient coefficient `c1` and nonlinear
/// coefficient `c2`.
pub fn benjamin_feir(c1: f64, c2: f64) -> Result<StabilityVerdict> {
    if !c1.is_finite() || !c2.is_finite() {
        return Err(Error::NonFinite("benjamin_feir(c1, c2)".into()));
    }
    let margin = 1.0 + c1 * c2;
    Ok(StabilityVerdict { c1, c2, margin, stable: margin > 0.0 })
}

/// Linearization of the reduced equation about `phi = sqrt(eps)` at
/// sideband wavenumber `q`, acting on the perturbation pair `(u, v)`.
pub fn dispersion_matrix(eps: f64, c1: f64, c2: f64, q: f64) -> Result<[[C64; 2]; 2]> {
    if !(eps.is_finite() && c1.is_finite() && c2.is_finite() && q.is_finite()) {
        return Err(Error::NonFinite("dispersion_matrix input".into()));
    }
    if eps <= 0.0 {
        return Err(Error::NoLasingState { epsilon: eps });
    }
    let q2 = q * q;
    let a = C64::new(1.0, c1) * q2; // gradient damping of the sideband
    let b = C64::new(eps, eps * c2); // nonlinear coupling at the lasing amplitude
    Ok([[-b - a, -b], [-b.conj(), -b.conj() - a.conj()]])
}

/// Largest real part among the two dispersion eigenvalues at wavenumber `q`.
/// Positive means the sideband grows.
pub fn max_growth_rate(eps: f64, c1: f64, c2: f64, q: f64) -> Result<f64> {
    let m = dispersion_matrix(eps, c1, c2, q)?;
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // closed-form 2x2 eigensolve
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    Ok(l1.re.max(l2.re))
}

/// Fastest-growing sideband `(q_star, rate)` of the lasing state, or
/// `(0, 0)` when every sideband decays.
///
/// Scans `(0, 3 sqrt(eps)]`, which covers the unstable band for any
/// `|c2| <~ 4.5 (1 + c1^2) / c1`, then refines the best bracket by
/// golden-section search down to `|dq| < 1e-6`. Use
/// [`most_unstable_mode_scan`] to widen the scan for more extreme
/// coefficients.
pub fn most_unstable_mode(eps: f64, c1: f64, c2: f64) -> Result<(f64, f64)> {
    most_unstable_mode_scan(eps, c1, c2, 3.0 * eps.sqrt(), 240)
}

/// [`most_unstable_mode`] with an explicit scan window `(0, q_max]` and
/// coarse-scan resolution.
pub fn most_unstable_mode_scan(
    eps: f64,
    c1: f64,
    c2: f64,
    q_max: f64,
    scan_points: usize,
) -> Result<(f64, f64)> {
    if scan_points < 200 || !(q_max > 0.0) {
        return Err(Error::RangeSpec(format!(
            "mode scan needs q_max > 0 and at least 200 points, got q_max={q_max}, points={scan_points}"
        )));
    }
    let rate = |q: f64| max_growth_rate(eps, c1, c2, q);
    // validate inputs once; the scan reuses the checked closure
    rate(0.0)?;

    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    let qs: Vec<f64> =
        (1..=scan_points).map(|i| q_max * i as f64 / scan_points as f64).collect();
    for (i, &q) in qs.iter().enumerate() {
        let r = rate(q)?;
        if r > best {
            best = r;
            best_i = i;
        }
    }
    if best <= 0.0 {
        return Ok((0.0, 0.0));
    }

    // golden-section refinement on the bracket around the best sample
    let mut lo = if best_i == 0 { 0.0 } else { qs[best_i - 1] };
    let mut hi = if best_i + 1 < qs.len() { qs[best_i + 1] } else { q_max };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = rate(a)?;
    let mut fb = rate(b)?;
    while hi - lo > 1e-6 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = rate(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = rate(a)?;
        }
    }
    let q_star = 0.5 * (lo + hi);
    Ok((q_star, rate(q_star)?))
}

/// Rabi coupling where the Benjamin-Feir margin crosses zero, found by
/// bisection to `|dOmega| < 1e-4` without using the closed-form inverse
/// (that lives in [`rabi_threshold_closed_form`] as an independent check).
///
/// Requires the margin at `Omega = 0` to be negative; since `c2` increases
/// affinely with `Omega` and `c1 > 0`, the margin then crosses zero exactly
/// once.
pub fn rabi_threshold(p: &PhysicalParams) -> Result<f64> {
    const TOL: f64 = 1e-4; // s^-1

    let margin_at = |omega: f64| -> Result<f64> {
        let mut q = *p;
        q.Omega = omega;
        let rp = reduce(&q)?;
        Ok(benjamin_feir(rp.c1, rp.c2)?.margin)
    };

    let m0 = margin_at(0.0)?;
    if m0 >= 0.0 {
        return Err(Error::NoCrossing { margin0: m0 });
    }
    // margin is increasing in Omega, so double until it flips
    let mut hi = 0.1;
    while margin_at(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::NoCrossing { margin0: m0 });
        }
    }
    let mut lo = 0.0;
    while hi - lo > TOL {
        let mid = 0.5 * (lo + hi);
        if margin_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form Rabi threshold: `c2(Omega*) = -1/c1` inverted through the
/// affine map `c2(Omega)`. Pair with [`rabi_threshold`] to cross-check the
/// two routes.
pub fn rabi_threshold_closed_form(p: &PhysicalParams) -> Result<f64> {
    let mut q = *p;
    q.Omega = 0.0;
    let rp = reduce(&q)?;
    let m0 = benjamin_feir(rp.c1, rp.c2)?.margin;
    if m0 >= 0.0 {
        return Err(Error::NoCrossing { margin0: m0 });
    }
    let gu2 = p.gamma_u * p.gamma_u;
    Ok(((-1.0 / rp.c1) * p.R * p.Gamma * p.Gamma / (2.0 * gu2) - p.g_over_hbar) / p.V)
}
