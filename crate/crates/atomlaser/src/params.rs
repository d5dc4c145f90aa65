//! Physical parameters and their reduction to Ginzburg-Landau coefficients.
//!
//! The reduction assumes the thermal cloud relaxes much faster than the
//! condensate (`gamma_u >> gamma_c`) and measures space in units of the
//! healing length `l0`, time in units of `1/gamma_c`, and density in units
//! of `2 gamma_u^2 gamma_c / (R Gamma^2)`.

use crate::constants::HBAR;
use crate::error::{Error, Result};

/// SI parameters of the pumped single-mode atom laser.
///
/// Field names follow the usual notation: capital letters are the pump,
/// gain and interaction strengths, lowercase the rates.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Thermal-cloud relaxation rate, s^-1.
    pub gamma_u: f64,
    /// Condensate loss rate, s^-1.
    pub gamma_c: f64,
    /// Local gain coefficient, m^3 s^-1.
    pub Gamma: f64,
    /// Pump rate density, m^-3 s^-1.
    pub R: f64,
    /// Thermal-cloud diffusion coefficient, m^2 s^-1.
    pub D_r: f64,
    /// Contact interaction over hbar, m^3 s^-1. Negative for attractive species.
    pub g_over_hbar: f64,
    /// Rabi-coupling rate of the infrared dressing field, s^-1.
    pub Omega: f64,
    /// Dressing-interaction volume, m^3.
    pub V: f64,
    /// Atomic mass, kg.
    pub mass: f64,
}

/// Dimensionless coefficients of the reduced equation, plus the scales
/// that undo the reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    /// Linear gain; positive above the lasing threshold.
    pub epsilon: f64,
    /// Dispersive-to-diffusive ratio of the gradient term.
    pub c1: f64,
    /// Dispersive-to-dissipative ratio of the nonlinear term.
    pub c2: f64,
    /// Healing length, m. One grid unit of the dimensionless solver.
    pub l0: f64,
    /// Time unit 1/gamma_c, s.
    pub t0: f64,
    /// Dimensionless density per SI density, m^3:
    /// |phi_dimless|^2 = amp2_scale * |phi_SI|^2.
    pub amp2_scale: f64,
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 2] = ["rb87", "li7"];

/// Built-in reference parameter sets.
///
/// `rb87` is a repulsive 87Rb laser, `li7` an attractive 7Li one that is
/// modulationally unstable at `Omega = 0`. Both have `Omega = 0`; the Rabi
/// coupling is the knob the caller turns.
pub fn preset(name: &str) -> Result<PhysicalParams> {
    match name {
        "rb87" => Ok(PhysicalParams {
            gamma_u: 1500.0,
            gamma_c: 50.0,
            Gamma: 7.02e-16,
            R: 2.13e20,
            D_r: 2e-8,
            g_over_hbar: 4.8e-17,
            Omega: 0.0,
            V: 2.5e-16,
            mass: crate::constants::MASS_RB87,
        }),
        "li7" => Ok(PhysicalParams {
            gamma_u: 87.0,
            gamma_c: 50.0,
            Gamma: 5.4e-17,
            R: 1.61e20,
            D_r: 2e-8,
            g_over_hbar: -1.61e-16,
            Omega: 0.0,
            V: 2.5e-16,
            mass: crate::constants::MASS_LI7,
        }),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

impl PhysicalParams {
    /// Checks the invariants the reduction needs: strictly positive rates,
    /// gain, pump, diffusion, volume and mass, finite everything,
    /// `Omega >= 0`. `g_over_hbar` may have either sign.
    pub fn validate(&self) -> Result<()> {
        self.validate_finite()?;
        for (name, v) in [
            ("gamma_u", self.gamma_u),
            ("gamma_c", self.gamma_c),
            ("Gamma", self.Gamma),
            ("R", self.R),
            ("D_r", self.D_r),
            ("V", self.V),
            ("mass", self.mass),
        ] {
            if v <= 0.0 {
                return Err(Error::DegenerateParameter(format!("{name} = {v:e} must be > 0")));
            }
        }
        if self.Omega < 0.0 {
            return Err(Error::DegenerateParameter(format!(
                "Omega = {:e} must be >= 0",
                self.Omega
            )));
        }
        Ok(())
    }

    /// Weaker check used by the coupled solver, which is happy to run a
    /// decoupled (`Gamma = 0`) or unpumped (`R = 0`) system.
    pub fn validate_for_coupled(&self) -> Result<()> {
        self.validate_finite()?;
        for (name, v) in [
            ("gamma_u", self.gamma_u),
            ("gamma_c", self.gamma_c),
            ("D_r", self.D_r),
            ("V", self.V),
            ("mass", self.mass),
        ] {
            if v <= 0.0 {
                return Err(Error::DegenerateParameter(format!("{name} = {v:e} must be > 0")));
            }
        }
        for (name, v) in [("Gamma", self.Gamma), ("R", self.R), ("Omega", self.Omega)] {
            if v < 0.0 {
                return Err(Error::DegenerateParameter(format!("{name} = {v:e} must be >= 0")));
            }
        }
        Ok(())
    }

    fn validate_finite(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_u", self.gamma_u),
            ("gamma_c", self.gamma_c),
            ("Gamma", self.Gamma),
            ("R", self.R),
            ("D_r", self.D_r),
            ("g_over_hbar", self.g_over_hbar),
            ("Omega", self.Omega),
            ("V", self.V),
            ("mass", self.mass),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("PhysicalParams.{name}")));
            }
        }
        Ok(())
    }
}

/// Maps SI parameters onto the dimensionless equation:
///
/// ```text
/// eps = (R Gamma / (gamma_u gamma_c) - 1) / 2
/// c1  = hbar gamma_u^2 / (m R D_r Gamma)
/// c2  = (2 gamma_u^2 / (R Gamma^2)) (Omega V + g/hbar)
/// l0  = sqrt(R D_r Gamma / (2 gamma_u^2 gamma_c))
/// ```
///
/// `eps <= 0` is not an error here; it simply means there is no lasing
/// state, which the stability layer interprets.
pub fn reduce(p: &PhysicalParams) -> Result<ReducedParams> {
    p.validate()?;
    let gu2 = p.gamma_u * p.gamma_u;
    let epsilon = 0.5 * (p.R * p.Gamma / (p.gamma_u * p.gamma_c) - 1.0);
    let c1 = HBAR * gu2 / (p.mass * p.R * p.D_r * p.Gamma);
    let c2 = 2.0 * gu2 / (p.R * p.Gamma * p.Gamma) * (p.Omega * p.V + p.g_over_hbar);
    let l0 = (p.R * p.D_r * p.Gamma / (2.0 * gu2 * p.gamma_c)).sqrt();
    let t0 = 1.0 / p.gamma_c;
    let amp2_scale = p.R * p.Gamma * p.Gamma / (2.0 * gu2 * p.gamma_c);
    Ok(ReducedParams { epsilon, c1, c2, l0, t0, amp2_scale })
}

/// Rabi coupling that realizes a requested `c2`. Inverts the affine map
/// `c2(Omega)`; the result can be negative, which no physical dressing
/// field reaches, so callers should treat a negative return as "this c2
/// is already exceeded at Omega = 0".
pub fn omega_for_c2(p: &PhysicalParams, c2_target: f64) -> Result<f64> {
    p.validate()?;
    if !c2_target.is_finite() {
        return Err(Error::NonFinite("c2_target".into()));
    }
    let gu2 = p.gamma_u * p.gamma_u;
    Ok((c2_target * p.R * p.Gamma * p.Gamma / (2.0 * gu2) - p.g_over_hbar) / p.V)
}

/// Contact interaction from an s-wave scattering length: `4 pi hbar a / m`,
/// in the same m^3 s^-1 units as `PhysicalParams::g_over_hbar`.
pub fn g_from_scattering(scattering_length: f64, mass: f64) -> Result<f64> {
    if !scattering_length.is_finite() || !mass.is_finite() {
        return Err(Error::NonFinite("g_from_scattering input".into()));
    }
    if mass <= 0.0 {
        return Err(Error::DegenerateParameter(format!("mass = {mass:e} must be > 0")));
    }
    Ok(4.0 * std::f64::consts::PI * HBAR * scattering_length / mass)
}
