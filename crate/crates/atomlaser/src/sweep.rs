//! Stability maps over the (Omega, R) control plane: every cell either
//! gets the analytic verdict from the reduced coefficients or a numerical
//! verdict from running the solver and looking at the final modulation
//! contrast.

use rayon::prelude::*;

use crate::cgle::{self, InitKind, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{preset, reduce, PhysicalParams};

/// Inclusive evenly spaced axis. A single-point axis must have `lo == hi`;
/// anything longer needs `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    fn validate(&self, name: &str, min_lo_exclusive: bool) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::RangeSpec(format!("{name} axis bounds must be finite")));
        }
        if self.n == 0 {
            return Err(Error::RangeSpec(format!("{name} axis needs at least one point")));
        }
        if self.n == 1 && self.lo != self.hi {
            return Err(Error::RangeSpec(format!(
                "{name} axis with one point needs lo == hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.n > 1 && !(self.lo < self.hi) {
            return Err(Error::RangeSpec(format!(
                "{name} axis needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if min_lo_exclusive && !(self.lo > 0.0) {
            return Err(Error::RangeSpec(format!("{name} axis must stay positive")));
        }
        if !min_lo_exclusive && self.lo < 0.0 {
            return Err(Error::RangeSpec(format!("{name} axis must be nonnegative")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.lo + step * i as f64).collect()
    }
}

/// Solver knobs for a numerical sweep. The horizon is in units of tau and
/// each cell runs a 1D lattice from homogeneous noise with its own seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalSweep {
    pub horizon: f64,
    /// Final modulation contrast above this reads as unstable.
    pub contrast_threshold: f64,
    pub dt: f64,
    pub noise_amp: f64,
    pub seed: u64,
    pub grid_n: usize,
    pub grid_length: f64,
}

impl Default for NumericalSweep {
    fn default() -> Self {
        NumericalSweep {
            horizon: 100.0,
            contrast_threshold: 0.2,
            dt: 1e-2,
            noise_amp: 1e-2,
            seed: 1,
            grid_n: 256,
            grid_length: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    Analytic,
    Numerical(NumericalSweep),
}

/// One sweep request: base parameters plus the two control axes. `preset`
/// is a provenance label only.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: PhysicalParams,
    pub preset: String,
    pub omega: AxisSpec,
    pub r: AxisSpec,
    pub mode: SweepMode,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.omega.validate("omega", false)?;
        self.r.validate("r", true)?;
        if let SweepMode::Numerical(ns) = &self.mode {
            if !(ns.horizon > 0.0 && ns.horizon.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "sweep horizon = {} must be positive",
                    ns.horizon
                )));
            }
            if !(ns.contrast_threshold > 0.0 && ns.contrast_threshold.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "contrast threshold = {} must be positive",
                    ns.contrast_threshold
                )));
            }
            if !(ns.dt > 0.0 && ns.dt.is_finite()) {
                return Err(Error::InvalidConfig(format!("sweep dt = {} must be positive", ns.dt)));
            }
            if !(ns.noise_amp >= 0.0 && ns.noise_amp.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "sweep noise_amp = {} must be nonnegative",
                    ns.noise_amp
                )));
            }
            Grid::new(1, ns.grid_n, ns.grid_length)?;
        }
        Ok(())
    }
}

/// Default rb87/li7-style sweep: Omega from 0 to 1 rad/s, R from half to
/// twice the preset pump, 100x100 analytic or 20x20 numerical.
pub fn default_spec(preset_name: &str, numerical: bool) -> Result<SweepSpec> {
    let base = preset(preset_name)?;
    let n = if numerical { 20 } else { 100 };
    Ok(SweepSpec {
        preset: preset_name.into(),
        omega: AxisSpec { lo: 0.0, hi: 1.0, n },
        r: AxisSpec { lo: 0.5 * base.R, hi: 2.0 * base.R, n },
        mode: if numerical {
            SweepMode::Numerical(NumericalSweep::default())
        } else {
            SweepMode::Analytic
        },
        base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellVerdict {
    Stable,
    Unstable,
    /// No lasing at this pump: epsilon <= 0, nothing to destabilize.
    BelowThreshold,
    /// The cell run failed; the margin slot holds NaN.
    Failed,
}

impl CellVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellVerdict::Stable => "stable",
            CellVerdict::Unstable => "unstable",
            CellVerdict::BelowThreshold => "below-threshold",
            CellVerdict::Failed => "failed",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(CellVerdict::Stable),
            "unstable" => Ok(CellVerdict::Unstable),
            "below-threshold" => Ok(CellVerdict::BelowThreshold),
            "failed" => Ok(CellVerdict::Failed),
            other => Err(Error::Parse { line: 0, msg: format!("unknown verdict {other:?}") }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapMode {
    Analytic,
    Numerical,
}

impl MapMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MapMode::Analytic => "analytic",
            MapMode::Numerical => "numerical",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(MapMode::Analytic),
            "numerical" => Ok(MapMode::Numerical),
            other => Err(Error::Parse { line: 0, msg: format!("unknown map mode {other:?}") }),
        }
    }
}

/// Where a map came from. Only ends up in comment headers, never in data
/// rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub preset: String,
    pub generated_unix: u64,
    pub tool_version: String,
}

impl Provenance {
    fn now(preset: &str) -> Self {
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Provenance {
            preset: preset.into(),
            generated_unix,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Verdicts and margins over the control plane, row-major with omega
/// varying fastest. In analytic mode the margin slot holds `1 + c1 c2`;
/// in numerical mode it holds the final modulation contrast (0 for cells
/// below threshold, NaN for failed cells).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub omega_axis: Vec<f64>,
    pub r_axis: Vec<f64>,
    pub margin: Vec<f64>,
    pub verdict: Vec<CellVerdict>,
    pub mode: MapMode,
    pub provenance: Provenance,
}

impl StabilityMap {
    pub fn n_omega(&self) -> usize {
        self.omega_axis.len()
    }

    pub fn n_r(&self) -> usize {
        self.r_axis.len()
    }

    pub fn idx(&self, ir: usize, io: usize) -> usize {
        ir * self.n_omega() + io
    }

    pub fn margin_at(&self, ir: usize, io: usize) -> f64 {
        self.margin[self.idx(ir, io)]
    }

    pub fn verdict_at(&self, ir: usize, io: usize) -> CellVerdict {
        self.verdict[self.idx(ir, io)]
    }
}

fn cell_params(base: &PhysicalParams, omega: f64, r: f64) -> PhysicalParams {
    let mut p = *base;
    p.Omega = omega;
    p.R = r;
    p
}

/// Classifies every cell from the reduced coefficients alone: the margin
/// is `1 + c1 c2`, cells with `epsilon <= 0` read below-threshold.
pub fn analytic_map(spec: &SweepSpec) -> Result<StabilityMap> {
    spec.validate()?;
    let omega_axis = spec.omega.values();
    let r_axis = spec.r.values();
    let mut margin = Vec::with_capacity(omega_axis.len() * r_axis.len());
    let mut verdict = Vec::with_capacity(margin.capacity());
    for &r in &r_axis {
        for &omega in &omega_axis {
            match reduce(&cell_params(&spec.base, omega, r)) {
                Ok(rp) => {
                    let m = 1.0 + rp.c1 * rp.c2;
                    margin.push(m);
                    verdict.push(if rp.epsilon <= 0.0 {
                        CellVerdict::BelowThreshold
                    } else if m > 0.0 {
                        CellVerdict::Stable
                    } else {
                        CellVerdict::Unstable
                    });
                }
                Err(_) => {
                    margin.push(f64::NAN);
                    verdict.push(CellVerdict::Failed);
                }
            }
        }
    }
    Ok(StabilityMap {
        omega_axis,
        r_axis,
        margin,
        verdict,
        mode: MapMode::Analytic,
        provenance: Provenance::now(&spec.preset),
    })
}

fn numerical_cell(
    base: &PhysicalParams,
    omega: f64,
    r: f64,
    ns: &NumericalSweep,
    cell: usize,
) -> Result<(f64, CellVerdict)> {
    let p = cell_params(base, omega, r);
    let rp = reduce(&p)?;
    if rp.epsilon <= 0.0 {
        return Ok((0.0, CellVerdict::BelowThreshold));
    }
    let grid = Grid::new(1, ns.grid_n, ns.grid_length)?;
    let config = SolverConfig {
        dt: ns.dt,
        t_end: ns.horizon,
        record_every: usize::MAX,
        seed: ns.seed.wrapping_add(cell as u64),
        noise_amp: ns.noise_amp,
    };
    let state = cgle::init_state(&grid, &InitKind::HomogeneousNoise, &rp, &config)?;
    let (_, records) = cgle::run(state, &rp, &config, &[])?;
    let contrast = records.last().map(|r| r.modulation_contrast).unwrap_or(0.0);
    let v = if contrast > ns.contrast_threshold {
        CellVerdict::Unstable
    } else {
        CellVerdict::Stable
    };
    Ok((contrast, v))
}

/// Classifies every lasing cell by simulation: homogeneous noise run to
/// the horizon, unstable when the final contrast clears the threshold.
/// Individual cell failures are recorded as [`CellVerdict::Failed`], not
/// raised.
pub fn numerical_map(spec: &SweepSpec) -> Result<StabilityMap> {
    spec.validate()?;
    let ns = match &spec.mode {
        SweepMode::Numerical(ns) => *ns,
        SweepMode::Analytic => {
            return Err(Error::InvalidConfig(
                "numerical_map needs a spec with numerical mode settings".into(),
            ))
        }
    };
    let omega_axis = spec.omega.values();
    let r_axis = spec.r.values();
    let n_omega = omega_axis.len();
    let cells: Vec<(f64, CellVerdict)> = (0..n_omega * r_axis.len())
        .into_par_iter()
        .map(|cell| {
            let omega = omega_axis[cell % n_omega];
            let r = r_axis[cell / n_omega];
            numerical_cell(&spec.base, omega, r, &ns, cell)
                .unwrap_or((f64::NAN, CellVerdict::Failed))
        })
        .collect();
    let margin = cells.iter().map(|c| c.0).collect();
    let verdict = cells.iter().map(|c| c.1).collect();
    Ok(StabilityMap {
        omega_axis,
        r_axis,
        margin,
        verdict,
        mode: MapMode::Numerical,
        provenance: Provenance::now(&spec.preset),
    })
}
