//! Plain-text run configuration: `[section]` headers, `key = value`
//! lines, `#` comment lines. Keys mirror the field names of the types
//! they fill, so a file reads like the struct it builds.

use crate::coupled::{CoupledConfig, CoupledInit, PumpProfile};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{preset, PhysicalParams};
use crate::sweep::{AxisSpec, NumericalSweep, SweepMode, SweepSpec};

/// A parsed configuration document. Sections and keys keep their file
/// order; duplicates are rejected at parse time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigDoc {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl ConfigDoc {
    /// Parses a document. A line is a comment when its first non-blank
    /// character is `#`; inline `#` stays part of the value, so paths with
    /// hashes survive.
    pub fn parse(text: &str) -> Result<ConfigDoc> {
        let mut doc = ConfigDoc::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("unterminated section header {trimmed:?}"),
                    })?
                    .trim();
                if name.is_empty() {
                    return Err(Error::Parse { line, msg: "empty section name".into() });
                }
                if doc.sections.iter().any(|(s, _)| s == name) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("section [{name}] appears twice"),
                    });
                }
                doc.sections.push((name.to_string(), Vec::new()));
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `key = value` or `[section]`, got {trimmed:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::Parse { line, msg: "empty key".into() });
            }
            let Some((section, entries)) = doc.sections.last_mut() else {
                return Err(Error::Parse {
                    line,
                    msg: format!("key {key:?} appears before any [section]"),
                });
            };
            if entries.iter().any(|(k, _)| k == key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {key:?} in [{section}]"),
                });
            }
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(doc)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|(s, _)| s == name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)?
            .1
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Adds or replaces a key, creating the section on first use.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        let entries = match self.sections.iter_mut().find(|(s, _)| s == section) {
            Some((_, e)) => e,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                &mut self.sections.last_mut().unwrap().1
            }
        };
        let value = value.into();
        match entries.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value,
            None => entries.push((key.to_string(), value)),
        }
    }

    pub fn get_str(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| {
            Error::InvalidConfig(format!("missing key `{key}` in [{section}]"))
        })
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<f64> {
        let v = self.get_str(section, key)?;
        v.parse().map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key} = {v:?} is not a number"))
        })
    }

    pub fn get_u64(&self, section: &str, key: &str) -> Result<u64> {
        let v = self.get_str(section, key)?;
        v.parse().map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key} = {v:?} is not an integer"))
        })
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<usize> {
        let v = self.get_str(section, key)?;
        v.parse().map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key} = {v:?} is not an integer"))
        })
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            Some(_) => self.get_f64(section, key),
            None => Ok(default),
        }
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            Some(_) => self.get_usize(section, key),
            None => Ok(default),
        }
    }

    fn u64_or(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.get(section, key) {
            Some(_) => self.get_u64(section, key),
            None => Ok(default),
        }
    }

    /// Rejects keys outside `allowed`, so a typo fails loudly instead of
    /// silently falling back to a default.
    pub fn expect_keys(&self, section: &str, allowed: &[&str]) -> Result<()> {
        let Some((_, entries)) = self.sections.iter().find(|(s, _)| s == section) else {
            return Ok(());
        };
        for (k, _) in entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "unknown key `{k}` in [{section}] (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Renders the document back to text. `parse(to_text(d)) == d`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (section, entries) in &self.sections {
            out.push('[');
            out.push_str(section);
            out.push_str("]\n");
            for (k, v) in entries {
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(v);
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

const PARAM_KEYS: [&str; 9] =
    ["gamma_u", "gamma_c", "Gamma", "R", "D_r", "g_over_hbar", "Omega", "V", "mass"];

/// Builds physical parameters from `[params]`. Either `preset = name`
/// seeds the set (individual keys then override single fields), or all
/// nine fields are given explicitly.
pub fn physical_params_from(doc: &ConfigDoc) -> Result<PhysicalParams> {
    let mut allowed = vec!["preset"];
    allowed.extend(PARAM_KEYS);
    doc.expect_keys("params", &allowed)?;
    let mut p = match doc.get("params", "preset") {
        Some(name) => preset(name)?,
        None => {
            if !doc.has_section("params") {
                return Err(Error::InvalidConfig("missing [params] section".into()));
            }
            PhysicalParams {
                gamma_u: doc.get_f64("params", "gamma_u")?,
                gamma_c: doc.get_f64("params", "gamma_c")?,
                Gamma: doc.get_f64("params", "Gamma")?,
                R: doc.get_f64("params", "R")?,
                D_r: doc.get_f64("params", "D_r")?,
                g_over_hbar: doc.get_f64("params", "g_over_hbar")?,
                Omega: doc.get_f64("params", "Omega")?,
                V: doc.get_f64("params", "V")?,
                mass: doc.get_f64("params", "mass")?,
            }
        }
    };
    if doc.get("params", "preset").is_some() {
        for key in PARAM_KEYS {
            if doc.get("params", key).is_some() {
                let v = doc.get_f64("params", key)?;
                match key {
                    "gamma_u" => p.gamma_u = v,
                    "gamma_c" => p.gamma_c = v,
                    "Gamma" => p.Gamma = v,
                    "R" => p.R = v,
                    "D_r" => p.D_r = v,
                    "g_over_hbar" => p.g_over_hbar = v,
                    "Omega" => p.Omega = v,
                    "V" => p.V = v,
                    "mass" => p.mass = v,
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(p)
}

/// Writes a parameter set as a `[params]` section with full round-trip
/// precision.
pub fn physical_params_to_doc(p: &PhysicalParams) -> ConfigDoc {
    let mut doc = ConfigDoc::default();
    // `{}` on f64 prints the shortest digits that parse back exactly
    doc.set("params", "gamma_u", format!("{}", p.gamma_u));
    doc.set("params", "gamma_c", format!("{}", p.gamma_c));
    doc.set("params", "Gamma", format!("{}", p.Gamma));
    doc.set("params", "R", format!("{}", p.R));
    doc.set("params", "D_r", format!("{}", p.D_r));
    doc.set("params", "g_over_hbar", format!("{}", p.g_over_hbar));
    doc.set("params", "Omega", format!("{}", p.Omega));
    doc.set("params", "V", format!("{}", p.V));
    doc.set("params", "mass", format!("{}", p.mass));
    doc
}

/// Builds a grid from `[grid]` with defaults `dim = 1`, `n = 256`,
/// `length = 100`.
pub fn grid_from(doc: &ConfigDoc) -> Result<Grid> {
    doc.expect_keys("grid", &["dim", "n", "length"])?;
    Grid::new(
        doc.usize_or("grid", "dim", 1)?,
        doc.usize_or("grid", "n", 256)?,
        doc.f64_or("grid", "length", 100.0)?,
    )
}

/// Builds solver settings from `[solver]`, defaulting any absent key.
pub fn solver_config_from(doc: &ConfigDoc) -> Result<crate::cgle::SolverConfig> {
    doc.expect_keys("solver", &["dt", "t_end", "record_every", "seed", "noise_amp"])?;
    let d = crate::cgle::SolverConfig::default();
    let config = crate::cgle::SolverConfig {
        dt: doc.f64_or("solver", "dt", d.dt)?,
        t_end: doc.f64_or("solver", "t_end", d.t_end)?,
        record_every: doc.usize_or("solver", "record_every", d.record_every)?,
        seed: doc.u64_or("solver", "seed", d.seed)?,
        noise_amp: doc.f64_or("solver", "noise_amp", d.noise_amp)?,
    };
    config.validate()?;
    Ok(config)
}

/// Builds the starting field from `[init]`: `kind = noise` (default) or
/// `kind = plane` with `q` and `delta`.
pub fn init_kind_from(doc: &ConfigDoc) -> Result<crate::cgle::InitKind> {
    doc.expect_keys("init", &["kind", "q", "delta"])?;
    match doc.get("init", "kind").unwrap_or("noise") {
        "noise" => Ok(crate::cgle::InitKind::HomogeneousNoise),
        "plane" => Ok(crate::cgle::InitKind::PlaneWavePerturbed {
            q: doc.get_f64("init", "q")?,
            delta: doc.f64_or("init", "delta", 1e-3)?,
        }),
        other => Err(Error::InvalidConfig(format!(
            "[init] kind = {other:?} (expected noise or plane)"
        ))),
    }
}

/// Builds coupled-system settings from `[coupled]`, defaulting any absent
/// key. `probes` is a comma-separated wavenumber list.
pub fn coupled_config_from(doc: &ConfigDoc) -> Result<CoupledConfig> {
    doc.expect_keys(
        "coupled",
        &["dt", "t_end", "record_every", "seed", "noise_amp", "pump", "pump_radius", "init", "probes"],
    )?;
    let d = CoupledConfig::default();
    let pump = match doc.get("coupled", "pump").unwrap_or("uniform") {
        "uniform" => PumpProfile::Uniform,
        "truncated" => PumpProfile::Truncated { radius: doc.get_f64("coupled", "pump_radius")? },
        other => {
            return Err(Error::InvalidConfig(format!(
                "[coupled] pump = {other:?} (expected uniform or truncated)"
            )))
        }
    };
    let init = match doc.get("coupled", "init").unwrap_or("stationary-noise") {
        "zero" => CoupledInit::Zero,
        "stationary" => CoupledInit::Stationary,
        "stationary-noise" => CoupledInit::StationaryNoise,
        other => {
            return Err(Error::InvalidConfig(format!(
                "[coupled] init = {other:?} (expected zero, stationary or stationary-noise)"
            )))
        }
    };
    let probes = match doc.get("coupled", "probes") {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidConfig(format!("[coupled] probes entry {s:?} is not a number"))
                })
            })
            .collect::<Result<_>>()?,
    };
    let config = CoupledConfig {
        dt: doc.f64_or("coupled", "dt", d.dt)?,
        t_end: doc.f64_or("coupled", "t_end", d.t_end)?,
        record_every: doc.usize_or("coupled", "record_every", d.record_every)?,
        seed: doc.u64_or("coupled", "seed", d.seed)?,
        noise_amp: doc.f64_or("coupled", "noise_amp", d.noise_amp)?,
        pump,
        init,
        probes,
    };
    config.validate()?;
    Ok(config)
}

/// Builds a sweep from `[sweep]` plus a parameter base: either a full
/// `[params]` section or `preset = name` inside `[sweep]`. Absent axis
/// keys fall back to Omega in [0, 1] and R in [R/2, 2R] at the
/// documented resolution (100 per axis analytic, 20 numerical).
pub fn sweep_spec_from(doc: &ConfigDoc) -> Result<SweepSpec> {
    doc.expect_keys(
        "sweep",
        &[
            "preset", "mode", "omega_lo", "omega_hi", "omega_n", "r_lo", "r_hi", "r_n",
            "horizon", "contrast_threshold", "dt", "noise_amp", "seed", "grid_n", "grid_length",
        ],
    )?;
    if !doc.has_section("sweep") {
        return Err(Error::InvalidConfig("missing [sweep] section".into()));
    }
    let (base, label) = if doc.has_section("params") {
        let label = doc.get("params", "preset").unwrap_or("custom").to_string();
        (physical_params_from(doc)?, label)
    } else {
        let name = doc.get_str("sweep", "preset")?;
        (preset(name)?, name.to_string())
    };
    let numerical = match doc.get("sweep", "mode").unwrap_or("analytic") {
        "analytic" => false,
        "numerical" => true,
        other => {
            return Err(Error::InvalidConfig(format!(
                "[sweep] mode = {other:?} (expected analytic or numerical)"
            )))
        }
    };
    let default_n = if numerical { 20 } else { 100 };
    let omega = AxisSpec {
        lo: doc.f64_or("sweep", "omega_lo", 0.0)?,
        hi: doc.f64_or("sweep", "omega_hi", 1.0)?,
        n: doc.usize_or("sweep", "omega_n", default_n)?,
    };
    let r = AxisSpec {
        lo: doc.f64_or("sweep", "r_lo", 0.5 * base.R)?,
        hi: doc.f64_or("sweep", "r_hi", 2.0 * base.R)?,
        n: doc.usize_or("sweep", "r_n", default_n)?,
    };
    let mode = if numerical {
        let d = NumericalSweep::default();
        SweepMode::Numerical(NumericalSweep {
            horizon: doc.f64_or("sweep", "horizon", d.horizon)?,
            contrast_threshold: doc.f64_or("sweep", "contrast_threshold", d.contrast_threshold)?,
            dt: doc.f64_or("sweep", "dt", d.dt)?,
            noise_amp: doc.f64_or("sweep", "noise_amp", d.noise_amp)?,
            seed: doc.u64_or("sweep", "seed", d.seed)?,
            grid_n: doc.usize_or("sweep", "grid_n", d.grid_n)?,
            grid_length: doc.f64_or("sweep", "grid_length", d.grid_length)?,
        })
    } else {
        SweepMode::Analytic
    };
    let spec = SweepSpec { base, preset: label, omega, r, mode };
    spec.validate()?;
    Ok(spec)
}
