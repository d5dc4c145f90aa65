//! File renderings of maps, snapshots, and diagnostics. Data rows carry
//! nine significant digits; provenance (including timestamps) lives only
//! in `#` comment lines so two exports of the same map diff clean once
//! comments are stripped.

use std::fmt::Write as _;
use std::path::Path;

use crate::cgle::FieldState;
use crate::coupled::CoupledState;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::sweep::{AxisSpec, CellVerdict, MapMode, Provenance, StabilityMap};

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn provenance_header(out: &mut String, title: &str, prov: &Provenance) {
    let _ = writeln!(out, "# atomlaser {title}");
    let _ = writeln!(out, "# tool_version = {}", prov.tool_version);
    let _ = writeln!(out, "# generated_unix = {}", prov.generated_unix);
    let _ = writeln!(out, "# preset = {}", prov.preset);
}

/// Renders a stability map as CSV: `#` comment header with axes and
/// provenance, then one `omega,r,margin,verdict` row per cell, omega
/// varying fastest.
pub fn map_to_csv(map: &StabilityMap) -> String {
    let mut out = String::new();
    provenance_header(&mut out, "stability map", &map.provenance);
    let _ = writeln!(out, "# mode = {}", map.mode.as_str());
    let _ = writeln!(
        out,
        "# omega_axis = {:e} {:e} {}",
        map.omega_axis[0],
        *map.omega_axis.last().unwrap(),
        map.n_omega()
    );
    let _ = writeln!(
        out,
        "# r_axis = {:e} {:e} {}",
        map.r_axis[0],
        *map.r_axis.last().unwrap(),
        map.n_r()
    );
    let _ = writeln!(out, "# columns = omega,r,margin,verdict");
    for (ir, &r) in map.r_axis.iter().enumerate() {
        for (io, &omega) in map.omega_axis.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                sig9(omega),
                sig9(r),
                sig9(map.margin_at(ir, io)),
                map.verdict_at(ir, io).as_str()
            );
        }
    }
    out
}

/// Reads back a map written by [`map_to_csv`]. Axes are rebuilt from the
/// header, so the comment lines are part of the format; margins come back
/// with the nine digits the rows carry.
pub fn parse_map_csv(text: &str) -> Result<StabilityMap> {
    let mut mode = None;
    let mut omega_axis: Option<AxisSpec> = None;
    let mut r_axis: Option<AxisSpec> = None;
    let mut preset = String::new();
    let mut tool_version = String::new();
    let mut generated_unix = 0u64;
    let mut margin = Vec::new();
    let mut verdict = Vec::new();

    let parse_axis = |line: usize, value: &str| -> Result<AxisSpec> {
        let parts: Vec<&str> = value.split_whitespace().collect();
        let bad = || Error::Parse { line, msg: format!("axis header needs `lo hi n`, got {value:?}") };
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let n: usize = parts[2].parse().map_err(|_| bad())?;
        Ok(AxisSpec { lo, hi, n })
    };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once('=') else { continue };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => mode = Some(MapMode::from_str(value).map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("unknown map mode {value:?}"),
                })?),
                "omega_axis" => omega_axis = Some(parse_axis(lineno, value)?),
                "r_axis" => r_axis = Some(parse_axis(lineno, value)?),
                "preset" => preset = value.into(),
                "tool_version" => tool_version = value.into(),
                "generated_unix" => {
                    generated_unix = value.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("generated_unix is not an integer: {value:?}"),
                    })?
                }
                _ => {}
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 fields omega,r,margin,verdict, got {}", fields.len()),
            });
        }
        let m: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("margin is not a number: {:?}", fields[2]),
        })?;
        let v = CellVerdict::from_str(fields[3]).map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("unknown verdict {:?}", fields[3]),
        })?;
        margin.push(m);
        verdict.push(v);
    }

    let mode = mode.ok_or(Error::Parse { line: 0, msg: "missing `# mode =` header".into() })?;
    let omega_axis =
        omega_axis.ok_or(Error::Parse { line: 0, msg: "missing `# omega_axis =` header".into() })?;
    let r_axis =
        r_axis.ok_or(Error::Parse { line: 0, msg: "missing `# r_axis =` header".into() })?;
    let expected = omega_axis.n * r_axis.n;
    if margin.len() != expected {
        return Err(Error::Parse {
            line: 0,
            msg: format!("{} data rows for a {} x {} map", margin.len(), omega_axis.n, r_axis.n),
        });
    }
    Ok(StabilityMap {
        omega_axis: omega_axis.values(),
        r_axis: r_axis.values(),
        margin,
        verdict,
        mode,
        provenance: Provenance { preset, generated_unix, tool_version },
    })
}

/// Renders a map as a binary PGM image, one pixel per cell, omega along x
/// and the first R row on top. Stable cells are light (128..=255, scaled
/// by margin), unstable cells dark (0..=127, scaled by |margin|), and
/// below-threshold or failed cells sit at mid-gray 128.
pub fn map_to_pgm(map: &StabilityMap) -> Vec<u8> {
    let mut max_pos = 0.0f64;
    let mut max_neg = 0.0f64;
    for (m, v) in map.margin.iter().zip(&map.verdict) {
        if !m.is_finite() {
            continue;
        }
        match v {
            CellVerdict::Stable => max_pos = max_pos.max(m.abs()),
            CellVerdict::Unstable => max_neg = max_neg.max(m.abs()),
            _ => {}
        }
    }
    let mut out = format!("P5\n{} {}\n255\n", map.n_omega(), map.n_r()).into_bytes();
    for (m, v) in map.margin.iter().zip(&map.verdict) {
        let pixel = match v {
            CellVerdict::Stable if m.is_finite() && max_pos > 0.0 => {
                128 + (127.0 * m.abs() / max_pos).round().min(127.0) as u8
            }
            CellVerdict::Stable => 128,
            CellVerdict::Unstable if m.is_finite() && max_neg > 0.0 => {
                127 - (127.0 * m.abs() / max_neg).round().min(127.0) as u8
            }
            CellVerdict::Unstable => 127,
            CellVerdict::BelowThreshold | CellVerdict::Failed => 128,
        };
        out.push(pixel);
    }
    out
}

/// Renders a reduced-equation snapshot as CSV with columns
/// `index,x[,y],re_phi,im_phi,density`.
pub fn field_to_csv(state: &FieldState) -> String {
    let grid = &state.grid;
    let xs = grid.x_axis();
    let n = grid.n();
    let mut out = String::new();
    let _ = writeln!(out, "# atomlaser field snapshot");
    let _ = writeln!(out, "# dim = {}", grid.dim());
    let _ = writeln!(out, "# n = {n}");
    let _ = writeln!(out, "# length = {:e}", grid.length());
    let _ = writeln!(out, "# tau = {:e}", state.tau);
    if grid.dim() == 1 {
        let _ = writeln!(out, "# columns = index,x,re_phi,im_phi,density");
        for (i, v) in state.phi.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{}",
                sig9(xs[i]),
                sig9(v.re),
                sig9(v.im),
                sig9(v.norm_sqr())
            );
        }
    } else {
        let _ = writeln!(out, "# columns = index,x,y,re_phi,im_phi,density");
        for (i, v) in state.phi.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{}",
                sig9(xs[i % n]),
                sig9(xs[i / n]),
                sig9(v.re),
                sig9(v.im),
                sig9(v.norm_sqr())
            );
        }
    }
    out
}

/// Renders a coupled-system snapshot as CSV with columns
/// `index,x[,y],re_phi,im_phi,density,n_u`. Positions are meters, time is
/// seconds.
pub fn coupled_to_csv(state: &CoupledState) -> String {
    let grid = &state.grid;
    let xs = grid.x_axis();
    let n = grid.n();
    let mut out = String::new();
    let _ = writeln!(out, "# atomlaser coupled snapshot");
    let _ = writeln!(out, "# dim = {}", grid.dim());
    let _ = writeln!(out, "# n = {n}");
    let _ = writeln!(out, "# length = {:e}", grid.length());
    let _ = writeln!(out, "# t = {:e}", state.t);
    if grid.dim() == 1 {
        let _ = writeln!(out, "# columns = index,x,re_phi,im_phi,density,n_u");
        for (i, (v, nu)) in state.phi.iter().zip(&state.n_u).enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{}",
                sig9(xs[i]),
                sig9(v.re),
                sig9(v.im),
                sig9(v.norm_sqr()),
                sig9(*nu)
            );
        }
    } else {
        let _ = writeln!(out, "# columns = index,x,y,re_phi,im_phi,density,n_u");
        for (i, (v, nu)) in state.phi.iter().zip(&state.n_u).enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{},{}",
                sig9(xs[i % n]),
                sig9(xs[i / n]),
                sig9(v.re),
                sig9(v.im),
                sig9(v.norm_sqr()),
                sig9(*nu)
            );
        }
    }
    out
}

/// Renders a diagnostics history as CSV, one record per row:
/// `tau,mass,mean_density,contrast` then one amplitude column per probed
/// mode.
pub fn diagnostics_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# atomlaser diagnostics");
    let probes: Vec<f64> = records
        .first()
        .map(|r| r.mode_amplitudes.iter().map(|(q, _)| *q).collect())
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "# probes = {}",
        probes.iter().map(|q| format!("{q:e}")).collect::<Vec<_>>().join(",")
    );
    let amp_cols: Vec<String> = (0..probes.len()).map(|i| format!("amp_{i}")).collect();
    let _ = writeln!(
        out,
        "# columns = tau,mass,mean_density,contrast{}{}",
        if amp_cols.is_empty() { "" } else { "," },
        amp_cols.join(",")
    );
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{}",
            sig9(r.tau),
            sig9(r.mass),
            sig9(r.mean_density),
            sig9(r.modulation_contrast)
        );
        for (_, amp) in &r.mode_amplitudes {
            let _ = write!(out, ",{}", sig9(*amp));
        }
        out.push('\n');
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_map_csv(map: &StabilityMap, path: &Path) -> Result<()> {
    write_bytes(path, map_to_csv(map).as_bytes())
}

pub fn write_map_pgm(map: &StabilityMap, path: &Path) -> Result<()> {
    write_bytes(path, &map_to_pgm(map))
}

pub fn write_field_csv(state: &FieldState, path: &Path) -> Result<()> {
    write_bytes(path, field_to_csv(state).as_bytes())
}

pub fn write_coupled_csv(state: &CoupledState, path: &Path) -> Result<()> {
    write_bytes(path, coupled_to_csv(state).as_bytes())
}

pub fn write_diagnostics_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    write_bytes(path, diagnostics_to_csv(records).as_bytes())
}
