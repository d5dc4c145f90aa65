//! Command-line front end: reduction, thresholds, simulation runs and
//! stability maps, driven by flat config files. Exit codes: 0 success,
//! 1 usage (bad flags, unknown preset, malformed config), 2 runtime
//! (blow-up, guard violation, I/O).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};

use atomlaser::cgle::{self, InitKind};
use atomlaser::config::{self, ConfigDoc};
use atomlaser::coupled;
use atomlaser::export;
use atomlaser::params::{preset, reduce, PRESET_NAMES};
use atomlaser::stability;
use atomlaser::sweep::{self, CellVerdict, SweepMode};

#[derive(Parser)]
#[command(
    name = "atomlaser",
    version,
    about = "Stability analysis and simulation of pumped atom-laser condensates"
)]
struct Cli {
    /// Output directory for generated files (default: $ATOMLASER_OUT, then .)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in parameter sets
    Presets,
    /// Reduce a parameter set to (eps, c1, c2) and report stability
    Reduce {
        #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
        /// Rabi coupling in rad/s (overrides the preset value)
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Bisect the Rabi threshold Omega* and check it against the closed form
    Threshold {
        #[arg(long, value_parser = PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
    },
    /// Integrate the reduced equation and write snapshot + diagnostics CSV
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the closed equation against the coupled system and report the gap
    CompareOracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build an (Omega, R) stability map and write CSV + PGM
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Fail {
    Usage(String),
    Runtime(String),
}

fn usage(e: atomlaser::Error) -> Fail {
    Fail::Usage(e.to_string())
}

fn runtime(e: atomlaser::Error) -> Fail {
    Fail::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.command {
        Command::Presets => presets_cmd(),
        Command::Reduce { preset, omega } => reduce_cmd(&preset, omega),
        Command::Threshold { preset } => threshold_cmd(&preset),
        Command::Simulate { config } => simulate_cmd(&config, &out_dir(&cli.out)?),
        Command::CompareOracle { config } => compare_cmd(&config, &out_dir(&cli.out)?),
        Command::Sweep { config } => sweep_cmd(&config, &out_dir(&cli.out)?),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf, Fail> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os("ATOMLASER_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Fail::Runtime(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_doc(path: &Path) -> Result<ConfigDoc, Fail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    ConfigDoc::parse(&text).map_err(usage)
}

fn presets_cmd() -> Result<(), Fail> {
    for name in PRESET_NAMES {
        let p = preset(name).map_err(runtime)?;
        let rp = reduce(&p).map_err(runtime)?;
        let v = stability::benjamin_feir(rp.c1, rp.c2).map_err(runtime)?;
        println!(
            "{name}: eps = {:.4}, margin = {:+.4}, {} at Omega = 0",
            rp.epsilon,
            v.margin,
            if v.stable { "stable" } else { "unstable" }
        );
    }
    Ok(())
}

fn reduce_cmd(name: &str, omega: Option<f64>) -> Result<(), Fail> {
    let mut p = preset(name).map_err(usage)?;
    if let Some(omega) = omega {
        p.Omega = omega;
    }
    let rp = reduce(&p).map_err(usage)?;
    let v = stability::benjamin_feir(rp.c1, rp.c2).map_err(runtime)?;
    println!("preset = {name}");
    println!("Omega = {:e}", p.Omega);
    println!("eps = {:e}", rp.epsilon);
    println!("c1 = {:e}", rp.c1);
    println!("c2 = {:e}", rp.c2);
    println!("l0 = {:e}", rp.l0);
    println!("t0 = {:e}", rp.t0);
    println!("amp2_scale = {:e}", rp.amp2_scale);
    // the same criterion in both common renderings
    println!("margin = {:e}", v.margin);
    println!("c1_times_neg_c2 = {:e}", rp.c1 * (-rp.c2));
    if rp.epsilon <= 0.0 {
        println!("verdict = below-threshold");
    } else {
        println!("verdict = {}", if v.stable { "stable" } else { "unstable" });
    }
    Ok(())
}

fn threshold_cmd(name: &str) -> Result<(), Fail> {
    let p = preset(name).map_err(usage)?;
    let bisected = stability::rabi_threshold(&p).map_err(runtime)?;
    let closed = stability::rabi_threshold_closed_form(&p).map_err(runtime)?;
    println!("preset = {name}");
    println!("omega_star = {bisected:e}");
    println!("omega_star_closed_form = {closed:e}");
    println!("difference = {:e}", (bisected - closed).abs());
    Ok(())
}

fn simulate_cmd(config: &Path, out: &Path) -> Result<(), Fail> {
    let doc = load_doc(config)?;
    let p = config::physical_params_from(&doc).map_err(usage)?;
    let rp = reduce(&p).map_err(usage)?;
    let grid = config::grid_from(&doc).map_err(usage)?;
    let solver = config::solver_config_from(&doc).map_err(usage)?;
    let init = config::init_kind_from(&doc).map_err(usage)?;
    let probes = match &init {
        InitKind::PlaneWavePerturbed { q, .. } => vec![*q],
        _ => Vec::new(),
    };
    let state = cgle::init_state(&grid, &init, &rp, &solver).map_err(runtime)?;
    let (final_state, records) = cgle::run(state, &rp, &solver, &probes).map_err(runtime)?;

    let field_path = out.join("field.csv");
    let diag_path = out.join("diagnostics.csv");
    export::write_field_csv(&final_state, &field_path).map_err(runtime)?;
    export::write_diagnostics_csv(&records, &diag_path).map_err(runtime)?;

    let last = records.last().expect("runs always record the final step");
    println!("tau = {:e}", last.tau);
    println!("mean_density = {:e}", last.mean_density);
    println!("contrast = {:e}", last.modulation_contrast);
    println!("wrote {}", field_path.display());
    println!("wrote {}", diag_path.display());
    Ok(())
}

fn compare_cmd(config: &Path, out: &Path) -> Result<(), Fail> {
    let doc = load_doc(config)?;
    let p = config::physical_params_from(&doc).map_err(usage)?;
    let grid = config::grid_from(&doc).map_err(usage)?;
    let coupled_config = config::coupled_config_from(&doc).map_err(usage)?;
    let report = coupled::compare_closed_vs_coupled(&p, &grid, &coupled_config).map_err(runtime)?;
    let text = report.to_text();
    print!("{text}");
    let report_path = out.join("compare_report.txt");
    std::fs::write(&report_path, &text)
        .map_err(|e| Fail::Runtime(format!("{}: {e}", report_path.display())))?;
    println!("wrote {}", report_path.display());
    Ok(())
}

fn sweep_cmd(config: &Path, out: &Path) -> Result<(), Fail> {
    let doc = load_doc(config)?;
    let spec = config::sweep_spec_from(&doc).map_err(usage)?;
    let map = match spec.mode {
        SweepMode::Analytic => sweep::analytic_map(&spec).map_err(runtime)?,
        SweepMode::Numerical(_) => sweep::numerical_map(&spec).map_err(runtime)?,
    };

    let count = |v: CellVerdict| map.verdict.iter().filter(|&&x| x == v).count();
    println!("mode = {}", map.mode.as_str());
    println!("cells = {} x {}", map.n_omega(), map.n_r());
    println!(
        "stable = {}, unstable = {}, below-threshold = {}, failed = {}",
        count(CellVerdict::Stable),
        count(CellVerdict::Unstable),
        count(CellVerdict::BelowThreshold),
        count(CellVerdict::Failed)
    );

    let csv_path = out.join("map.csv");
    let pgm_path = out.join("map.pgm");
    export::write_map_csv(&map, &csv_path).map_err(runtime)?;
    export::write_map_pgm(&map, &pgm_path).map_err(runtime)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", pgm_path.display());
    Ok(())
}
