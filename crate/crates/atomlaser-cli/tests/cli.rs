//! End-to-end checks of the binary: flags, exit codes, output files and
//! the env-var fallback for the output directory.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_atomlaser"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn presets_lists_the_built_in_sets() {
    let out = bin().arg("presets").output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("rb87"));
    assert!(text.contains("li7"));
    assert!(text.contains("unstable at Omega = 0"));
}

#[test]
fn reduce_prints_coefficients_and_verdict() {
    let out = bin().args(["reduce", "--preset", "li7"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("eps = "));
    assert!(text.contains("c1 = "));
    assert!(text.contains("c2 = "));
    assert!(text.contains("l0 = 1.515"));
    assert!(text.contains("verdict = unstable"));

    let out = bin()
        .args(["reduce", "--preset", "li7", "--omega", "0.5"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("verdict = stable"));

    let out = bin().args(["reduce", "--preset", "rb87"]).output().unwrap();
    assert!(stdout(&out).contains("l0 = 3.645"));
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().args(["reduce", "--preset", "cs133"]).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("cs133"));

    let out = bin().output().unwrap();
    assert_eq!(code(&out), 1);

    let out = bin().args(["reduce"]).output().unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn help_and_version_exit_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("atomlaser"));

    let out = bin().arg("--version").output().unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn threshold_reports_both_solvers() {
    let out = bin().args(["threshold", "--preset", "li7"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("omega_star = 3.29"));
    assert!(text.contains("omega_star_closed_form = 3.29"));

    // rb87 never destabilizes, so there is no threshold to find
    let out = bin().args(["threshold", "--preset", "rb87"]).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("margin"));
}

#[test]
fn simulate_writes_into_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "run.cfg",
        "[params]\npreset = rb87\n\n[grid]\nn = 64\nlength = 50\n\n\
         [solver]\ndt = 0.01\nt_end = 2\n",
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .env("ATOMLASER_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("tau = 2.000"));
    assert!(dir.path().join("field.csv").exists());
    assert!(dir.path().join("diagnostics.csv").exists());
}

#[test]
fn out_flag_beats_the_env_variable() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let config = write_config(
        env_dir.path(),
        "run.cfg",
        "[params]\npreset = rb87\n\n[grid]\nn = 32\nlength = 50\n\n\
         [solver]\ndt = 0.01\nt_end = 1\n",
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .args(["--out", flag_dir.path().to_str().unwrap()])
        .env("ATOMLASER_OUT", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(flag_dir.path().join("field.csv").exists());
    assert!(!env_dir.path().join("field.csv").exists());
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.cfg",
        "[solver]\ndt = 0.01\ndt = 0.02\n",
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("duplicate"));

    let out = bin()
        .args(["simulate", "--config", "/no/such/file.cfg"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn physics_refusals_are_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    // pump far below threshold: nothing lases, the noisy init refuses
    let config = write_config(
        dir.path(),
        "cold.cfg",
        "[params]\npreset = rb87\nR = 1e19\n\n[grid]\nn = 32\nlength = 50\n\n\
         [solver]\ndt = 0.01\nt_end = 1\n",
    );
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .env("ATOMLASER_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no lasing state"));
}

#[test]
fn compare_oracle_prints_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "compare.cfg",
        "[params]\npreset = rb87\n\n[grid]\nn = 32\nlength = 2e-4\n\n\
         [coupled]\ndt = 5e-5\nt_end = 0.01\nrecord_every = 20\ninit = stationary\n",
    );
    let out = bin()
        .args(["compare-oracle", "--config", config.to_str().unwrap()])
        .env("ATOMLASER_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("rel_l2_density = "));
    assert!(text.contains("separation_ok = true"));
    let report = std::fs::read_to_string(dir.path().join("compare_report.txt")).unwrap();
    assert!(report.contains("rel_l2_density = "));
}

#[test]
fn sweep_writes_csv_and_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep.cfg",
        "[sweep]\npreset = li7\nmode = analytic\nomega_n = 5\nr_n = 3\n",
    );
    let out = bin()
        .args(["sweep", "--config", config.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("mode = analytic"));
    assert!(text.contains("cells = 5 x 3"));

    let csv = std::fs::read_to_string(dir.path().join("map.csv")).unwrap();
    let map = atomlaser::export::parse_map_csv(&csv).unwrap();
    assert_eq!((map.n_omega(), map.n_r()), (5, 3));
    assert_eq!(map.provenance.preset, "li7");

    let pgm = std::fs::read(dir.path().join("map.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n5 3\n255\n"));
}

#[test]
fn numerical_sweep_runs_cells_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let base_r = "1.61e20";
    let config = write_config(
        dir.path(),
        "sweep.cfg",
        &format!(
            "[sweep]\npreset = li7\nmode = numerical\nomega_lo = 0\nomega_hi = 0.7\n\
             omega_n = 2\nr_lo = {base_r}\nr_hi = {base_r}\nr_n = 1\n\
             horizon = 40\ngrid_n = 64\n"
        ),
    );
    let out = bin()
        .args(["sweep", "--config", config.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("mode = numerical"));
    assert!(text.contains("stable = 1, unstable = 1"));
}
