//! End-to-end checks of the command-line driver: flag/config/default
//! layering, output-path resolution, provenance headers, the documented exit
//! codes, and a file-level pipeline from tabulation through ingest to the
//! residual report.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_kicked-rotor");

/// Run the binary with a clean `KICKED_ROTOR_OUT` so ambient settings cannot
/// leak into the test.
fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("KICKED_ROTOR_OUT")
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn data_rows(table: &str) -> usize {
    table.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count()
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in [
        "resonance-scan",
        "peak-vs-noise",
        "scaling-collapse",
        "phase-portrait",
        "tabulate-scaling",
        "ingest-experiment",
        "compare",
    ] {
        assert!(text.contains(cmd), "help lacks {cmd}:\n{text}");
    }
}

#[test]
fn resonance_scan_writes_a_provenance_stamped_table() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("scan.tsv");
    let out = run(&[
        "resonance-scan",
        "--epsilons=-0.02, 0, 0.02",
        "--t",
        "5",
        "--n-traj",
        "400",
        "--noise",
        "0",
        "--seed",
        "9",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(&out_path);
    assert!(table.starts_with("# schema: sweep-table/1"), "{table}");
    assert!(table.contains("# spec.seed = 9"));
    assert_eq!(data_rows(&table), 3, "one row per detuning:\n{table}");
}

#[test]
fn flags_override_the_config_file_which_overrides_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("cfg.txt");
    fs::write(&cfg_path, "t = 7\nn_traj = 250\n").unwrap();
    let out_path = dir.path().join("layered.tsv");
    let out = run(&[
        "resonance-scan",
        "--config",
        cfg_path.to_str().unwrap(),
        "--t",
        "9",
        "--epsilons",
        "0.01",
        "--noise",
        "0",
        "--seed",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(&out_path);
    assert!(table.contains("# spec.t = 9"), "flag beats file:\n{table}");
    assert!(table.contains("# spec.n_traj = 250"), "file beats default:\n{table}");
}

#[test]
fn out_env_var_names_the_output_directory() {
    let dir = TempDir::new().unwrap();
    let out_base = dir.path().join("results");
    let out = Command::new(BIN)
        .args(["resonance-scan", "--epsilons", "0.01", "--t", "4", "--n-traj", "200", "--noise", "0", "--seed", "2"])
        .env("KICKED_ROTOR_OUT", &out_base)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(&out_base.join("resonance_scan.tsv"));
    assert_eq!(data_rows(&table), 1);
}

#[test]
fn configuration_problems_exit_with_code_2() {
    let out = run(&["resonance-scan", "--engine", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("unknown engine"), "{err}");

    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("bad.txt");
    fs::write(&cfg_path, "t = banana\n").unwrap();
    let out = run(&["resonance-scan", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("cannot parse"), "{err}");
}

#[test]
fn numerical_guards_exit_with_code_3() {
    // A kick this strong outruns even the largest momentum grid the adaptive
    // driver will try, so the boundary guard has to give up.
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("never_written.tsv");
    let out = run(&[
        "resonance-scan",
        "--engine",
        "quantum",
        "--k",
        "6000",
        "--t",
        "12",
        "--epsilons",
        "0",
        "--noise",
        "0",
        "--n-beta",
        "2",
        "--seed",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("grid overflow"), "{err}");
    assert!(!out_path.exists(), "no partial output on failure");
}

#[test]
fn tabulate_ingest_compare_pipeline_round_trips_through_files() {
    let dir = TempDir::new().unwrap();
    let table_path = dir.path().join("table.tsv");
    let out = run(&[
        "tabulate-scaling",
        "--ensemble",
        "300",
        "--x-min",
        "1",
        "--x-max",
        "4",
        "--points",
        "6",
        "--seed",
        "5",
        "--out",
        table_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(&table_path).contains("# schema = scaling-table/1"));

    // A measured record the way a lab would report it: total energies
    // including the initial thermal spread sigma_p^2/4.
    let record_path = dir.path().join("record.tsv");
    fs::write(
        &record_path,
        "# schema: experiment/1\n\
         # k = 2.8\n\
         # ell = 2\n\
         # t = 30\n\
         # sigma_p = 3\n\
         # columns: epsilon\tnoise_level\tenergy\tenergy_stderr\n\
         0.002\t0\t30.5\t1.2\n\
         0.005\t0\t24.0\t1.1\n\
         0.002\t1\t33.0\t1.3\n",
    )
    .unwrap();
    let scaled_path = dir.path().join("scaled.tsv");
    let out = run(&[
        "ingest-experiment",
        "--data",
        record_path.to_str().unwrap(),
        "--out",
        scaled_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let scaled = read(&scaled_path);
    assert!(scaled.contains("# schema: scaled-points/1"), "{scaled}");
    assert_eq!(data_rows(&scaled), 3);

    let resid_path = dir.path().join("residuals.tsv");
    let out = run(&[
        "compare",
        "--data",
        scaled_path.to_str().unwrap(),
        "--table",
        table_path.to_str().unwrap(),
        "--out",
        resid_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let resid = read(&resid_path);
    assert!(resid.contains("# schema: residual-report/1"), "{resid}");
    assert_eq!(data_rows(&resid), 3, "every point gets a residual row:\n{resid}");
}
