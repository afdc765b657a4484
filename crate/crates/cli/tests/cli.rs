use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mesoherald(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mesoherald"))
        .args(args)
        .current_dir(cwd)
        .env("MESOHERALD_THREADS", "2")
        .output()
        .unwrap()
}

const SMALL: &str = r#"
squeezing_db = 10.0
alpha_mag = 4.0
output = "run"

[[conditioning]]
m_range = [20, 24]

[wigner]
half_width = 7.0
points = 61
"#;

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("ok.toml"), SMALL).unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "squeezing_db = -3.0\nalpha_mag = 4.0\n\n[[conditioning]]\nm = 500\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("typo.toml"), "squeezing = 10.0\nalpha_mag = 4.0\n").unwrap();

    assert_eq!(mesoherald(&["validate", "ok.toml"], dir.path()).status.code(), Some(0));
    let bad = mesoherald(&["validate", "bad.toml"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("squeezing_db") && err.contains("500"), "{err}");
    assert_eq!(
        mesoherald(&["validate", "typo.toml"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(
        mesoherald(&["validate", "missing.toml"], dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn run_then_compare() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let first = mesoherald(&["run", "c.toml"], dir.path());
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert!(dir.path().join("run/manifest.json").is_file());
    let second = mesoherald(&["run", "c.toml", "--out", "again"], dir.path());
    assert_eq!(second.status.code(), Some(0));

    let cmp = mesoherald(&["compare", "run/manifest.json", "again"], dir.path());
    assert_eq!(cmp.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&cmp.stdout).contains("no differences"));
}

#[test]
fn numeric_flags_exit_with_two() {
    let dir = TempDir::new().unwrap();
    // ψ_60 holds ~29 photons; a ±7 grid misses most of its Wigner function
    let cfg = SMALL.replace("m_range = [20, 24]", "m = 60");
    std::fs::write(dir.path().join("tail.toml"), cfg).unwrap();
    let out = mesoherald(&["run", "tail.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("WignerNormalization"));
}

#[test]
fn preset_dump_and_unknown_name() {
    let dir = TempDir::new().unwrap();
    let dump = mesoherald(&["preset", "fig5", "--dump"], dir.path());
    assert_eq!(dump.status.code(), Some(0));
    let text = String::from_utf8_lossy(&dump.stdout);
    assert!(
        text.contains("efficiency = 0.9") && text.contains("posterior_mode = 25"),
        "{text}"
    );
    assert_eq!(mesoherald(&["preset", "fig9"], dir.path()).status.code(), Some(1));
}

#[test]
fn preset_writes_plot_recipe() {
    let dir = TempDir::new().unwrap();
    let out = mesoherald(&["preset", "fig3", "--out", "f3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recipe = std::fs::read_to_string(dir.path().join("f3/plot_recipe.txt")).unwrap();
    assert_eq!(recipe.lines().count(), 2);
    assert!(dir.path().join("f3/split_squeezed_phase0.0000/counts.csv").is_file());
}

#[test]
fn bad_thread_override_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mesoherald"))
        .args(["preset", "fig3", "--dump"])
        .env("MESOHERALD_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
