//! End-to-end checks of the installed binary surface: subcommands, exit
//! codes, and the shape of what lands on disk.

use std::path::Path;
use std::process::{Command, Output};

fn quench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench"))
        .args(args)
        .output()
        .expect("binary should launch")
}

#[test]
fn presets_lists_all_known_names() {
    let out = quench(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1", "fig2", "fig3", "fig4", "fig4c", "fig5"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "missing {name}");
    }
}

#[test]
fn validate_echoes_resolved_config() {
    let out = quench(&["validate", "--preset", "fig2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("g_a = 2.50000000000e1"));
    assert!(text.contains("n_tot = 60"));
}

#[test]
fn validate_rejects_bad_override_with_exit_2() {
    let out = quench(&["validate", "--preset", "fig2", "--override", "dt=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let text = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(text.contains("dt"));
}

#[test]
fn unknown_preset_fails() {
    let out = quench(&["validate", "--preset", "fig99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_manifest_and_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = quench(&[
        "run",
        "--preset",
        "fig4c",
        "--out",
        dir.path().to_str().unwrap(),
        "--override",
        "n_tot=8",
        "--override",
        "g_ab_range=0:25:2",
        "--override",
        "obs_times=4",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("manifest.txt").is_file());
    let mut point_dirs: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            p.is_dir().then_some(p)
        })
        .collect();
    point_dirs.sort();
    assert_eq!(point_dirs.len(), 2);
    for p in &point_dirs {
        assert!(p.join("manifest.txt").is_file(), "missing manifest in {p:?}");
        assert!(p.join("le.txt").is_file(), "missing le in {p:?}");
    }
}

#[test]
fn oracle_regenerate_reproduces_checked_in_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.txt");
    let out = quench(&["oracle", "regenerate", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let fresh = std::fs::read_to_string(&path).unwrap();
    let frozen =
        std::fs::read_to_string(Path::new("../../fixtures/two_boson_energies.txt")).unwrap();
    assert_eq!(fresh, frozen);
}
