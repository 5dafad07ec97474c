use std::path::Path;
use std::process::{Command, Output};

fn pelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn list_names_every_scenario() {
    let o = pelab(&["list"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    let want: Vec<&str> = pelab_cli::config::ALL.iter().map(|s| s.name()).collect();
    assert_eq!(names, want);
}

#[test]
fn defaults_print_key_value_lines() {
    let o = pelab(&["defaults", "pressure-solve"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("scenario = pressure-solve\n"));
    assert!(text.lines().all(|l| l.contains(" = ")));
    assert_eq!(code(&pelab(&["defaults", "nope"])), 2);
}

#[test]
fn passing_run_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = pelab(&["pressure-solve", "-q", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    for f in [
        "config.txt",
        "report.txt",
        "summary.txt",
        "pressure.fld",
        "pressure_regularity.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let field = pelab::io::read_sfield(&dir.path().join("pressure.fld")).unwrap();
    assert_eq!(field.grid.nx, 64);
}

#[test]
fn failed_rule_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = pelab(&[
        "pressure-solve",
        "--set",
        "tol_oracle=1e-30",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 1);
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("matches_closed_form"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&pelab(&["nope"])), 2);
    assert_eq!(code(&pelab(&["pressure-solve", "--set", "bogus=1"])), 2);
    assert_eq!(code(&pelab(&["pressure-solve", "--set", "nx=abc"])), 2);
    assert_eq!(
        code(&pelab(&[
            "pressure-solve",
            "--config",
            "/nonexistent/cfg.txt"
        ])),
        2
    );
}

#[test]
fn numerical_guard_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = pelab(&[
        "viscosity-sweep",
        "-q",
        "--set",
        "dt=1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8(o.stderr).unwrap().contains("stability"));
}

#[test]
fn config_file_and_overrides_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "scenario = pressure-solve\n# coarser\nnx = 32\nny = 32\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = pelab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "ny=48",
        "-q",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let written = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(
        written.contains("nx = 32\n") && written.contains("ny = 48\n"),
        "{written}"
    );
}
