use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exciton-trap")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("exciton-cli-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const HEADER: &str = "kind,N,L,J,delta,gamma,gamma_trap,tau,speedup,engine,converged";

#[test]
fn simulate_writes_series() {
    let text = stdout(&run(&["simulate", "--kind", "chain", "--N", "4", "--L", "4", "--delta", "opt", "--points", "11"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,p_absorbed"));
    assert_eq!(lines.count(), 11);
}

#[test]
fn simulate_dumps_spectrum() {
    let path = scratch("spectrum.csv");
    let out = run(&["simulate", "--kind", "chain", "--N", "3", "--L", "2", "--gamma", "0.1", "--points", "2",
        "--spectrum", path.to_str().unwrap()]);
    stdout(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("k,re_lambda,im_lambda\n"));
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn sweeps_use_the_result_header() {
    for args in [
        vec!["sweep-delta", "--N", "3", "--L", "2", "--delta", "0:1:0.5"],
        vec!["sweep-gamma", "--kind", "chain", "--N", "3", "--L", "3", "--gamma", "0,0.1"],
        vec!["heatmap", "--N", "3,4", "--L", "2"],
    ] {
        let text = stdout(&run(&args));
        assert_eq!(text.lines().next(), Some(HEADER), "{args:?}");
        assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
    }
}

#[test]
fn sweep_delta_default_grid_has_81_points() {
    let text = stdout(&run(&["sweep-delta", "--kind", "chain", "--N", "3", "--L", "2"]));
    assert_eq!(text.lines().count(), 82);
}

#[test]
fn classical_mfpt_columns() {
    let text = stdout(&run(&["classical-mfpt", "--N", "4", "--L", "3", "--gamma", "2,20"]));
    assert_eq!(text.lines().next(), Some("gamma,tau_quantum,tau_closed_form,tau_inverse,tau_wtd"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn config_file_and_output_path() {
    let cfg = scratch("point.cfg");
    let out = scratch("point.csv");
    std::fs::write(&cfg, "kind = chain\nN = 4\nL = 4\ndelta = 1.7320508075688772\ngamma = 0.02\n").unwrap();
    stdout(&run(&["sweep-delta", "--config", cfg.to_str().unwrap(), "--delta", "0", "--out", out.to_str().unwrap()]));
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..7], ["chain", "4", "4", "1.0", "0.0", "0.02", "0.1"]);
}

#[test]
fn errors_exit_nonzero() {
    let out = run(&["simulate", "--kind", "chain", "--engine", "reduced"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("star"));
    assert_eq!(run(&["simulate", "--kind", "ring"]).status.code(), Some(2));
}
