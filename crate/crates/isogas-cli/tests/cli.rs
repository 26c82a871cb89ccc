use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isogas"))
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn riemann_writes_profile_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rp");
    let status = bin()
        .args(["riemann", "--ul", "6,1", "--ur", "1,-1", "--a", "2", "--qstar", "3"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let profile = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("x,rho,q\n"));
    assert!(profile.lines().count() > 100);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("flow,3"));
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let status = bin()
        .args(["riemann", "--ur", "1,-1", "--a", "2", "--qstar", "3", "--out", "/tmp/x"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(tmp.path().join("no_such.cfg"))
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_config_line_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "bad.cfg", "a = 2\nthis line has no equals\n");
    let status = bin()
        .args(["run", "--config", &cfg])
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn inadmissible_scenario_is_a_numerical_error() {
    let tmp = tempfile::tempdir().unwrap();
    // Subsonic upstream state: no valid buffer construction.
    let cfg = write_cfg(
        tmp.path(),
        "wf.cfg",
        "a = 1\nq_star = 2.2\nui = 3,0.5\nur = 8,0\nx_jump = -1\n",
    );
    let status = bin()
        .args(["wavefront", "--config", &cfg])
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn run_honors_set_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "run.cfg",
        "a = 2\nq_star = 3\nt_end = 1.0\nx_min = -1\nx_max = 1\ndx = 0.01\n\
         breaks = 0\nstates = 6,1 ; 1,-1\n",
    );
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", "--config", &cfg, "--set", "t_end=0.02"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let flow = fs::read_to_string(out.join("flow.csv")).unwrap();
    assert!(flow.starts_with("n,t,dt,Q\n"));
    // Shortened horizon: the full 1.0 run would take hundreds of steps.
    assert!(flow.lines().count() < 40);
}

#[test]
fn maximize_sweep_covers_the_requested_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "max.cfg",
        "a = 2\nul = 2,2\nur = 1,-1\nthresholds = 1, 3\ndx = 0.01\nt_avg = 0.05\n",
    );
    let out = tmp.path().join("out");
    let status = bin()
        .args(["maximize", "--family", "riemann", "--config", &cfg])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "q_star,t_avg,measured,analytic");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
    assert!(lines[2].starts_with("3,"));
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().contains("best_q_star"));
}

#[test]
fn unknown_family_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "max.cfg", "a = 2\nul = 2,2\nur = 1,-1\n");
    let status = bin()
        .args(["maximize", "--family", "cubic", "--config", &cfg])
        .arg("--out")
        .arg(tmp.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
