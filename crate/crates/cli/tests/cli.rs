use std::path::Path;
use std::process::{Command, Output};

const VPNS: &str = r#"
mode = "vpns"
[grid]
d = 2
n = 8
n_v = 16
V = 7.0
[physics]
sigma = 1.0
epsilon = 0.1
seed = 2
[time]
dt = 0.01
t_end = 0.03
[output.tolerances]
unaccounted_mass_rel = 1e-10
"#;

fn kinfluid(args: &[&str], env: Option<(&str, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kinfluid"));
    cmd.args(args);
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_then_diag_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "vpns.toml", VPNS);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let r = kinfluid(&["run", "--config", &cfg, "--out", o, "--check"], None);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["vpns.csv", "summary.json", "config.toml", "kinetic.snap", "fluid.snap", "limit.snap"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let r = kinfluid(&["diag", "--out", o], None);
    assert_eq!(r.status.code(), Some(0));
    let diag = std::fs::read_to_string(out.join("diag.csv")).unwrap();
    assert!(diag.starts_with("t,mass,free_energy,d1,"));
    assert_eq!(diag.lines().count(), 2);

    // an unmeetable tolerance is a check failure
    let r = kinfluid(&["run", "--config", &cfg, "--out", o, "--check", "--override", "output.tolerances.unaccounted_mass_rel=-1"], None);
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("unaccounted_mass_rel"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "vpns.toml", VPNS);
    let o = dir.path().join("out");
    let o = o.to_str().unwrap();
    let r = kinfluid(&["run", "--config", &cfg, "--out", o, "--override", "grid.n=7"], None);
    assert_eq!(r.status.code(), Some(2));
    let r = kinfluid(&["run", "--config", "/nonexistent/x.toml", "--out", o], None);
    assert_eq!(r.status.code(), Some(2));
    let r = kinfluid(&["run", "--config", &cfg, "--out", o], Some(("EPNS_THREADS", "zero")));
    assert_eq!(r.status.code(), Some(2));
    // a sweep needs an epsilon list
    let r = kinfluid(&["sweep", "--config", &cfg, "--out", o], None);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn oversized_velocity_steps_abort_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let text = VPNS
        .replace("V = 7.0", "V = 12.0")
        .replace("seed = 2", "seed = 2\nbackground_velocity = [3.0, 3.0]")
        .replace("dt = 0.01", "dt = 3.0")
        .replace("t_end = 0.03", "t_end = 3.0");
    let cfg = write_config(dir.path(), "big.toml", &text);
    let o = dir.path().join("out");
    let r = kinfluid(&["run", "--config", &cfg, "--out", o.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn sweep_and_refit_agree() {
    let dir = tempfile::tempdir().unwrap();
    let text = VPNS.replace("epsilon = 0.1", "epsilon_list = [0.2, 0.1, 0.05]").replace("[output.tolerances]\nunaccounted_mass_rel = 1e-10\n", "");
    let cfg = write_config(dir.path(), "sweep.toml", &text);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let r = kinfluid(&["sweep", "--config", &cfg, "--out", o], Some(("EPNS_THREADS", "2")));
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let before = std::fs::read_to_string(out.join("summary.json")).unwrap();
    let r = kinfluid(&["fit", "--out", o], None);
    assert_eq!(r.status.code(), Some(0));
    let after = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert_eq!(before, after);
    assert!(String::from_utf8_lossy(&r.stdout).contains("sup_modulated: slope"));
}

#[test]
fn limit_mode_writes_the_energy_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "epns.toml", &VPNS.replace("mode = \"vpns\"", "mode = \"epns\""));
    let out = dir.path().join("out");
    let r = kinfluid(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("epns.csv")).unwrap();
    assert!(csv.starts_with("t,mass,kinetic,coulomb,fluid,entropy,"));
    assert_eq!(csv.lines().count(), 5);
}
