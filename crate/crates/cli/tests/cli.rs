use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(sub: &str, config: &str, out: &Path) -> Output {
    let cfg = out.with_extension("toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_relaxnsf"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn verdicts(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("verdicts.json")).unwrap()).unwrap()
}

const EQUILIBRIUM: &str = "[grid]\nn = 32\n[scheme]\nt_end = 0.2\n[init]\npreset = \"equilibrium\"\namplitude = 0.0\n[out]\ncadence = 0.1\n";

#[test]
fn equilibrium_simulation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = run("simulate", EQUILIBRIUM, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = verdicts(&out);
    assert_eq!(v["passed"], true);
    let csv = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    assert!(csv.starts_with("t,x,v,u,theta,q,S\n"));
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(&cols[2..], &[1.0, 0.0, 1.0, 0.0, 0.0]);
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate: PASS"));
}

#[test]
fn artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 32\n[scheme]\nt_end = 0.1\n[init]\npreset = \"thermal\"\namplitude = 0.01\n[out]\ncadence = 0.05\n";
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("simulate", cfg, &a).status.code(), Some(0));
    assert_eq!(run("simulate", cfg, &b).status.code(), Some(0));
    for name in ["snapshots.csv", "table.csv", "verdicts.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn bad_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("simulate", "[grid]\nn = \"many\"\n", &dir.path().join("bad"));
    assert_eq!(o.status.code(), Some(2));
    let o = run("relax-study", "[study]\ntau_list = []\n", &dir.path().join("empty"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_exits_with_code_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_relaxnsf"))
        .args(["simulate", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_abort_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 64\n[scheme]\ndt = 0.5\nt_end = 5.0\n[init]\npreset = \"acoustic\"\namplitude = 0.3\n";
    let o = run("simulate", cfg, &dir.path().join("abort"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn single_tau_is_insufficient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 32\n[init]\npreset = \"acoustic\"\namplitude = 0.001\n[study]\ntau_list = [0.01]\nt_compare = 0.05\n";
    let out = dir.path().join("one");
    let o = run("relax-study", cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    let v = verdicts(&out);
    assert_eq!(v["verdicts"][0]["status"], "insufficient-points");
}

#[test]
fn equilibrium_relax_study_passes_by_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 32\n[init]\npreset = \"equilibrium\"\namplitude = 0.0\n[study]\ntau_list = [0.01, 0.001, 0.0001]\nt_compare = 0.05\n";
    let out = dir.path().join("eq");
    let o = run("relax-study", cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for v in verdicts(&out)["verdicts"].as_array().unwrap() {
        assert_eq!(v["status"], "pass-by-zero");
    }
}

#[test]
fn bc_analyze_prints_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("bc-analyze", "[study]\nsamples = 5\n", &dir.path().join("bc"));
    assert_eq!(o.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2 * 2 * 5);
    for r in reports {
        for key in ["det", "kernel_min", "psi1", "psi2", "psi3"] {
            assert!(r[key].is_number(), "{key}");
        }
        assert_eq!(r["verdict"], true);
    }
}
