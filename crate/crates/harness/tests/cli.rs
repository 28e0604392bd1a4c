use std::path::Path;
use std::process::{Command, Output};

fn deeponet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deeponet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in `{line}`"))
        .parse()
        .unwrap()
}

#[test]
fn advdiff_example() {
    let o = deeponet(&[
        "advdiff1d",
        "--a-const",
        "0",
        "--f-const",
        "1",
        "--L",
        "1",
        "--m",
        "64",
        "--x",
        "0.5",
    ]);
    assert!(o.status.success(), "{o:?}");
    let line = stdout(&o);
    assert!((field(&line, "exact") - 0.125).abs() <= 1e-12);
    assert!((field(&line, "discrete") - 0.125).abs() <= 0.02);
}

#[test]
fn reacdiff_example() {
    let o = deeponet(&["reacdiff2d", "--grid", "10", "--a3-const", "1", "--oracle", "dense"]);
    assert!(o.status.success(), "{o:?}");
    assert!(field(&stdout(&o), "oracle_gap") <= 1e-9);
}

#[test]
fn burgers_example() {
    let o = deeponet(&[
        "run",
        "burgers1d",
        "--kappa",
        "0.5",
        "--m",
        "64",
        "--t",
        "0.25",
        "--x",
        "0.5",
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(field(&stdout(&o), "error") <= 1e-2);
}

#[test]
fn exit_codes() {
    assert_eq!(deeponet(&["nonsense"]).status.code(), Some(2));
    assert_eq!(deeponet(&["advdiff1d", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(
        deeponet(&["sweep", "advdiff1d", "--axis", "q", "--values", "1,2,3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(deeponet(&["advdiff1d", "--m", "-3"]).status.code(), Some(3));
    assert_eq!(
        deeponet(&["sweep", "advdiff1d", "--axis", "m", "--values", "16,32"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        deeponet(&["sweep", "advdiff1d", "--axis", "m", "--values", "32,16,64"])
            .status
            .code(),
        Some(3)
    );
    // non-square m for the blessed audit
    assert_eq!(
        deeponet(&["sweep", "relu-audit", "--axis", "m", "--values", "16,20,36"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(deeponet(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exit_code() {
    // forcing of 1e308 overflows the path weights
    let o = deeponet(&["burgers-forced", "--force", "1e308", "--n-paths", "100"]);
    assert_eq!(o.status.code(), Some(4), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical failure"));
}

fn sweep_csv(dir: &Path, name: &str, threads: &str) -> String {
    let out = dir.join(name);
    let o = deeponet(&[
        "sweep",
        "burgers-forced",
        "--axis",
        "N_paths",
        "--values",
        "500,1000,2000",
        "--seed",
        "9",
        "--threads",
        threads,
        "--out",
        out.to_str().unwrap(),
        "--h-t",
        "0.05",
    ]);
    assert!(o.status.success(), "{o:?}");
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_csv(dir.path(), "a.csv", "1");
    let b = sweep_csv(dir.path(), "b.csv", "2");
    assert_eq!(a, b);
    assert!(a.starts_with("axis,value,error_linf,error_l2,runtime_ms,aux1,aux2\nN_paths,500,"));
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    std::fs::write(
        &cfg,
        "# advection-diffusion sanity\na_const = 0\nf_const = 1\nx = 0.25\n",
    )
    .unwrap();
    let o = deeponet(&["--config", cfg.to_str().unwrap(), "advdiff1d", "--x", "0.5"]);
    assert!(o.status.success(), "{o:?}");
    assert!((field(&stdout(&o), "exact") - 0.125).abs() <= 1e-12);
    let dump = dir.path().join("field.csv");
    let o = deeponet(&[
        "--config",
        cfg.to_str().unwrap(),
        "advdiff1d",
        "--out",
        dump.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "exact") - 0.09375).abs() <= 1e-12);
    assert!(std::fs::read_to_string(dump)
        .unwrap()
        .starts_with("x,discrete,exact\n0.0,"));
}

#[test]
fn sweep_writes_gnuplot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("br.csv");
    let o = deeponet(&[
        "sweep",
        "bochner-riesz",
        "--axis",
        "R",
        "--values",
        "4,8,16",
        "--gnuplot",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("bochner-riesz R-sweep: slope"));
    assert!(std::fs::read_to_string(dir.path().join("br.gp"))
        .unwrap()
        .contains("'br.csv'"));
}

#[test]
fn acceptance_subset() {
    let dir = tempfile::tempdir().unwrap();
    let o = deeponet(&[
        "acceptance",
        "--only",
        "4,9,11,12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    for id in ["[4a]", "[4b]", "[9]", "[11]", "[12]"] {
        assert!(
            s.lines().any(|l| l.starts_with("PASS") && l.contains(id)),
            "{id} in {s}"
        );
    }
    assert_eq!(deeponet(&["acceptance", "--only", "13"]).status.code(), Some(3));
}
