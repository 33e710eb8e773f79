use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use canard::psi::PsiTable;
use tempfile::TempDir;

const TOY: &str = r#"{"p": 3, "L": 0, "t0": 2, "t1": 1, "S": [], "P": [{"a": 0, "b": 0, "coeff": 1}]}"#;
const P_EQUALS_T: &str = r#"{"p": 3, "L": 0, "t0": 2, "t1": 1, "S": [], "P": [{"a": 1, "b": 0, "coeff": 1}]}"#;
const LINEAR: &str = r#"{"p": 3, "L": 0, "t0": 2, "t1": 1, "S": [],
    "P": [{"a": 0, "b": 0, "coeff": 1}, {"a": 1, "b": 1, "coeff": 1}]}"#;
const FORCED: &str = r#"{"p": 3, "L": 2, "t0": 2, "t1": 1, "S": [{"i": 3, "j": 1, "coeff": 1}],
    "P": [{"a": 0, "b": 0, "coeff": 1}, {"a": 1, "b": 1, "coeff": "1/2"}]}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn canard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(args)
        .env_remove("CANARD_MAX_ORDER")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn columns(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn expand_toy_has_only_a0() {
    let ws = Workspace::new();
    let problem = ws.file("toy.json", TOY);
    let out = ws.path("toy_exp.json");
    let o = canard(&["expand", "--problem", &problem, "--order", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let orders = doc["orders"].as_array().unwrap();
    assert_eq!(orders.len(), 1);
    assert_eq!(orders[0]["n"], 0);
    assert_eq!(orders[0]["a_n"]["symbolic"], "-1");
    assert_eq!(orders[0]["a_n"]["float"], -1.0);
    assert!(orders[0]["slow"].as_array().unwrap().is_empty());
    assert!(orders[0]["fast"].as_array().unwrap().is_empty());
    assert_eq!(doc["order"], 4);
    assert_eq!(doc["problem_hash"].as_str().unwrap().len(), 64);
    assert!(String::from_utf8_lossy(&o.stdout).contains("order  0"));
}

#[test]
fn expand_p_equals_t_gives_one_fast_record() {
    let ws = Workspace::new();
    let problem = ws.file("pt.json", P_EQUALS_T);
    let out = ws.path("pt_exp.json");
    let o = canard(&["expand", "--problem", &problem, "--order", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let orders = doc["orders"].as_array().unwrap();
    assert_eq!(orders.len(), 1);
    assert_eq!(orders[0]["n"], 1);
    assert!(orders[0].get("a_n").is_none());
    assert!(orders[0]["slow"].as_array().unwrap().is_empty());
    let fast = orders[0]["fast"].as_array().unwrap();
    assert_eq!(fast.len(), 1);
    assert_eq!((fast[0]["i"].as_u64(), fast[0]["k"].as_u64()), (Some(0), Some(1)));
}

#[test]
fn zero_alpha_power_in_s_is_an_input_error() {
    let ws = Workspace::new();
    let bad = TOY.replace("\"S\": []", "\"S\": [{\"i\": 5, \"j\": 0, \"coeff\": 1}]");
    let problem = ws.file("bad.json", &bad);
    let out = ws.path("never.json");
    let o = canard(&["expand", "--problem", &problem, "--order", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("S(t, 0) = 0"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn input_errors_exit_2() {
    let ws = Workspace::new();
    let out = ws.path("x.json");
    let out = out.to_str().unwrap();
    let unknown = ws.file("unknown.json", &TOY.replace("\"t1\"", "\"t9\": 1, \"t1\""));
    let malformed = ws.file("malformed.json", "{\"p\": 3,");
    let even_p = ws.file("even.json", &TOY.replace("\"p\": 3", "\"p\": 4"));
    let valuation = ws.file(
        "val.json",
        &TOY.replace("\"S\": []", "\"S\": [{\"i\": 0, \"j\": 1, \"coeff\": 1}]"),
    );
    for problem in [&unknown, &malformed, &even_p, &valuation] {
        let o = canard(&["expand", "--problem", problem, "--order", "1", "--out", out]);
        assert_eq!(code(&o), 2, "{problem}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"));
    }
    let o = canard(&["expand", "--problem", "/nonexistent/p.json", "--order", "1", "--out", out]);
    assert_eq!(code(&o), 2);
    let toy = ws.file("toy.json", TOY);
    let o = canard(&["eval", "--problem", &toy, "--order", "1", "--eta", "0", "--out", out]);
    assert_eq!(code(&o), 2);
    let o = canard(&["eval", "--problem", &toy, "--order", "1", "--eta", "0.2", "--grid", "4", "--out", out]);
    assert_eq!(code(&o), 2);
    let o = canard(&["psi", "--p", "3", "--L", "0", "--k", "9", "--tmin", "0", "--tmax", "1", "--step", "0.5"]);
    assert_eq!(code(&o), 2);
    let o = canard(&["psi", "--p", "3", "--L", "1", "--k", "0", "--tmin", "0", "--tmax", "1", "--step", "0.5"]);
    assert_eq!(code(&o), 2);
    let o = canard(&["validate", "--problem", &toy, "--order", "1", "--etas", "0.4,0.3,0.2"]);
    assert_eq!(code(&o), 2);
    let o = canard(&["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn order_cap_from_environment() {
    let ws = Workspace::new();
    let toy = ws.file("toy.json", TOY);
    let out = ws.path("o.json");
    let o = Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(["expand", "--problem", &toy, "--order", "3", "--out", out.to_str().unwrap()])
        .env("CANARD_MAX_ORDER", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("CANARD_MAX_ORDER"));
}

#[test]
fn eval_toy_columns() {
    let ws = Workspace::new();
    let toy = ws.file("toy.json", TOY);
    let out = ws.path("toy.csv");
    let o = canard(&["eval", "--problem", &toy, "--order", "3", "--eta", "0.3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&out);
    assert_eq!(csv.lines().next().unwrap(), "t,T,alpha,u,residual");
    let rows = columns(&csv);
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert_eq!(r[2], -1.0);
        assert_eq!(r[3], 0.0);
        assert!(r[4].abs() < 1e-12);
        assert!((r[1] - r[0] / 0.3).abs() < 1e-12);
    }
}

#[test]
fn eval_p_equals_t_matches_psi() {
    let ws = Workspace::new();
    let problem = ws.file("pt.json", P_EQUALS_T);
    let out = ws.path("pt.csv");
    let o = canard(&["eval", "--problem", &problem, "--order", "2", "--eta", "0.2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = PsiTable::new(3, 0, 2).unwrap();
    for r in columns(&read(&out)) {
        let expect = 0.2 * table.psi_eval(1, r[0] / 0.2).unwrap();
        assert!((r[3] - expect).abs() <= 1e-9, "t = {}: {} vs {expect}", r[0], r[3]);
    }
}

#[test]
fn eval_small_grid_is_symmetric() {
    let ws = Workspace::new();
    let problem = ws.file("forced.json", FORCED);
    let out = ws.path("g.csv");
    let o = canard(&[
        "eval", "--problem", &problem, "--order", "2", "--eta", "0.25", "--grid", "5", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&out);
    let rows = columns(&csv);
    assert_eq!(rows.len(), 5);
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ts, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    assert!(!csv.contains('\r'));
    let first = csv.lines().nth(1).unwrap();
    let digits = first.split(',').next().unwrap().split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(digits.len(), 17);
}

#[test]
fn outputs_are_deterministic_and_round_trip() {
    let ws = Workspace::new();
    let problem = ws.file("forced.json", FORCED);
    let (e1, e2) = (ws.path("e1.json"), ws.path("e2.json"));
    for e in [&e1, &e2] {
        let o = canard(&["expand", "--problem", &problem, "--order", "3", "--out", e.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(read(&e1), read(&e2));

    let (c1, c2, c3) = (ws.path("c1.csv"), ws.path("c2.csv"), ws.path("c3.csv"));
    for c in [&c1, &c2] {
        let o = canard(&["eval", "--problem", &problem, "--order", "3", "--eta", "0.2", "--out", c.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let o = canard(&[
        "eval", "--problem", &problem, "--order", "3", "--eta", "0.2", "--out", c3.to_str().unwrap(),
        "--expansion", e1.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(&c1), read(&c2));
    assert_eq!(read(&c1), read(&c3));

    let other = ws.file("toy.json", TOY);
    let o = canard(&[
        "eval", "--problem", &other, "--order", "3", "--eta", "0.2", "--out", c3.to_str().unwrap(),
        "--expansion", e1.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_toy_is_exact() {
    let ws = Workspace::new();
    let toy = ws.file("toy.json", TOY);
    let o = canard(&["validate", "--problem", &toy, "--order", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("pass-exact"), "{out}");
}

#[test]
fn validate_linear_problem() {
    let ws = Workspace::new();
    // u = 0, α = −1 solves P = 1 + t·U exactly, so the sweep is pass-exact
    let linear = ws.file("lin.json", LINEAR);
    let o = canard(&["validate", "--problem", &linear, "--order", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("pass-exact"));

    let forced = ws.file("forced.json", FORCED);
    let o = canard(&["validate", "--problem", &forced, "--order", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    let summary: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert!(summary["slope"].as_f64().unwrap() >= 2.7, "{summary}");
}

#[test]
fn validate_with_corrupted_table_fails() {
    let ws = Workspace::new();
    let problem = ws.file("lin.json", LINEAR);
    let o = canard(&["validate", "--problem", &problem, "--order", "2", "--fixture", "corrupt-c2"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("I_power_oracle"), "{}", stderr(&o));
}

#[test]
fn psi_identities_and_parity() {
    let run = |k: &str| {
        let o = canard(&["psi", "--p", "3", "--L", "2", "--k", k, "--tmin", "-3", "--tmax", "3", "--step", "0.25"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let csv = String::from_utf8(o.stdout).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "T,psi,psi_deriv");
        columns(&csv)
    };
    assert!(run("2").iter().all(|r| r[1] == 0.0));
    assert!(run("3").iter().all(|r| (r[1] + 0.25).abs() < 1e-15));
    for (k, sign) in [(0u32, -1.0), (1, 1.0)] {
        let rows = run(&k.to_string());
        assert_eq!(rows.len(), 25);
        for (a, b) in rows.iter().zip(rows.iter().rev()) {
            assert_eq!(a[0], -b[0]);
            assert!((a[1] - sign * b[1]).abs() <= 1e-14 * a[1].abs().max(1.0), "k = {k}");
        }
    }
}

#[test]
fn psi_writes_file() {
    let ws = Workspace::new();
    let out = ws.path("psi.csv");
    let o = canard(&[
        "psi", "--p", "5", "--L", "2", "--k", "1", "--tmin", "0", "--tmax", "1", "--step", "0.1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out).lines().count(), 12);
}

#[test]
fn selftest_passes_and_fixtures_fail() {
    let o = canard(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = canard(&["selftest", "--fixture", "parity-inverted"]);
    assert_eq!(code(&o), 1);
    let o = canard(&["selftest", "--fixture", "rho-off-by-one"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("psi_bar_tail_series"), "{}", stderr(&o));
}
