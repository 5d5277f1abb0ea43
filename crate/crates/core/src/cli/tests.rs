use super::*;
use std::f64::consts::PI;

fn config(text: &str, dir: &Path) -> RunConfig {
    let mut c = RunConfig::parse_text(text, None).unwrap();
    c.out = dir.to_path_buf();
    c
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constant_field_is_not_discrete() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("[spec]\nn = 2\nb = 1\n[run]\nstage = discreteness\n", dir.path());
    let o = run(&c).unwrap();
    let doc = read_json(&dir.path().join("discreteness.json"));
    assert_eq!(doc["result"]["discrete"], Value::Bool(false));
    assert_eq!(doc["config_hash"].as_str().unwrap(), o.config_hash);
}

#[test]
fn series_constant_for_k1() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("stage = constants\n[constants]\nk = 1\n", dir.path());
    run(&c).unwrap();
    let doc = read_json(&dir.path().join("constants.json"));
    let v = doc["result"][0]["value"].as_f64().unwrap();
    assert!((v - PI * PI / 8.0).abs() < 1e-10);
    assert!(doc["result"][0]["operation"].as_str().is_some());
}

#[test]
fn same_config_gives_identical_artifacts() {
    let text = "[spec]\nn = 2\nb = x1^2 - x2\n[run]\nstage = classify\nsamples = 20000\nseed = 7\nmc_lambdas = 1000:100000:5\n";
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o1 = run(&config(text, d1.path())).unwrap();
    let o2 = run(&config(text, d2.path())).unwrap();
    assert_eq!(o1.config_hash, o2.config_hash);
    assert_eq!(o1.artifacts.len(), 3);
    for (a, b) in o1.artifacts.iter().zip(&o2.artifacts) {
        let body = fs::read(a).unwrap();
        assert_eq!(body, fs::read(b).unwrap(), "{}", a.display());
        assert!(String::from_utf8(body).unwrap().contains(&o1.config_hash));
    }
}

#[test]
fn input_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("[spec]\nn = 2\nv = x1^^2\n[run]\nstage = algebra\n", dir.path());
    let e = run(&c).unwrap_err();
    assert_eq!(e.exit_code(), 1);
    let c = config("[spec]\nn = 2\nv = x1^2 + x2^2\n[run]\nstage = direct\ngrid = 10\n", dir.path());
    assert_eq!(run(&c).unwrap_err().code(), "invalid_input");
}

#[test]
fn obstructions_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    // the constant field has no discrete spectrum and no finite sublevel volume
    let c = config("[spec]\nn = 2\nb = 1\n[run]\nstage = direct\n", dir.path());
    let e = run(&c).unwrap_err();
    assert_eq!(e.exit_code(), 2, "{e}");
    let doc = read_json(&dir.path().join("error.json"));
    assert_eq!(doc["result"]["code"].as_str().unwrap(), e.code());
}

#[test]
fn weyl_direct_stage_writes_counts() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("[spec]\nn = 2\nv = x1^2 + x2^2\n[run]\nstage = direct\nlambdas = 9:36:3\n", dir.path());
    run(&c).unwrap();
    let csv = fs::read_to_string(dir.path().join("direct.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    // λ = 9 lies between levels, below it the levels 2, 4, 4, 6, 6, 6, 8, 8, 8, 8
    let first = csv.lines().find(|l| l.starts_with("9")).unwrap();
    assert_eq!(first.split(',').nth(1).unwrap(), "10");
}
