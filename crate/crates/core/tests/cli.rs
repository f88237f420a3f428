use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn rc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rc")).args(args).env_remove("RC_PRECISION").output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = rc(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok_text(args: &[&str]) -> String {
    let out = rc(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("rc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_file(&p);
    p
}

fn without_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.contains("generated")).collect::<Vec<_>>().join("\n")
}

#[test]
fn envelope_fields() {
    let v = ok_json(&["sheffer", "coeffs", "--a", "1", "--b", "1", "--nmax", "3"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["tool"], "riordan-critline");
    assert!(v["generated"].as_str().unwrap().ends_with('Z'));
    assert_eq!(v["config"]["command"]["sheffer"]["coeffs"]["nmax"], 3);
    let h3 = &v["result"]["polynomials"][3]["coeffs"];
    assert_eq!(h3, &serde_json::json!(["0", "32", "-96", "64"]));
}

#[test]
fn sheffer_falling_basis() {
    let v = ok_json(&["sheffer", "coeffs", "--a", "1", "--b", "2", "--nmax", "10", "--basis", "falling"]);
    let rows = v["result"]["polynomials"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    // H_1 = 6x − 3 for (1, 2); (x)_1 = x
    assert_eq!(rows[1]["coeffs"], serde_json::json!(["-3", "6"]));
}

#[test]
fn riordan_production_is_integral() {
    let v = ok_json(&["riordan", "production", "--a", "1", "--b", "1", "--size", "5"]);
    assert_eq!(v["result"]["integral"], true);
    assert_eq!(v["result"]["stieltjes_holds"], true);
}

#[test]
fn combinat_examples() {
    let v = ok_json(&["combinat", "tree", "--a", "1", "--b", "1", "--depth", "5"]);
    assert_eq!(v["result"]["agree"], true);
    let v = ok_json(&["combinat", "paths", "--a", "1", "--b", "2", "--nmax", "12"]);
    assert_eq!(v["result"]["matches_falling_factorial"], true);
}

#[test]
fn curves_csv_columns() {
    let text = ok_text(&["analysis", "curves", "--z1", "1", "--z2", "3", "--samples", "400"]);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "t,re_zeta1,im_zeta1,re_zeta2,im_zeta2,re_phi,im_phi");
    assert_eq!(body.len(), 401);
    let first: Vec<f64> = body[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 0.0, 3.0, 0.0, 0.0, 0.0]);
}

#[test]
fn compare_saddle_example() {
    let v = ok_json(&["analysis", "compare", "--z1", "1", "--z2", "3", "--n", "200", "--t", "0.25", "--method", "saddle"]);
    let r = &v["result"];
    let re: f64 = r["squared_ratio"]["re"].as_str().unwrap().parse().unwrap();
    let im: f64 = r["squared_ratio"]["im"].as_str().unwrap().parse().unwrap();
    assert!((re - 1.0).hypot(im) < 0.05, "squared ratio {re} + {im}i");
    assert!(r["est_error"].as_str().unwrap().parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn zeros_verify_example() {
    let v = ok_json(&["zeros", "verify", "--z1", "1", "--z2", "3", "--n", "30", "--tol", "1e-8", "--precision", "256", "--format", "json"]);
    let r = &v["result"];
    assert_eq!(r["degree"], 30);
    assert_eq!(r["off_line"], 0);
    assert_eq!(r["on_line"], 28);
    assert_eq!(r["symmetric"], true);
    let v = ok_json(&["zeros", "count", "--z1", "1", "--z2", "3", "--n", "30"]);
    assert_eq!(v["result"]["count"], 14);
}

#[test]
fn threshold_sweep() {
    let v = ok_json(&["zeros", "verify", "--a", "1", "--b", "1", "--n", "1", "--nmax", "12"]);
    assert_eq!(v["result"]["n0"], 3);
}

#[test]
fn reruns_are_identical() {
    for args in [
        &["sheffer", "coeffs", "--z1", "1", "--z2", "3", "--nmax", "6"][..],
        &["sheffer", "coeffs", "--a", "1", "--b", "2", "--nmax", "6", "--format", "csv"][..],
        &["analysis", "curves", "--z1", "1", "--z2", "7", "--samples", "50", "--jobs", "2"][..],
        &["zeros", "verify", "--z1", "2", "--z2", "5", "--n", "12", "--format", "csv"][..],
    ] {
        let a = ok_text(args);
        let b = ok_text(args);
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{args:?}");
    }
}

#[test]
fn output_file_matches_stdout() {
    let path = scratch("out.json");
    let p = path.to_str().unwrap();
    let out = rc(&["sheffer", "coeffs", "--a", "2", "--b", "3", "--nmax", "4", "-o", p]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let file = std::fs::read_to_string(&path).unwrap();
    let direct = ok_text(&["sheffer", "coeffs", "--a", "2", "--b", "3", "--nmax", "4", "-o", p]);
    assert!(direct.is_empty());
    let again = ok_text(&["sheffer", "coeffs", "--a", "2", "--b", "3", "--nmax", "4"]);
    let file_cfg: Value = serde_json::from_str(&file).unwrap();
    let std_cfg: Value = serde_json::from_str(&again).unwrap();
    assert_eq!(file_cfg["result"], std_cfg["result"]);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn invalid_combinations_exit_2_without_output() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["sheffer", "coeffs", "--a", "1", "--b", "1", "--z1", "1", "--z2", "3", "--nmax", "3"],
        vec!["sheffer", "coeffs", "--a", "1", "--nmax", "3"],
        vec!["sheffer", "coeffs", "--z1", "3", "--z2", "1", "--nmax", "3"],
        vec!["analysis", "compare", "--z1", "1", "--z2", "3", "--n", "200", "--t", "0.25", "--method", "saddle", "--format", "csv"],
        vec!["zeros", "count", "--a", "1", "--b", "1", "--n", "10"],
        vec!["sheffer", "coeffs", "--a", "1", "--b", "1", "--nmax", "3", "--jobs", "0"],
        vec!["sheffer", "coeffs", "--a", "1", "--b", "1", "--nmax", "3", "--precision", "32"],
        vec!["analysis", "compare", "--z1", "1", "--z2", "3", "--n", "40", "--t", "0.5", "--method", "saddle"],
        vec!["sheffer", "coeffs", "--a", "x", "--b", "1", "--nmax", "3"],
    ];
    for (k, mut args) in cases.into_iter().enumerate() {
        let path = scratch(&format!("bad-{k}"));
        args.extend(["-o", path.to_str().unwrap()]);
        let out = rc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!path.exists(), "{args:?} left a file");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn non_convergence_exits_3_without_output() {
    let path = scratch("capped");
    let mut args: Vec<&str> =
        "analysis compare --z1 1 --z2 3 --n 100 --t 0.25 --method saddle --precision 64 --max-precision 64 --tol 1e-30".split(' ').collect();
    args.extend(["-o", path.to_str().unwrap()]);
    let out = rc(&args);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!path.exists());
}

#[test]
fn precision_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rc"));
        c.args(["zeros", "verify", "--z1", "1", "--z2", "3", "--n", "8"]).args(extra);
        match env {
            Some(v) => c.env("RC_PRECISION", v),
            None => c.env_remove("RC_PRECISION"),
        };
        c.output().unwrap()
    };
    let prec = |o: &Output| serde_json::from_slice::<Value>(&o.stdout).unwrap()["result"]["prec"].clone();
    assert_eq!(prec(&run(None, &[])), 256);
    assert_eq!(prec(&run(Some("160"), &[])), 160);
    // the flag wins over the variable
    assert_eq!(prec(&run(Some("160"), &["--precision", "200"])), 200);
    assert_eq!(run(Some("16"), &[]).status.code(), Some(2));
    assert_eq!(run(Some("lots"), &[]).status.code(), Some(2));
}
