use std::io::Write;
use std::process::{Command, Output};

fn apq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apq")).args(args).output().expect("run apq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const A2: [&str; 6] = ["--p1", "1", "--p2", "-1", "--q", "2"];

fn with_model<'a>(cmd: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&A2);
    v.extend_from_slice(rest);
    v
}

#[test]
fn eval_golden() {
    let o = apq(&with_model("eval", &["--x1", "0.75", "--x2", "1.5"]));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"value":0.5,"region":"III","v":0.5}"#);
}

#[test]
fn constants_golden() {
    let o = apq(&with_model("constants", &[]));
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let s = 2f64.sqrt();
    assert!((v["gamma_minus"].as_f64().unwrap() - (2.0 - s)).abs() < 1e-15);
    assert!((v["gamma_plus"].as_f64().unwrap() - (2.0 + s)).abs() < 1e-15);
    assert!((v["nu"].as_f64().unwrap() - 1.0 / s).abs() < 1e-15);
    assert!(stdout(&o).contains(r#""gamma_plus":3.4142135623730949"#));
}

#[test]
fn logarithmic_class_eval() {
    let x2 = (0.5f64.ln() / 2.0).to_string();
    let o = apq(&["eval", "--p1", "1", "--p2", "0", "--q", "2", "--x1", "0.75", "--x2", &x2]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn outside_point_is_a_domain_error() {
    let o = apq(&with_model("eval", &["--x1", "5", "--x2", "5"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["kind"], "outside_domain");
}

#[test]
fn bad_parameters_are_domain_errors() {
    let o = apq(&["constants", "--p1", "1", "--p2", "-1", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = apq(&["constants", "--p1", "2", "--p2", "0", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(apq(&["eval", "--p1", "1"]).status.code(), Some(1));
    assert_eq!(apq(&["no-such-command"]).status.code(), Some(1));
    let help = apq(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("verify-concavity"));
}

#[test]
fn reverse_holder_output() {
    let o = apq(&["rh", "--q", "2", "--alpha", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], true);
    assert!(v["constant"].as_f64().unwrap() > 1.0);
    let o = apq(&["rh", "--q", "2", "--alpha", "0.5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], false);
    assert!(v["constant"].is_null());
}

#[test]
fn output_is_deterministic() {
    let args = with_model("verify-majorization", &["--weights", "50"]);
    let a = apq(&args);
    let b = apq(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let args = with_model("scan", &["--grid", "24"]);
    assert_eq!(apq(&args).stdout, apq(&args).stdout);
}

#[test]
fn scan_rows_are_in_domain_and_in_range() {
    let o = apq(&with_model("scan", &["--grid", "16"]));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,region,B"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (x1, x2, b): (f64, f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[3].parse().unwrap());
        let r = x1.ln() + x2.ln();
        assert!(r >= -1e-12 && r <= 2f64.ln() + 1e-12, "{line}");
        assert!((0.0..=1.0).contains(&b), "{line}");
        rows += 1;
    }
    assert!(rows > 20);
}

#[test]
fn verify_commands_pass() {
    let o = apq(&with_model("verify-concavity", &["--n-interior", "40", "--n-boundary", "20"]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = apq(&with_model("verify-oracle", &["--x1", "0.75", "--x2", "1.5"]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn extremal_weight_round_trips_through_norm() {
    let o = apq(&with_model("extremal", &["--x1", "0.75", "--x2", "1.5"]));
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["attainment"]["pass"], true);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "{}", v["weight"]).unwrap();
    let path = file.path().to_str().unwrap().to_owned();
    let o = apq(&with_model("norm", &["--weight", &path]));
    assert_eq!(o.status.code(), Some(0));
    let n: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(n["in_class"], true);
    assert!((n["apq_norm"].as_f64().unwrap() - 1.125).abs() < 1e-9);
}

#[test]
fn malformed_weight_is_rejected() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, r#"{{"pieces":[{{"kind":"const","value":1,"lo":0,"hi":0.5}}]}}"#).unwrap();
    let path = file.path().to_str().unwrap().to_owned();
    let o = apq(&with_model("norm", &["--weight", &path]));
    assert_eq!(o.status.code(), Some(2));
}
