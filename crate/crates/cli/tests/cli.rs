use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use logflatten::flatten::{flatten, FlattenOptions, FlatteningCertificate};
use logflatten::homs::{is_integral, MonoidHom};
use logflatten::ideals::MonoidIdeal;
use logflatten::json::{canonical_json, Artifact};
use logflatten::lattice::{IntMatrix, IntVector};
use logflatten::monoids::FineMonoid;
use logflatten::polyhedra::Cone;
use logflatten_cli::{digest, Report, Status, EXIT_INVALID};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logflatten"))
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Scratch {
        let d = std::env::temp_dir().join(format!("logflatten-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        Scratch(d)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str], input: &Path) -> Output {
    bin().args(args).arg("-i").arg(input).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn worked() -> MonoidHom {
    let n2 = FineMonoid::natural(2);
    MonoidHom::new(n2.clone(), n2, IntMatrix::from_i64_rows(&[&[1, 1], &[0, 1]])).unwrap()
}

#[test]
fn check_integral_reports_counterexample() {
    let s = Scratch::new("check");
    let sum = MonoidHom::new(FineMonoid::natural(2), FineMonoid::natural(1), IntMatrix::from_i64_rows(&[&[1, 1]])).unwrap();
    let text = canonical_json(&sum);
    let out = run(&["check", "--integral"], &s.write("sum.json", &text));
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "failed");
    assert_eq!(r["verdicts"]["integral"]["status"], "NotIntegral");
    assert!(r["verdicts"]["integral"]["counterexample"].is_object());
    assert_eq!(r["input_digest"], digest(text.as_bytes()));
    // golden: the same verdict as the library
    assert_eq!(r["verdicts"]["integral"], is_integral(&sum).unwrap().to_json());
}

#[test]
fn flatten_worked_example() {
    let s = Scratch::new("flatten");
    let input = s.write("h.json", &canonical_json(&worked()));
    let out = run(&["flatten"], &input);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["verdicts"]["overall"], "Verified");
    let cert = FlatteningCertificate::from_json(&r["artifacts"]["certificate"]).unwrap();
    assert_eq!(cert.ideal, MonoidIdeal::maximal(&FineMonoid::natural(2)));
    assert_eq!(cert, flatten(&worked(), &FlattenOptions::default()).unwrap());

    // the certificate passes `verify`, and a tampered one does not
    let cert_path = s.write("cert.json", &canonical_json(&cert));
    let v = run(&["verify"], &cert_path);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(report(&v)["verdicts"]["valid"], true);
    let mut bad = cert.to_json();
    bad["overall"] = Value::from("Failed");
    let v = run(&["verify"], &s.write("bad.json", &bad.to_string()));
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn saturate_numerical_semigroup() {
    let s = Scratch::new("saturate");
    let m = FineMonoid::from_i64(1, &[&[2], &[3]]);
    let out = run(&["saturate"], &s.write("m.json", &canonical_json(&m)));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let sat = FineMonoid::from_json(&r["artifacts"]["monoid"]).unwrap();
    assert!(sat.same_set(&FineMonoid::natural(1)));
    assert_eq!(r["verdicts"]["was_saturated"], false);
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let s = Scratch::new("determinism");
    let input = s.write("h.json", &canonical_json(&worked()));
    let a = run(&["flatten", "--no-fast-exit"], &input);
    let b = run(&["flatten", "--no-fast-exit"], &input);
    assert_eq!(a.stdout, b.stdout);
    let r = Report::from_json(&report(&a)).unwrap();
    assert_eq!(r.status, Status::Ok);
    assert_eq!(r.timings, None);
    assert_eq!(logflatten_cli::render(&r, logflatten_cli::Format::Json).unwrap().as_bytes(), a.stdout.as_slice());

    let t = report(&run(&["flatten", "--timings"], &input));
    assert!(t["timings"]["total_ms"].is_number());
}

#[test]
fn blowup_and_svg() {
    let s = Scratch::new("svg");
    let ideal = s.write("k.json", &canonical_json(&MonoidIdeal::maximal(&FineMonoid::natural(2))));
    let out = run(&["blowup", "--format", "svg"], &ideal);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("class=\"wall\"").count(), 1);

    let r = report(&run(&["blowup"], &ideal));
    assert_eq!(r["verdicts"]["invertible"], true);
    assert_eq!(r["artifacts"]["blowup"]["charts"].as_array().unwrap().len(), 2);

    let text = run(&["blowup", "--format", "text"], &ideal);
    assert!(String::from_utf8(text.stdout).unwrap().starts_with("logflatten blowup [ok]"));
}

#[test]
fn subdivide_and_resolve() {
    let s = Scratch::new("subdivide");
    let quadrant = s.write("c.json", &canonical_json(&Cone::orthant(2)));
    let r = report(&run(&["subdivide", "--at", "1,1"], &quadrant));
    assert_eq!(r["artifacts"]["fan"]["rays"].as_array().unwrap().len(), 3);

    let monoid = s.write("p.json", &canonical_json(&FineMonoid::natural(2)));
    let out = bin()
        .args(["subdivide", "--at", "1,1", "--monoid"])
        .arg(&monoid)
        .arg("-i")
        .arg(&quadrant)
        .output()
        .unwrap();
    let r = report(&out);
    let k = MonoidIdeal::from_json(&r["artifacts"]["ideal"]).unwrap();
    assert_eq!(k.generators(), [IntVector::from_i64(&[0, 1]), IntVector::from_i64(&[1, 0])]);

    let cone = s.write("k3.json", &canonical_json(&Cone::from_i64(2, &[&[1, 0], &[1, 3]])));
    let r = report(&run(&["resolve-fan"], &cone));
    assert_eq!(r["verdicts"]["smooth"], true);
    assert_eq!(r["artifacts"]["centres"].as_array().unwrap().len(), 2);
}

#[test]
fn invalid_input_exits_three() {
    let s = Scratch::new("invalid");
    let out = run(&["saturate"], &s.write("bad.json", "{\"rank\": 2, \"generators\": [[1, 0]"));
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    let out = run(&["flatten"], &s.write("wrong.json", "{\"rank\": 2}"));
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    let out = bin().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
}

#[test]
fn hidden_pool_command() {
    let out = bin().args(["pool", "--kind", "ideals", "--size", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["artifacts"]["pool"].as_array().unwrap().len() >= 10);
}
