use std::path::Path;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;
use trilie::canonical::scramble;
use trilie::catalog::table_entries;
use trilie::document::AlgebraDocument;
use trilie::family::FieldFlag;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn trilie(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_trilie")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write(dir: &Path, name: &str, doc: &AlgebraDocument) -> String {
    let p = dir.join(name);
    std::fs::write(&p, doc.to_json()).unwrap();
    p.to_string_lossy().into_owned()
}

fn table_doc(f: usize, name: &str) -> AlgebraDocument {
    let e = table_entries(4, f, FieldFlag::Real).unwrap().into_iter().find(|e| e.name == name).unwrap();
    AlgebraDocument::from_family(&e.family, Some(&e.name))
}

#[test]
fn construct() {
    let r = trilie(&["construct", "4", "--format", "json"]);
    assert_eq!(r.code, 0);
    let doc = AlgebraDocument::parse(&r.stdout).unwrap();
    let s = doc.structure.unwrap();
    assert_eq!((s.basis.len(), s.brackets.len()), (6, 4));
    let r = trilie(&["construct", "5"]);
    assert!(r.stdout.starts_with("T(5): dim 10"));
    assert_eq!(trilie(&["construct", "2"]).code, 2);
}

#[test]
fn classify_listing_and_emit() {
    let dir = TempDir::new().unwrap();
    let r = trilie(&["classify", "4", "1", "--field", "R", "--emit", dir.path().to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("L(4,1) over R: 13 families"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 13);
    let r13 = std::fs::read_to_string(dir.path().join("R_1_13.json")).unwrap();
    assert_eq!(AlgebraDocument::parse(&r13).unwrap().provenance.as_deref(), Some("R_{1,13}"));

    let r = trilie(&["classify", "4", "1", "--field", "C"]);
    assert!(r.stdout.starts_with("L(4,1) over C: 12 families"));
    assert!(trilie(&["classify", "4", "2"]).stdout.starts_with("L(4,2) over R: 10 families"));
    assert!(trilie(&["classify", "4", "3"]).stdout.starts_with("L(4,3) over R: 1 family"));
    let r = trilie(&["classify", "6", "5"]);
    assert!(r.stdout.starts_with("L(6,5) over R: 1 family"), "{}", r.stdout);

    let r = trilie(&["classify", "5", "2"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("general slot form"));
    assert_eq!(trilie(&["classify", "4", "4"]).code, 2);
}

#[test]
fn verify_statuses() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "k31.json", &table_doc(3, "K_{3,1}"));
    let r = trilie(&["verify", &good]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    for check in ["jacobi", "commutativity", "nilindependence", "sigma-support", "nilradical-bound"] {
        assert!(r.stdout.contains(&format!("PASS {check}")), "{check}");
    }

    let mut t4 = AlgebraDocument::from_tn(4).unwrap();
    t4.structure.as_mut().unwrap().brackets[0].3 = "-1".into();
    let bad = write(dir.path(), "bad.json", &t4);
    let r = trilie(&["verify", &bad]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("FAIL jacobi") && r.stdout.contains("(N12, N23, N34)"), "{}", r.stdout);

    let mut fam = table_doc(1, "K_{1,4}");
    fam.matrices[0].push(([1, 2], [2, 3], "1".into()));
    let r = trilie(&["verify", &write(dir.path(), "tamper.json", &fam)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("FAIL jacobi"));

    let over: AlgebraDocument =
        AlgebraDocument::parse(r#"{"version":"1","n":3,"f":3,"field":"R","matrices":[[],[],[]]}"#).unwrap();
    let r = trilie(&["verify", &write(dir.path(), "over.json", &over)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("at most n-1 nonnilpotent elements"));

    std::fs::write(dir.path().join("broken.json"), "{\"version\": \"1\",\n \"n\": }").unwrap();
    let r = trilie(&["verify", dir.path().join("broken.json").to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}

#[test]
fn reduce_documents() {
    let dir = TempDir::new().unwrap();
    let r113 = write(dir.path(), "r113.json", &table_doc(1, "R_{1,13}"));
    let r = trilie(&["reduce", &r113, "--field", "C", "--format", "json"]);
    assert_eq!(r.code, 0);
    let out = AlgebraDocument::parse(&r.stdout).unwrap();
    assert_eq!(out.provenance.as_deref(), Some("K_{1,12}"));
    let r = trilie(&["reduce", &r113, "--field", "R", "--format", "json"]);
    assert_eq!(AlgebraDocument::parse(&r.stdout).unwrap().provenance.as_deref(), Some("R_{1,13}"));

    let k13 = table_doc(1, "K_{1,3}");
    let r = trilie(&["reduce", &write(dir.path(), "k13.json", &k13), "--format", "json"]);
    let out = AlgebraDocument::parse(&r.stdout).unwrap();
    assert_eq!(out.matrices, k13.matrices);
    assert_eq!(out.transform_log, Some(vec![]));

    let e = table_entries(4, 2, FieldFlag::Real).unwrap().into_iter().find(|e| e.name == "K_{2,4}").unwrap();
    let disguised = scramble(&e.family, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    let path = write(dir.path(), "k24x.json", &AlgebraDocument::from_family(&disguised, None));
    let r = trilie(&["reduce", &path]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("shift X1: mu_"));
    assert!(r.stdout.contains("identified: K_{2,4}"), "{}", r.stdout);

    let mut bad = table_doc(1, "K_{1,4}");
    bad.matrices[0].push(([1, 2], [2, 3], "1".into()));
    assert_eq!(trilie(&["reduce", &write(dir.path(), "bad.json", &bad)]).code, 1);
}

#[test]
fn invariants_reports() {
    let dir = TempDir::new().unwrap();
    let t6 = write(dir.path(), "t6.json", &AlgebraDocument::from_tn(6).unwrap());
    let r = trilie(&["invariants", &t6, "--format", "json"]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["nilradical_central_series"], serde_json::json!([15, 10, 6, 3, 1, 0]));

    let k31 = write(dir.path(), "k31.json", &table_doc(3, "K_{3,1}"));
    let r = trilie(&["invariants", &k31]);
    assert!(r.stdout.contains("dim: 9") && r.stdout.contains("6 >= 9/2 holds"), "{}", r.stdout);

    let abelian = r#"{"version":"1","n":0,"f":0,"field":"R",
        "structure":{"basis":["e1","e2","e3"],"brackets":[]}}"#;
    std::fs::write(dir.path().join("ab.json"), abelian).unwrap();
    let r = trilie(&["invariants", dir.path().join("ab.json").to_str().unwrap(), "--format", "json"]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["derived_series"], serde_json::json!([3, 0]));
}

#[test]
fn solve_jacobi_dump() {
    let r = trilie(&["solve-jacobi", "4"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("nullspace dimension: 11"));
    assert!(r.stdout.contains("-A_{12,13} - A_{34,24} = 0"));
    let r = trilie(&["solve-jacobi", "5", "--format", "json"]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["nullspace_dim"], 17);
}
