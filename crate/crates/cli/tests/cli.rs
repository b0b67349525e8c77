use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elldensity"))
        .args(args)
        .env_remove("ELLDENSITY_CACHE")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

/// Leaves of a JSON value as dotted paths, scalars rendered as strings and
/// arrays of scalars kept whole.
fn leaves(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                leaves(&key(k), x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                leaves(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

#[test]
fn lang_trotter_constant() {
    let v = json(&[
        "density",
        "cyclic",
        "--catalog",
        "lang-trotter-11",
        "--L",
        "100000",
    ]);
    assert_eq!(v["command"], "density");
    assert_eq!(v["result"]["correction"], "65996/65995");
    let digits = v["result"]["constant"]["digits"].as_str().unwrap();
    assert!(digits.starts_with("0.611597"), "{digits}");
    assert_eq!(v["inputs"]["truncation_L"], 100000);
    assert_eq!(v["inputs"]["entry_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn entanglement_vanishing() {
    let v = json(&[
        "density",
        "cyclic-ap",
        "--catalog",
        "curve-17",
        "--a",
        "2",
        "--f",
        "17",
    ]);
    assert_eq!(v["result"]["vanishing"], "entanglement");
    let c: f64 = v["result"]["constant"]["tail_high"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(c, 0.0);
    // (3|17) = -1: no obstruction.
    let v = json(&[
        "density",
        "cyclic-ap",
        "--catalog",
        "curve-17",
        "--a",
        "3",
        "--f",
        "17",
    ]);
    assert_eq!(v["result"]["vanishing"], "none");
}

#[test]
fn serre_curve_from_coefficients() {
    let closed = json(&[
        "density",
        "cyclic",
        "--curve",
        "0,0,1,-1,0",
        "--serre",
        "--L",
        "1000",
    ]);
    let generic = json(&[
        "density",
        "cyclic",
        "--curve",
        "0,0,1,-1,0",
        "--serre",
        "--L",
        "1000",
        "--generic",
    ]);
    assert_eq!(
        closed["result"]["correction"],
        generic["result"]["correction"]
    );
    assert_eq!(closed["result"]["path"], "serre_closed_form");
    assert_eq!(generic["result"]["path"], "generic");
}

#[test]
fn table_matches_json() {
    let args = [
        "density",
        "koblitz",
        "--catalog",
        "serre-37a",
        "--L",
        "5000",
    ];
    let v = json(&args);
    let mut want = Vec::new();
    leaves("", &v, &mut want);
    let mut with_table: Vec<&str> = args.to_vec();
    with_table.extend(["--format", "table"]);
    let out = run(&with_table);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let got: Vec<(String, String)> = text
        .lines()
        .map(|l| {
            let (k, rest) = l.split_once(' ').unwrap();
            (k.to_string(), rest.trim_start().to_string())
        })
        .collect();
    want.sort();
    let mut got = got;
    got.sort();
    assert_eq!(got, want);
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(&["density", "cyclic", "--catalog", "no-such-curve"]),
        2
    );
    assert_eq!(
        code(&[
            "density",
            "cyclic-ap",
            "--catalog",
            "curve-17",
            "--f",
            "0",
            "--a",
            "1"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "density",
            "cyclic",
            "--catalog",
            "curve-17",
            "--curve",
            "0,0,0,1,1"
        ]),
        2
    );
    assert_eq!(code(&["artin", "--g", "1"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let bad = bad.to_str().unwrap();
    assert_eq!(
        code(&["density", "cyclic", "--curve", "0,0,1,-1,0", "--spec", bad]),
        2
    );
    // Materializing the Lang-Trotter image needs far more than 1000 elements.
    assert_eq!(
        code(&["goursat", "--catalog", "lang-trotter-11", "--cap", "1000"]),
        3
    );
    assert_eq!(code(&["catalog", "list"]), 0);
}

#[test]
fn verify_is_reproducible() {
    let args = [
        "verify",
        "cyclic",
        "--catalog",
        "curve-17",
        "--x",
        "30000",
        "--threads",
        "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let census = &v["result"]["census"];
    assert_eq!(census["excluded"], serde_json::json!([2, 3, 17]));
    assert_eq!(v["inputs"]["seed"], 0);
    let dev = v["result"]["comparison"]["deviation"].as_f64().unwrap();
    assert!(dev.abs() < 0.05, "{dev}");
    let mut two = args.to_vec();
    two[7] = "2";
    let w = json(&two);
    assert_eq!(w["result"]["census"]["matching"], census["matching"]);
}

#[test]
fn verify_without_galois_data() {
    let v = json(&["verify", "cyclic", "--curve", "1,0,0,2,3", "--x", "5000"]);
    assert!(v["result"]["prediction_unavailable"].is_string());
    assert!(v["result"]["census"]["good_primes"].as_u64().unwrap() > 0);
}

#[test]
fn ap_census_respects_vanishing() {
    let v = json(&[
        "verify",
        "cyclic-ap",
        "--catalog",
        "curve-17",
        "--a",
        "2",
        "--f",
        "17",
        "--x",
        "100000",
    ]);
    assert_eq!(v["result"]["census"]["matching"], 0);
    assert_eq!(v["result"]["comparison"]["deviation"].as_f64(), Some(0.0));
}

#[test]
fn catalog_and_goursat() {
    let list = json(&["catalog", "list"]);
    let ids: Vec<&str> = list["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    for id in [
        "lang-trotter-11",
        "curve-4x4",
        "curve-17",
        "family6-example",
        "serre-37a",
    ] {
        assert!(ids.contains(&id), "{id}");
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("catalog.json");
    let v = json(&["catalog", "export", "--out", out.to_str().unwrap()]);
    assert_eq!(v["result"]["entries"], ids.len());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(serde_json::from_str::<Value>(&text).is_ok());
    let g = json(&["goursat", "--catalog", "family6-example"]);
    assert_eq!(g["result"]["abelian_entanglements"], false);
    assert_eq!(g["result"]["goursat"]["quotient_order"], 6);
    assert_eq!(g["result"]["goursat"]["reconstructs"], true);
    let g = json(&["goursat", "--catalog", "curve-17"]);
    assert_eq!(g["result"]["abelian_entanglements"], true);
    assert_eq!(g["result"]["normal_in_product"], true);
}

#[test]
fn artin_five() {
    let v = json(&["artin", "--g", "5", "--L", "10000", "--terms", "100000"]);
    assert_eq!(v["result"]["correction"], "20/19");
    assert_eq!(v["result"]["h"], 1);
}

#[test]
fn scientific_counts() {
    let a = json(&[
        "verify",
        "cyclic",
        "--catalog",
        "curve-17",
        "--x",
        "2e4",
        "--threads",
        "1",
    ]);
    let b = json(&[
        "verify",
        "cyclic",
        "--catalog",
        "curve-17",
        "--x",
        "20000",
        "--threads",
        "1",
    ]);
    assert_eq!(a["result"]["census"], b["result"]["census"]);
    assert_eq!(
        code(&["verify", "cyclic", "--catalog", "curve-17", "--x", "1e30"]),
        2
    );
}
