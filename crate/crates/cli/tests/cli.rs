use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn arrsheaf(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_arrsheaf"))
        .args(args)
        .env_remove("ARRSHEAF_THREADS")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn arrsheaf");
    let mut pipe = child.stdin.take().expect("stdin");
    pipe.write_all(stdin.unwrap_or("").as_bytes()).expect("write stdin");
    drop(pipe);
    child.wait_with_output().expect("run arrsheaf")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn catalog(name: &str, params: &[&str]) -> String {
    let mut args = vec!["catalog", name];
    args.extend_from_slice(params);
    let out = arrsheaf(&args, None);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn catalog_piped_into_report() {
    let text = catalog("braid", &["3"]);
    assert!(text.starts_with("name braid 3\nfield Q\ndim 3\n"));
    let out = arrsheaf(&["report", "-", "--window", "-4:4"], Some(&text));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["freeness"]["free"], true);
    assert_eq!(r["freeness"]["exponents"], serde_json::json!([1, 2, 3]));
    assert_eq!(r["settings"]["window"], serde_json::json!([-4, 4]));
    assert_eq!(r["settings"]["oracle"]["k_max"], 8);
    assert_eq!(r["consistency"], serde_json::json!([]));
}

#[test]
fn structure_sheaf_table_on_the_plane() {
    let dir = std::env::temp_dir().join(format!("arrsheaf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bool2.arr");
    std::fs::write(&path, catalog("boolean", &["2"])).unwrap();
    let out = arrsheaf(&["cohomology", "--functor", "O", "--window", "-6:6", path.to_str().unwrap()], None);
    assert!(out.status.success());
    let t = json(&out);
    for e in t["entries"].as_array().unwrap() {
        let (n, d, dim) = (e["n"].as_u64().unwrap(), e["d"].as_i64().unwrap(), e["dim"].as_i64().unwrap());
        let expected = match n {
            0 => (d + 1).max(0),
            _ => (-d - 1).max(0),
        };
        assert_eq!(dim, expected, "H^{n}_{d}");
    }
    assert_eq!(t["k_max"], 8);
    assert_eq!(t["cover"], "minimal");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn kunneth_on_generic() {
    let out = arrsheaf(&["verify-kunneth", "--catalog", "generic 3 4", "--window", "-3:3", "--kmax", "6"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["mismatches"], serde_json::json!([]));
    let h1: i64 = r["cells"].as_array().unwrap().iter().filter(|c| c["n"] == 1).map(|c| c["lhs"].as_i64().unwrap()).sum();
    assert_eq!(h1, 1);
}

#[test]
fn exit_codes() {
    assert_eq!(arrsheaf(&["lattice", "/nonexistent/file.arr"], None).status.code(), Some(1));
    assert_eq!(arrsheaf(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(arrsheaf(&["lattice", "-"], Some("field Q\ndim 2\nhyperplane 1 0\nhyperplane 2 0\n")).status.code(), Some(1));
    assert_eq!(arrsheaf(&["catalog", "braid"], None).status.code(), Some(1));
    assert_eq!(arrsheaf(&["cohomology", "--catalog", "braid 3", "--window", "3:1"], None).status.code(), Some(1));
    assert_eq!(arrsheaf(&["oracle", "--catalog", "braid 3", "--kmax", "1"], None).status.code(), Some(1));
    let capped = arrsheaf(&["cohomology", "--catalog", "braid 4", "--engine", "direct", "--cap", "50", "--window", "1:1"], None);
    assert_eq!(capped.status.code(), Some(2));
    assert_eq!(arrsheaf(&["--help"], None).status.code(), Some(0));
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_arrsheaf"));
        cmd.args(["cohomology", "--catalog", "generic 3 4"]);
        match threads {
            Some(t) => cmd.env("ARRSHEAF_THREADS", t),
            None => cmd.env_remove("ARRSHEAF_THREADS"),
        };
        cmd.output().unwrap()
    };
    let (one, four, bad) = (run(Some("1")), run(Some("4")), run(Some("zero")));
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn output_is_byte_stable() {
    let args = ["oracle", "--catalog", "generic 3 4", "--window", "-3:3", "--kmax", "6"];
    let (a, b) = (arrsheaf(&args, None), arrsheaf(&args, None));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn other_subcommands() {
    let l = json(&arrsheaf(&["lattice", "--catalog", "braid 3"], None));
    assert_eq!(l["rank_counts"], serde_json::json!([1, 6, 7, 1]));
    assert_eq!(l["characteristic_polynomial"], serde_json::json!([-6, 11, -6, 1]));

    let d = json(&arrsheaf(&["derivations", "--catalog", "braid 3", "--degree", "2"], None));
    assert_eq!(d["degrees"][0]["dim"], 4);
    assert_eq!(d["degrees"][0]["basis"].as_array().unwrap().len(), 4);

    let d = json(&arrsheaf(&["derivations", "--catalog", "boolean 2", "--flat", "0", "--window", "0:2"], None));
    assert_eq!(d["members"], serde_json::json!([0]));
    let dims: Vec<i64> = d["degrees"].as_array().unwrap().iter().map(|r| r["dim"].as_i64().unwrap()).collect();
    assert_eq!(dims, vec![1, 3, 5]);

    let f = arrsheaf(&["freeness", "--catalog", "generic 3 4"], None);
    assert!(f.status.success());
    let f = json(&f);
    assert_eq!(f["verdict"]["free"], false);
    assert_eq!(f["verdict"]["certificate"]["status"], "not-free");
    assert_eq!(f["factorization"]["status"], "not-applicable");

    let p = json(&arrsheaf(&["freeness", "--catalog", "braid 3", "--field", "101"], None));
    assert_eq!(p["field"], "Fp 101");
    assert_eq!(p["verdict"]["exponents"], serde_json::json!([1, 2, 3]));

    let t = arrsheaf(&["cohomology", "--catalog", "boolean 2", "--functor", "O", "--window", "-3:1", "--format", "table"], None);
    let text = String::from_utf8(t.stdout).unwrap();
    assert!(text.contains("H^1"), "{text}");
}
