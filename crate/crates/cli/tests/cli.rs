use std::path::Path;

use backdoor_cli::run;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn backdoor(args: &[&str]) -> backdoor_cli::Outcome {
    run(std::iter::once("backdoor").chain(args.iter().copied()))
}

#[test]
fn member_answers_false_for_the_tsi_pair() {
    let out = backdoor(&[
        "member",
        "--language",
        &fixture("r1r2.json"),
        "--class",
        &fixture("tsi.json"),
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "member: false\n");
}

#[test]
fn inline_class_json_is_accepted() {
    let out = backdoor(&[
        "member",
        "--language",
        &fixture("r1r2.json"),
        "--class",
        r#"{"atomic":"max"}"#,
        "--json",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["member"], false);
}

#[test]
fn find_on_the_sample() {
    let out = backdoor(&[
        "find",
        "--instance",
        &fixture("single-constraint.json"),
        "--class",
        &fixture("sample-class.json"),
        "--k",
        "2",
        "--json",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["found"], true);
    assert_eq!(v["backdoor"].as_array().unwrap().len(), 2);
    assert_eq!(v["verified"], true);
}

#[test]
fn k_zero_on_an_in_class_instance() {
    let dir = std::env::temp_dir().join(format!("backdoor-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("le.json");
    std::fs::write(&path, r#"{"domain_size":2,"num_vars":2,"constraints":[{"scope":[0,1],"tuples":[[0,0],[0,1],[1,1]]}]}"#).unwrap();
    let out = backdoor(&[
        "find",
        "--instance",
        path.to_str().unwrap(),
        "--class",
        &fixture("max.json"),
        "--k",
        "0",
        "--json",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["found"], true);
    assert_eq!(v["backdoor"], serde_json::json!([]));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn exit_codes() {
    assert_eq!(backdoor(&["frobnicate"]).code, 1);
    assert_eq!(
        backdoor(&[
            "find",
            "--instance",
            "missing.json",
            "--class",
            "{}",
            "--k",
            "1"
        ])
        .code,
        1
    );
    // TSI has no derivable Helly number
    let out = backdoor(&[
        "find",
        "--instance",
        &fixture("single-constraint.json"),
        "--class",
        &fixture("tsi.json"),
        "--k",
        "1",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("--helly-override"));
    let capped = backdoor(&[
        "find-brute",
        "--instance",
        &fixture("single-constraint.json"),
        "--class",
        &fixture("sample-class.json"),
        "--k",
        "3",
        "--cap-brute",
        "10",
    ]);
    assert_eq!(capped.code, 2);
    assert_eq!(backdoor(&["--help"]).code, 0);
}

#[test]
fn check_and_solve() {
    let sample = fixture("single-constraint.json");
    let class = fixture("sample-class.json");
    let yes = backdoor(&[
        "check",
        "--instance",
        &sample,
        "--class",
        &class,
        "--backdoor",
        "2,4",
    ]);
    assert_eq!(yes.stdout, "strong backdoor: true\n");
    let no = backdoor(&[
        "check",
        "--instance",
        &sample,
        "--class",
        &class,
        "--backdoor",
        "0,1",
    ]);
    assert_eq!(no.stdout, "strong backdoor: false\n");
    let solved = backdoor(&[
        "solve",
        "--instance",
        &sample,
        "--class",
        &class,
        "--backdoor",
        "2,4",
        "--json",
    ]);
    assert_eq!(solved.code, 0, "{}", solved.stderr);
    let v: serde_json::Value = serde_json::from_str(&solved.stdout).unwrap();
    assert_eq!(v["satisfiable"], true);
    let refused = backdoor(&[
        "solve",
        "--instance",
        &sample,
        "--class",
        &class,
        "--backdoor",
        "0,1",
    ]);
    assert_eq!(refused.code, 1);
}

#[test]
fn witness_search_for_tsi() {
    let out = backdoor(&["witness", "--class", &fixture("tsi.json")]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "witness: [(0,0),(0,1),(1,0)], [(0,1),(1,0),(1,1)]\n"
    );
}

#[test]
fn generated_sample_matches_the_fixture() {
    let out = backdoor(&["generate", "sample"]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        std::fs::read_to_string(fixture("single-constraint.json")).unwrap()
    );
}
