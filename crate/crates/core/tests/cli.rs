use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fourql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fourql"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn check_accepts_and_rejects() {
    let ok = fourql(&["check", &path("mood.4ql")]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let cycle = fourql(&["check", &path("cycle.4ql")]);
    assert_eq!(cycle.status.code(), Some(1));
    assert!(stderr(&cycle).contains("M -> N -> M"));
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.4ql");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(fourql(&["check", empty.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn check_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.4ql");
    std::fs::write(&bad, "p :- q\n").unwrap();
    let o = fourql(&["check", "--json", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let line: serde_json::Value = serde_json::from_str(stderr(&o).lines().next().unwrap()).unwrap();
    assert_eq!(line["severity"], "error");
    assert_eq!(line["line"], 2);
    let unsafe_rule = dir.path().join("unsafe.4ql");
    std::fs::write(&unsafe_rule, "p(X) :- q.\n").unwrap();
    let o = fourql(&["check", unsafe_rule.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unsafe variable X"), "{}", stderr(&o));
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(fourql(&[]).status.code(), Some(2));
    assert_eq!(fourql(&["solve"]).status.code(), Some(2));
    assert_eq!(fourql(&["solve", "/nonexistent/x.4ql"]).status.code(), Some(2));
    assert_eq!(fourql(&["solve", "--bogus", &path("mood.4ql")]).status.code(), Some(2));
    assert_eq!(fourql(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_trace_json() {
    let o = fourql(&["solve", "--trace", "--json", &path("mood.4ql")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "4ql-model/1");
    assert_eq!(v["program"]["sha256"].as_str().unwrap().len(), 64);
    let t = &v["trace"][0];
    let sizes: Vec<usize> = t["phiIterates"].as_array().unwrap().iter().map(|s| s.as_array().unwrap().len()).collect();
    assert_eq!(sizes, [2, 4, 6, 8]);
    assert_eq!(t["i1"], serde_json::json!(["-main.overloaded", "main.overloaded"]));
    assert_eq!(t["sPrimeRuleIds"].as_array().unwrap().len(), 6);
    assert_eq!(v["modules"]["main"]["main.wait"], "i");
    assert_eq!(v["modules"]["main"]["main.success"], "t");
}

#[test]
fn solve_is_byte_stable() {
    let a = fourql(&["solve", "--json", "--trace", &path("mood.4ql")]);
    let b = fourql(&["solve", "--json", "--trace", &path("mood.4ql")]);
    assert_eq!(a.stdout, b.stdout);
    let a = fourql(&["solve", &path("mood.4ql")]);
    let b = fourql(&["solve", &path("mood.4ql")]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn facts_only_and_unknowns() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("facts.4ql");
    std::fs::write(&f, "a.\n-b.\nc :- d.\n").unwrap();
    let o = fourql(&["solve", f.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("main.a  t") && text.contains("main.b  f"));
    assert!(!text.contains("main.c"));
    let o = fourql(&["solve", "--show-unknown", f.to_str().unwrap()]);
    assert!(stdout(&o).contains("main.c  u"));
}

#[test]
fn facts_from_csv() {
    let o = fourql(&[
        "solve",
        "--json",
        "--module",
        "K",
        "--facts",
        &format!("L={}", path("houses.csv")),
        &path("houses.4ql"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let k = v["modules"]["K"].as_object().unwrap();
    assert_eq!(k.len(), 1);
    assert_eq!(k["K.loc(h1,p3,s1)"], "t");
    assert!(v["modules"].get("L").is_none());
    let o = fourql(&["solve", "--module", "Z", &path("houses.4ql")]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "house,h1,extra\n").unwrap();
    let o = fourql(&["solve", "--facts", &format!("L={}", bad.display()), &path("houses.4ql")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("arguments"), "{}", stderr(&o));
}

#[test]
fn query() {
    let run = |f: &str, file: &str| {
        let o = fourql(&["query", f, &path(file)]);
        (o.status.code(), stdout(&o).trim().to_string(), stderr(&o))
    };
    assert_eq!(run("main.overloaded", "workload.4ql").1, "i");
    assert_eq!(run("main.good_mood, main.success", "mood.4ql").1, "t");
    assert_eq!(run("main.wait in {i}", "mood.4ql").1, "t");
    assert_eq!(run("-main.success | main.wait", "mood.4ql").1, "i");
    let (code, _, err) = run("main.missing", "mood.4ql");
    assert_eq!(code, Some(1));
    assert!(err.contains("unknown relation"));
    assert_eq!(run("main.wait,", "mood.4ql").0, Some(1));
}

#[test]
fn verify() {
    let o = fourql(&["verify", "--exhaustive", &path("workload.4ql")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("min.4ql");
    std::fs::write(&model, "overloaded. -overloaded. wait. rest_time.\n").unwrap();
    let o = fourql(&["verify", "--explain", "--model", model.to_str().unwrap(), &path("workload.4ql")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("main.wait is t"), "{}", stdout(&o));
}

#[test]
fn translate() {
    let o = fourql(&["translate", &path("strata.dl")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("N3.p :- M3.p = t.\n"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("strata.4ql");
    let o = fourql(&["translate", "--check", "-o", out.to_str().unwrap(), &path("strata.dl")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("N3.p t"));
    assert!(!stdout(&o).contains("M3.p"));
    let o = fourql(&["solve", "--module", "N3", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("N3.p  t"));
    let o = fourql(&["translate", "--check", "--show-internal", &path("reach.dl")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("M2.reach(d,c) t"));
    let o = fourql(&["translate", &path("unstratified.dl")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not stratifiable"));
}
