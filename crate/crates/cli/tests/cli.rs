use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn entlab(args: &[&str]) -> Output {
    entlab_env(args, &[])
}

fn entlab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entlab"));
    cmd.args(args).env_remove("ENTLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to launch entlab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.v1.json"))
}

fn assert_valid(name: &str, doc: &Value) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(
        errors.is_empty(),
        "{name} output violates its schema: {errors:?}"
    );
    assert_eq!(doc["schema"], format!("entlab.{name}.v1"));
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn diagram_grid_200_has_400_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = entlab(&[
        "diagram",
        "--channel",
        "depolarizing",
        "--p",
        "0.5",
        "--grid",
        "200",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,param,measure,e_in,e_out");
    assert_eq!(lines.len(), 401);
    assert_eq!(
        lines.iter().filter(|l| l.starts_with("werner,")).count(),
        200
    );
    assert_eq!(lines.iter().filter(|l| l.starts_with("pure,")).count(), 200);
}

#[test]
fn identity_channel_diagram_is_diagonal() {
    let o = entlab(&[
        "diagram",
        "--channel",
        "identity",
        "--families",
        "werner,pure,random",
        "--grid",
        "25",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let (e_in, e_out): (f64, f64) = (rec[3].parse().unwrap(), rec[4].parse().unwrap());
        assert!((e_in - e_out).abs() < 1e-9, "{rec:?}");
        n += 1;
    }
    assert_eq!(n, 75);
}

#[test]
fn diagram_grid_of_one_gives_two_rows() {
    let o = entlab(&["diagram", "--p", "0.5", "--grid", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn diagram_svg_writes_csv_alongside() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plot.svg");
    let o = entlab(&[
        "diagram",
        "--p",
        "0.3",
        "--grid",
        "11",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("plot.csv"))
            .unwrap()
            .lines()
            .count(),
        23
    );
}

#[test]
fn diagram_rejects_unknown_extension_and_zero_grid() {
    assert_eq!(
        code(&entlab(&["diagram", "--p", "0.5", "--out", "x.txt"])),
        2
    );
    assert_eq!(code(&entlab(&["diagram", "--p", "0.5", "--grid", "0"])), 2);
    assert_eq!(
        code(&entlab(&["diagram", "--p", "0.5", "--families", "cats"])),
        2
    );
}

#[test]
fn malformed_channel_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = entlab(&["violations", "--channel", path_str(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn non_trace_preserving_channel_file_is_a_contract_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("half.json");
    std::fs::write(
        &f,
        r#"{"d_in":2,"d_out":2,"kraus":[[[0.5,0],[0,0],[0,0],[0.5,0]]]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&entlab(&[
            "check-channel",
            "--channel",
            path_str(&f),
            "--test",
            "eb"
        ])),
        3
    );
}

#[test]
fn non_hermitian_initial_state_is_a_contract_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    std::fs::write(
        &f,
        r#"{"dims":[2,2],"matrix":[[0.25,0],[0.1,0],[0,0],[0,0],[0,0],[0.25,0],[0,0],[0,0],[0,0],[0,0],[0.25,0],[0,0],[0,0],[0,0],[0,0],[0.25,0]]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&entlab(&[
            "tsep",
            "--T",
            "1",
            "--mode",
            "numeric",
            "--initial",
            path_str(&f)
        ])),
        3
    );
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(code(&entlab(&["frobnicate"])), 2);
    assert_eq!(
        code(&entlab(&["violations", "--measure", "entropy-of-cats"])),
        2
    );
    assert_eq!(
        code(&entlab(&["violations", "--channel", "depolarizing"])),
        2
    );
    assert_eq!(code(&entlab(&["violations", "--p", "1.5"])), 2);
    assert_eq!(code(&entlab(&["tsep", "--T", "-1"])), 2);
    assert_eq!(
        code(&entlab_env(
            &["tsep", "--T", "1"],
            &[("ENTLAB_THREADS", "zero")]
        )),
        2
    );
}

#[test]
fn hadamard_has_no_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = entlab(&[
        "violations",
        "--channel",
        "hadamard",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 1);
    let doc = read_json(&out);
    assert_valid("violations", &doc);
    assert_eq!(doc["found"], false);
}

#[test]
fn depolarizing_violation_certificate_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = entlab(&["violations", "--p", "0.5", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&out);
    assert_valid("violations", &doc);
    let c = &doc["certificate"];
    let f = |k: &str| c[k].as_f64().unwrap();
    assert!(f("e_in1") - f("e_in2") >= 1e-4);
    assert!(f("e_out2") - f("e_out1") >= 1e-4);
}

#[test]
fn depolarizing_0_2_is_entanglement_breaking() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eb.json");
    let o = entlab(&[
        "check-channel",
        "--channel",
        "depolarizing",
        "--p",
        "0.2",
        "--test",
        "eb",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("true"));
    let doc = read_json(&out);
    assert_valid("check-channel", &doc);
    assert_eq!(doc["verdict"]["entanglement_breaking"], true);
    assert_eq!(doc["verdict"]["exact"], true);
}

#[test]
fn cptp_check_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = entlab(&[
        "check-channel",
        "--channel",
        "selective",
        "--test",
        "cptp",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&out);
    assert_valid("check-channel", &doc);
    assert_eq!(doc["passed"], true);
}

#[test]
fn tsep_analytic_prints_ln3() {
    let o = entlab(&["tsep", "--T", "1", "--mode", "analytic"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1.0986122886");
}

#[test]
fn tsep_numeric_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = entlab(&[
        "tsep",
        "--T",
        "2",
        "--mode",
        "numeric",
        "--tol",
        "1e-9",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&out);
    assert_valid("tsep", &doc);
    assert!((doc["t_sep"].as_f64().unwrap() - 2.0 * 3f64.ln()).abs() < 1e-8);
}

#[test]
fn trajectory_csv() {
    let o = entlab(&[
        "trajectory",
        "--T",
        "1",
        "--t-max",
        "2",
        "--steps",
        "5",
        "--with-state",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        r.headers().unwrap(),
        vec!["t", "measure_kind", "value", "state"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(&rows[0][1], "concurrence");
    assert!((rows[0][2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(rows[4][2].parse::<f64>().unwrap(), 0.0);
    let state: Value = serde_json::from_str(&rows[2][3]).unwrap();
    assert_eq!(state["dims"], serde_json::json!([2, 2]));
}

#[test]
fn four_qubit_counterexample_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let o = entlab(&["counterexample", "four-qubit", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&out);
    assert_valid("counterexample", &doc);
    let r = &doc["report"];
    assert!((r["negativity_rho1_out"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((r["negativity_rho2_out"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(r["ordering_reversed"], true);
}

#[test]
fn ghz_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let o = entlab(&["ghz", "--assist-samples", "50", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let doc = read_json(&out);
    assert_valid("ghz", &doc);
    assert!(doc["assistance_lower_bound"].as_f64().unwrap() > 0.9);
}

#[test]
fn axioms_and_maxent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    assert_eq!(
        code(&entlab(&[
            "axioms",
            "--trials",
            "30",
            "--out",
            path_str(&a)
        ])),
        0
    );
    assert_valid("axioms", &read_json(&a));
    let m = dir.path().join("m.json");
    assert_eq!(
        code(&entlab(&[
            "maxent",
            "--p",
            "0.7",
            "--trials",
            "20",
            "--out",
            path_str(&m)
        ])),
        0
    );
    let doc = read_json(&m);
    assert_valid("maxent", &doc);
    assert_eq!(doc["passed"], true);
}

#[test]
fn json_output_requires_json_extension() {
    assert_eq!(
        code(&entlab(&["counterexample", "four-qubit", "--out", "x.csv"])),
        2
    );
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let d = dir.path().join(format!("d{threads}.csv"));
        let v = dir.path().join(format!("v{threads}.json"));
        let env = [("ENTLAB_THREADS", threads)];
        let o = entlab_env(
            &[
                "diagram",
                "--p",
                "0.5",
                "--families",
                "werner,pure,random",
                "--grid",
                "60",
                "--seed",
                "7",
                "--out",
                path_str(&d),
            ],
            &env,
        );
        assert_eq!(code(&o), 0);
        let o = entlab_env(
            &[
                "violations",
                "--p",
                "0.5",
                "--strategy",
                "random",
                "--budget",
                "3000",
                "--seed",
                "7",
                "--out",
                path_str(&v),
            ],
            &env,
        );
        assert_eq!(code(&o), 0);
        outputs.push((std::fs::read(&d).unwrap(), std::fs::read(&v).unwrap()));
    }
    assert!(outputs[0] == outputs[1]);
}
