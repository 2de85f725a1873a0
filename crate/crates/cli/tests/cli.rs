use std::process::Command as Process;

use gi_cli::*;
use gi_core::SearchBounds;
use serde_json::Value;

fn job(command: Command, inputs: &[&str]) -> JobSpec {
    JobSpec {
        command,
        inputs: inputs.iter().map(|s| parse_input(s).unwrap()).collect(),
        arity: None,
        modulus: 0,
        format: OutputFormat::Text,
        bounds: SearchBounds::default(),
        index_bound: 5,
    }
}

fn gi(args: &[&str]) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_gi"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const V31_TWICE: &str = r#"{"factors": [[[3]], [[3]]]}"#;

#[test]
fn parses_documented_inputs() {
    let one = parse_input(r#"{"factors": [[[2]]]}"#).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].size(), 1);
    assert_eq!(
        parse_input(r#"{"factors": [[[3]], [[3]], [[3]]]}"#)
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn validation_errors_name_the_factor() {
    let e = parse_input(r#"{"factors": [[[2]], [[0,1],[1,0]]]}"#).unwrap_err();
    assert!(matches!(e, InputError::Validation { factor: 1, .. }));
    assert!(
        e.condition().unwrap().contains("permutation"),
        "{:?}",
        e.condition()
    );
    let e = parse_input(r#"{"factors": [[[0,1],[1,0]]]}"#).unwrap_err();
    assert!(e.to_string().starts_with("factor 0"), "{e}");
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(matches!(
        parse_input(r#"{"factors": []}"#),
        Err(InputError::NoFactors)
    ));
    assert!(matches!(
        parse_input(r#"{"factors": [[[1,1],[1]]]}"#),
        Err(InputError::Ragged { factor: 0 })
    ));
    assert!(matches!(
        parse_input(r#"{"factors": [[[2]]], "x": 1}"#),
        Err(InputError::Parse(_))
    ));
    assert!(matches!(
        parse_input("/nonexistent/input.json"),
        Err(InputError::Io { .. })
    ));
}

#[test]
fn input_counts_are_enforced() {
    let mut j = job(Command::Classify, &[V31_TWICE]);
    assert_eq!(run(&j).exit_code, EXIT_INPUT);
    j.command = Command::Homology;
    assert_eq!(run(&j).exit_code, EXIT_OK);
}

#[test]
fn abelianization_of_2v31() {
    let out = run(&job(Command::Abelianization, &[V31_TWICE]));
    assert_eq!(out.exit_code, EXIT_OK);
    assert_eq!(out.report.unwrap().headline, "Z/4");
}

#[test]
fn hk_check_holds_on_3_3_5() {
    let out = run(&job(
        Command::HkCheck,
        &[r#"{"factors": [[[3]], [[3]], [[5]]]}"#],
    ));
    assert_eq!(out.exit_code, EXIT_OK);
    assert_eq!(out.report.unwrap().headline, "true");
}

#[test]
fn classify_identical_and_distinct() {
    let out = run(&job(Command::Classify, &[V31_TWICE, V31_TWICE]));
    assert_eq!(out.exit_code, EXIT_OK);
    assert_eq!(
        out.report.unwrap().headline,
        "isomorphic (identity witness)"
    );
    let out = run(&job(
        Command::Classify,
        &[V31_TWICE, r#"{"factors": [[[4]], [[4]]]}"#],
    ));
    assert_eq!(out.exit_code, EXIT_NEGATIVE);
}

#[test]
fn strong_ah_negative_verdict() {
    let out = run(&job(
        Command::StrongAh,
        &[r#"{"factors": [[[3]], [[3]], [[3]]]}"#],
    ));
    assert_eq!(out.exit_code, EXIT_NEGATIVE);
}

#[test]
fn table_commands_need_an_arity() {
    let mut j = job(Command::BakerCheck, &[]);
    assert_eq!(run(&j).exit_code, EXIT_INPUT);
    j.arity = Some(parse_arity("3,3,3").unwrap());
    assert_eq!(run(&j).exit_code, EXIT_OK);
    assert!(parse_arity("3,x").is_err());
}

#[test]
fn bound_exhaustion_exits_3() {
    let a = r#"{"factors": [[[4]], [[4]]]}"#;
    let b = r#"{"factors": [[[4]], [[0,4],[1,0]]]}"#;
    assert_eq!(run(&job(Command::Classify, &[a, b])).exit_code, EXIT_OK);
    let mut j = job(Command::Classify, &[a, b]);
    j.bounds.max_candidates = 1;
    let out = run(&j);
    assert_eq!(out.exit_code, EXIT_BOUND);
    assert!(out.report.is_none());
    assert!(out.diagnostic.unwrap().contains("bowen_franks"));
    let (code, out, err) = gi(&["--group-bound", "1", "classify", a, b]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    assert!(err.contains("bound"), "{err}");
    let (code, _, _) = gi(&["classify", a, b]);
    assert_eq!(code, 0);
}

fn all_reports() -> Vec<Report> {
    let inputs = [
        "{\"factors\": [[[3]], [[3]]]}",
        "{\"factors\": [[[1,6],[6,1]], [[2,1],[1,1]]]}",
        "{\"factors\": [[[3]], [[3]], [[5]]]}",
    ];
    let mut out = Vec::new();
    for input in inputs {
        for c in [
            Command::Validate,
            Command::Invariants,
            Command::Homology,
            Command::KGroups,
            Command::HkCheck,
            Command::Abelianization,
            Command::StrongAh,
        ] {
            out.extend(run(&job(c, &[input])).report);
        }
        out.extend(run(&job(Command::Classify, &[input, input])).report);
    }
    let mut j = job(Command::CharacterSearch, &[]);
    j.arity = Some(parse_arity("3,3").unwrap());
    j.modulus = 4;
    out.extend(run(&j).report);
    out
}

#[test]
fn json_round_trips_and_is_deterministic() {
    for (a, b) in all_reports().iter().zip(all_reports()) {
        let s = a.render(OutputFormat::Json);
        assert_eq!(s, b.render(OutputFormat::Json));
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v, a.to_json());
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", s);
        assert_eq!(v["command"], a.command);
    }
}

#[test]
fn text_and_json_agree() {
    for r in all_reports() {
        let text = r.to_text();
        let json = r.to_json();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), json["result"].as_str().unwrap());
        for (k, _) in &r.fields {
            let line = lines.next().unwrap();
            let (key, value) = line.split_once(": ").unwrap();
            assert_eq!(key, *k);
            match &json[*k] {
                Value::String(s) => assert_eq!(value, s),
                Value::Number(n) => assert_eq!(value, n.to_string()),
                Value::Bool(b) => assert_eq!(value, b.to_string()),
                _ => {}
            }
        }
    }
}

#[test]
fn binary_end_to_end() {
    let (code, out, _) = gi(&["abelianization", V31_TWICE]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("Z/4"));

    let (code, out, _) = gi(&[
        "--format",
        "json",
        "hk-check",
        r#"{"factors": [[[3]], [[3]], [[5]]]}"#,
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"], "true");

    let (code, out, err) = gi(&["validate", r#"{"factors": [[[0,1],[1,0]]]}"#]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("factor 0"), "{err}");

    let (code, _, _) = gi(&["strong-ah", r#"{"factors": [[[3]], [[3]], [[3]]]}"#]);
    assert_eq!(code, 1);

    let (code, out, _) = gi(&["baker-check", "--k", "3,3,3"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn bound_flags_read_the_environment() {
    let out = Process::new(env!("CARGO_BIN_EXE_gi"))
        .args(["relations-check", "--k", "3,3"])
        .env("GI_INDEX_BOUND", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("index_bound: 3"));
    let out = Process::new(env!("CARGO_BIN_EXE_gi"))
        .args([
            "classify",
            r#"{"factors": [[[4]], [[4]]]}"#,
            r#"{"factors": [[[4]], [[0,4],[1,0]]]}"#,
        ])
        .env("GI_AUT_BOUND", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
