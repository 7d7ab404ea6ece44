use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghz-locc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn machine(args: &[&str]) -> (i32, Value, Vec<u8>) {
    let mut all = args.to_vec();
    all.extend(["--format", "machine"]);
    let out = run(&all);
    let doc = serde_json::from_slice(&out.stdout).expect("machine output is JSON");
    (out.status.code().unwrap(), doc, out.stdout)
}

#[test]
fn verify_campaign_passes() {
    let out = run(&[
        "verify",
        "--protocol",
        "ghz",
        "--dims",
        "1,1",
        "--trials",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));

    let (code, doc, _) = machine(&[
        "--command",
        "verify",
        "--dims",
        "1,1",
        "--trials",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["passed"], true);
    assert!(doc["worst_distance"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["trials"].as_array().unwrap().len(), 100);
}

#[test]
fn out_of_range_dims_is_a_usage_error() {
    let out = run(&["verify", "--dims", "5,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("Usage"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flags_exit_2() {
    for args in [
        &["--trials", "0"][..],
        &["--protocol", "three-bell"],
        &["--unknown"],
        &["verify", "--command", "compare"],
        &["--protocol", "two-bell", "--schedule-sweep"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn machine_output_is_byte_identical_for_identical_config() {
    let args = [
        "verify",
        "--dims",
        "2,1",
        "--trials",
        "5",
        "--seed",
        "11",
        "--mode",
        "sampled",
        "--schedule-sweep",
    ];
    let (_, _, first) = machine(&args);
    let (_, _, second) = machine(&args);
    assert_eq!(first, second);
    let (_, _, other_seed) = machine(&[
        "verify",
        "--dims",
        "2,1",
        "--trials",
        "5",
        "--seed",
        "12",
        "--mode",
        "sampled",
        "--schedule-sweep",
    ]);
    assert_ne!(first, other_seed);
}

#[test]
fn machine_document_layout() {
    let (code, doc, _) = machine(&[
        "verify",
        "--dims",
        "1,2",
        "--trials",
        "2",
        "--seed",
        "3",
        "--schedule-sweep",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["tool"], "ghz-locc");
    assert_eq!(doc["config"]["dims"], serde_json::json!([1, 2]));
    assert_eq!(doc["config"]["schedule_sweep"], true);
    assert_eq!(doc["tally"]["ghz_consumed"], 1);
    assert_eq!(doc["tally"]["cbits"], 3);
    assert!(doc["failure"].is_null());
    let trial = &doc["trials"][0];
    assert_eq!(trial["branches"].as_array().unwrap().len(), 8);
    assert!((trial["probability_sum"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(trial["schedule_sweep"].is_object());
}

#[test]
fn failure_carries_replay_data() {
    let (code, doc, _) = machine(&[
        "verify",
        "--dims",
        "1,1",
        "--trials",
        "3",
        "--seed",
        "4",
        "--skip-correction",
        "charlie-x",
    ]);
    assert_eq!(code, 1);
    assert_eq!(doc["passed"], false);
    let f = &doc["failure"];
    assert!(f["seed"].is_u64());
    assert!(f["branch"].is_object());
    assert!(f["reason"].is_string());
    let transcript = f["transcript"].as_array().unwrap();
    assert!(!transcript.is_empty());
    for e in transcript {
        for key in ["actor", "kind", "step_label", "payload"] {
            assert!(!e[key].is_null(), "{key} missing");
        }
    }

    // The reported seed alone reproduces the failing case.
    let seed = f["seed"].as_u64().unwrap();
    let case = ghz_locc::analysis::TrialCase::generate(1, 1, seed).unwrap();
    let opts = ghz_locc::protocols::ProtocolOptions {
        corrections: ghz_locc::protocols::Corrections {
            charlie_x: false,
            ..Default::default()
        },
        ..Default::default()
    };
    let r = ghz_locc::protocols::ghz_protocol_with(
        &case.u,
        &case.v,
        &case.initial,
        ghz_locc::protocols::Mode::Enumerate,
        &opts,
    )
    .unwrap();
    let key: std::collections::BTreeMap<String, u8> =
        serde_json::from_value(f["branch"].clone()).unwrap();
    let b = r.branches.iter().find(|b| b.outcomes == key).unwrap();
    assert!(b.exact_distance >= 1e-10);
}

#[test]
fn text_failure_names_seed_and_branch() {
    let out = run(&["verify", "--trials", "2", "--skip-correction", "alice-z"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed"));
    assert!(text.contains("a="));
    assert!(text.contains("FAIL"));
}

#[test]
fn lower_bound_reports_unit_entropies() {
    let out = run(&["lower-bound"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("min fidelity 1.0"));
    assert!(text.contains("A|BC: 1.000000000000"));

    let (code, doc, _) = machine(&["--command", "lower-bound"]);
    assert_eq!(code, 0);
    let lb = &doc["lower_bound"];
    assert!((lb["resource_entropy"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((lb["two_bell_resource_entropy"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert_eq!(lb["saturated"], true);
}

#[test]
fn enumerate_and_compare_commands() {
    let (code, doc, _) = machine(&[
        "enumerate",
        "--protocol",
        "two-bell",
        "--dims",
        "1,1",
        "--seed",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["trials"][0]["branches"].as_array().unwrap().len(), 16);
    assert_eq!(doc["tally"]["bell_consumed"], 2);

    let (code, doc, _) = machine(&["compare", "--dims", "2,2", "--trials", "3"]);
    assert_eq!(code, 0);
    let rows = doc["comparison"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
}
