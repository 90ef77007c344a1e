//! Integration tests for the command-line surface: exit codes, printed
//! precision, JSON round-trips, and diagnostics.

use clap::Parser;
use double_trine::cli::{run, Cli, EXIT_INVALID_INPUT, EXIT_OK};
use double_trine::measurements::six_outcome_states;
use double_trine::serial::{self, ComplexJson, PovmJson};
use std::path::PathBuf;

fn invoke(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["double-trine"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).expect("arguments parse");
    run(&cli)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("double-trine-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn mi_entangled_prints_nine_digits() {
    let (code, out) = invoke(&["mi", "--measurement", "entangled"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("I = 1.369068423 bits"), "{out}");
    // conditional table shows the hit probability to nine digits
    assert!(out.contains("0.971404521"), "{out}");
}

#[test]
fn mi_six_matches_entangled_and_baselines_print_exactly() {
    let (_, entangled) = invoke(&["mi", "--measurement", "entangled"]);
    let (code, six) = invoke(&["mi", "--measurement", "six"]);
    assert_eq!(code, EXIT_OK);
    let line = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("I = "))
            .map(str::to_string)
            .unwrap()
    };
    assert_eq!(line(&entangled), line(&six));

    let (code, nine) = invoke(&["mi", "--measurement", "nine"]);
    assert_eq!(code, EXIT_OK);
    // log2(3) - 1/2 = 1.0849625007... rounds to ...501 at nine decimals
    assert!(nine.contains("I = 1.084962501 bits"), "{nine}");

    // trine-local is a qubit measurement, so the default ensemble is the trine
    let (code, local) = invoke(&["mi", "--measurement", "trine-local"]);
    assert_eq!(code, EXIT_OK);
    assert!(local.contains("I = 0.584962501 bits"), "{local}");
}

#[test]
fn mi_json_reemits_byte_identically() {
    let (code, out) = invoke(&["mi", "--measurement", "six", "--output-format", "json"]);
    assert_eq!(code, EXIT_OK);
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    let reemitted = serde_json::to_string_pretty(&value).unwrap();
    assert_eq!(out, reemitted);
    assert!(value["mi_bits"].as_f64().unwrap() > 1.369);
}

#[test]
fn mi_csv_has_one_row_per_state() {
    let (code, out) = invoke(&["mi", "--measurement", "nine", "--output-format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 4, "{out}"); // header + three states
    assert!(rows[0].contains(','));
}

#[test]
fn mi_missing_file_is_invalid_input() {
    let (code, out) = invoke(&["mi", "--measurement", "/no/such/file.json"]);
    assert_eq!(code, EXIT_INVALID_INPUT);
    assert!(out.starts_with("error: "), "{out}");
}

#[test]
fn export_then_validate_six_outcome_povm() {
    let path = scratch("six.json");
    let (code, _) = invoke(&[
        "export",
        "--measurement",
        "six",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);

    let (code, out) = invoke(&["validate", "--povm", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("valid POVM: dim 4, 6 outcomes"), "{out}");
    assert!(out.contains("classification: unentangled"), "{out}");
}

#[test]
fn export_ensemble_round_trips_byte_identically() {
    let (code, text) = invoke(&["export", "--ensemble", "double-trine"]);
    assert_eq!(code, EXIT_OK);
    let back = serial::ensemble_from_json(&text).unwrap();
    assert_eq!(text, serial::ensemble_to_json(&back));
}

#[test]
fn validate_rejects_incomplete_six_outcome_family() {
    // the six-outcome construction at θ = 60°, α = 4/9 does not sum to the
    // identity; serialize it raw so the validator sees the defect
    let (b, c) = six_outcome_states(60f64.to_radians());
    let alpha = 4.0 / 9.0;
    let doc = PovmJson {
        dim: 4,
        elements: b
            .iter()
            .chain(c.iter())
            .map(|state| {
                let amps = state.amplitudes();
                (0..4)
                    .map(|i| {
                        (0..4)
                            .map(|j| {
                                let entry = amps[i] * amps[j].conj() * alpha;
                                ComplexJson {
                                    re: entry.re,
                                    im: entry.im,
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        labels: (0..6).map(|k| format!("G{k}")).collect(),
    };
    let path = scratch("incomplete.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let (code, out) = invoke(&["validate", "--povm", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID_INPUT, "{out}");
    assert!(out.contains("Frobenius defect"), "{out}");
}

#[test]
fn validate_rejects_malformed_json() {
    let path = scratch("malformed.json");
    std::fs::write(&path, "{\"dim\": 4, ").unwrap();
    let (code, out) = invoke(&["validate", "--povm", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID_INPUT);
    assert!(out.contains("error: invalid POVM"), "{out}");
}

#[test]
fn optimize_single_outcome_is_the_identity_povm() {
    let path = scratch("identity.json");
    let (code, out) = invoke(&[
        "optimize",
        "--mode",
        "global",
        "--outcomes",
        "1",
        "--restarts",
        "1",
        "--iters",
        "10",
        "--output-format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(value["mode"], "global");
    assert_eq!(value["M"], 1);
    assert!(value["best_I_bits"].as_f64().unwrap().abs() < 1e-12);

    // the persisted POVM must itself validate
    let (code, out) = invoke(&["validate", "--povm", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("valid POVM: dim 4, 1 outcomes"), "{out}");
}

#[test]
fn optimize_is_deterministic_given_seed() {
    let args = [
        "optimize",
        "--mode",
        "global",
        "--outcomes",
        "2",
        "--restarts",
        "2",
        "--iters",
        "40",
        "--seed",
        "9",
        "--output-format",
        "json",
    ];
    let (code_a, a) = invoke(&args);
    let (code_b, b) = invoke(&args);
    assert_eq!(code_a, EXIT_OK, "{a}");
    assert_eq!(code_b, EXIT_OK);
    assert_eq!(a, b);
}

#[test]
fn protocol_builtin_reports_comparison_line() {
    let (code, out) = invoke(&["protocol", "--builtin", "trine-both"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("I = 1.084962501 bits"), "{out}");
    assert!(
        out.contains("comparison: I < 1.369068423 (entangled-basis optimum)"),
        "{out}"
    );
}

#[test]
fn protocol_file_round_trip_matches_builtin() {
    let path = scratch("trine-both.json");
    let (code, _) = invoke(&[
        "export",
        "--protocol",
        "trine-both",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let (_, from_builtin) = invoke(&["protocol", "--builtin", "trine-both"]);
    let (code, from_file) = invoke(&["protocol", "--file", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{from_file}");
    assert_eq!(from_builtin, from_file);
}

#[test]
fn unknown_builtin_protocol_is_invalid_input() {
    let (code, out) = invoke(&["protocol", "--builtin", "mystery"]);
    assert_eq!(code, EXIT_INVALID_INPUT);
    assert!(out.contains("unknown builtin protocol"), "{out}");
}

#[test]
fn unknown_output_format_is_rejected_at_parse_time() {
    let parsed = Cli::try_parse_from(["double-trine", "mi", "--output-format", "xml"]);
    assert!(parsed.is_err());
}
