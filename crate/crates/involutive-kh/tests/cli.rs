//! End-to-end tests for the `involutive-kh` binary: output formats, JSON
//! round-trips, digest stability, exit codes, and the check suites.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.ikd"))
}

/// Runs the binary with a clean size-limit environment.
fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_involutive-kh"))
        .args(args)
        .env_remove("IKH_MAX_CROSSINGS")
        .output()
        .expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_involutive-kh"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

/// Writes `text` to a fresh file under the target temp directory.
fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ikh-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join(name);
    std::fs::write(&path, text).expect("temp file");
    path
}

fn digest_line(path: &Path) -> String {
    let out = run(&["compute", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "compute succeeds for {}", path.display());
    stdout_of(&out).lines().next().expect("digest line").to_string()
}

/// Parses a "(i, j, 2k)" table key into its three integer components.
fn parse_key(key: &str) -> (i32, i32, i32) {
    let inner = key.strip_prefix('(').and_then(|s| s.strip_suffix(')')).expect("parenthesized");
    let parts: Vec<i32> =
        inner.split(',').map(|p| p.trim().parse().expect("integer component")).collect();
    assert_eq!(parts.len(), 3, "three components in {key}");
    (parts[0], parts[1], parts[2])
}

fn json_table(doc: &serde_json::Value, key: &str) -> BTreeMap<(i32, i32, i32), u64> {
    doc["results"][key]
        .as_object()
        .unwrap_or_else(|| panic!("results.{key} is an object"))
        .iter()
        .map(|(k, v)| (parse_key(k), v.as_u64().expect("dimension")))
        .collect()
}

// ---------------------------------------------------------------------------
// compute / reduced output.
// ---------------------------------------------------------------------------

#[test]
fn compute_unknot_prints_the_two_line_table() {
    let out = run(&["compute", fixture("unknot").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# digest sha256:"), "digest header, got {:?}", lines[0]);
    assert_eq!(&lines[1..], ["(0, -1, 0): 1", "(0, 1, 0): 1", "total: 2"]);
}

#[test]
fn compute_hopf_json_has_four_unit_entries() {
    let out = run(&["compute", fixture("hopf").to_str().unwrap(), "--json"]);
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid JSON");
    assert_eq!(doc["tool"], "involutive-kh");
    assert_eq!(doc["command"], "compute");
    assert!(doc["digest"].as_str().unwrap().starts_with("sha256:"));
    assert!(doc["timing_ms"].is_number());
    let table = json_table(&doc, "unreduced");
    let expected: BTreeMap<(i32, i32, i32), u64> =
        [((0, 0, 0), 1), ((0, 2, 0), 1), ((2, 4, 2), 1), ((2, 6, 2), 1)].into();
    assert_eq!(table, expected);
}

#[test]
fn json_output_round_trips() {
    let out = run(&["compute", fixture("trefoil").to_str().unwrap(), "--reduced", "--json"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    let reparsed: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, reparsed);
    // Every key parses back to a grading triple with an integral third slot.
    for section in ["unreduced", "reduced"] {
        let table = json_table(&doc, section);
        assert!(!table.is_empty(), "{section} table is populated");
    }
    assert_eq!(json_table(&doc, "unreduced").values().sum::<u64>(), 6);
    assert_eq!(json_table(&doc, "reduced").values().sum::<u64>(), 3);
}

#[test]
fn reduced_subcommand_prints_the_trefoil_diagonal() {
    let out = run(&["reduced", fixture("trefoil").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines, ["(0, 2, 0): 1", "(2, 6, 1): 1", "(3, 8, 2): 1", "total: 3"]);
}

#[test]
fn collapse_j_renders_the_axis_weight_grid() {
    let out = run(&["compute", fixture("trefoil").to_str().unwrap(), "--collapse-j"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("# (i, k) grid"), "grid header present");
    assert!(text.contains("k\\i |   0   1   2   3"), "column labels, got:\n{text}");
    assert!(text.contains("0 |   2   .   .   ."), "bottom row, got:\n{text}");
}

// ---------------------------------------------------------------------------
// Digest stability.
// ---------------------------------------------------------------------------

#[test]
fn digest_survives_comments_whitespace_and_line_reordering() {
    let original = fixture("trefoil");
    let text = std::fs::read_to_string(&original).expect("fixture readable");
    // Add comments and blank lines, pad with spaces, and swap the two
    // tau_edge declarations; none of this changes the diagram.
    let mut lines: Vec<String> = Vec::new();
    lines.push("# reformatted copy".to_string());
    for line in text.lines() {
        if line.starts_with("tau_edge 0") {
            continue;
        }
        lines.push(format!("  {line}   # inline note"));
        lines.push(String::new());
        if line.starts_with("tau_edge 1") {
            lines.push("tau_edge 0 2".to_string());
        }
    }
    let copy = temp_file("trefoil_reformatted.ikd", &(lines.join("\n") + "\n"));
    assert_eq!(digest_line(&original), digest_line(&copy));
}

#[test]
fn digest_distinguishes_different_diagrams() {
    assert_ne!(digest_line(&fixture("trefoil")), digest_line(&fixture("hopf")));
}

// ---------------------------------------------------------------------------
// Exit codes.
// ---------------------------------------------------------------------------

#[test]
fn missing_file_exits_2() {
    let out = run(&["compute", "missing.ikd"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn corrupted_file_exits_2() {
    let bad = temp_file("corrupted.ikd", "ikd 1\nedges 4\ncrossing 0 + 0,1,2 on\n");
    let out = run(&["compute", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("error:"), "diagnostic on stderr, got {err:?}");
}

#[test]
fn size_limit_flag_exits_3() {
    let out = run(&["compute", fixture("t34").to_str().unwrap(), "--max-crossings", "4"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn size_limit_env_var_exits_3_and_flag_overrides_it() {
    let path = fixture("t34");
    let out = run_with_env(&["compute", path.to_str().unwrap()], "IKH_MAX_CROSSINGS", "4");
    assert_eq!(exit_code(&out), 3);
    let out = run_with_env(
        &["compute", path.to_str().unwrap(), "--max-crossings", "20"],
        "IKH_MAX_CROSSINGS",
        "4",
    );
    assert_eq!(exit_code(&out), 0, "explicit flag wins over the environment");
    let out = run_with_env(&["compute", path.to_str().unwrap()], "IKH_MAX_CROSSINGS", "many");
    assert_eq!(exit_code(&out), 2, "unparseable limit is an input error");
}

// ---------------------------------------------------------------------------
// Pages.
// ---------------------------------------------------------------------------

#[test]
fn hopf_pages_stabilize_in_f_and_drop_in_g() {
    let path = fixture("hopf");
    let out = run(&["pages", path.to_str().unwrap(), "--filtration", "F", "--upto", "3", "--json"]);
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let pages = doc["results"]["pages"].as_array().unwrap();
    let by_n: BTreeMap<u64, &serde_json::Value> =
        pages.iter().map(|p| (p["n"].as_u64().unwrap(), &p["dims"])).collect();
    assert_eq!(by_n[&2], by_n[&3], "no differential survives past the second page");
    let total =
        |v: &serde_json::Value| v.as_object().unwrap().values().map(|d| d.as_u64().unwrap()).sum::<u64>();
    assert_eq!(total(by_n[&2]), 4);

    let out = run(&["pages", path.to_str().unwrap(), "--filtration", "G", "--upto", "3", "--json"]);
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let pages = doc["results"]["pages"].as_array().unwrap();
    let totals: BTreeMap<u64, u64> =
        pages.iter().map(|p| (p["n"].as_u64().unwrap(), total(&p["dims"]))).collect();
    assert_eq!(totals[&2], 8);
    assert_eq!(totals[&3], 4, "the axis-weight differential is nonzero");
}

#[test]
fn trefoil_g_pages_stabilize_at_page_three() {
    let out = run(&[
        "pages",
        fixture("trefoil").to_str().unwrap(),
        "--filtration",
        "G",
        "--upto",
        "5",
        "--json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let pages = doc["results"]["pages"].as_array().unwrap();
    let by_n: BTreeMap<u64, &serde_json::Value> =
        pages.iter().map(|p| (p["n"].as_u64().unwrap(), &p["dims"])).collect();
    assert_eq!(by_n[&3], by_n[&4]);
    assert_eq!(by_n[&3], by_n[&5]);
}

#[test]
fn pages_accepts_lowercase_filtration_names() {
    let out = run(&["pages", fixture("hopf").to_str().unwrap(), "--filtration", "g"]);
    assert_eq!(exit_code(&out), 0);
}

// ---------------------------------------------------------------------------
// Check suites.
// ---------------------------------------------------------------------------

#[test]
fn check_single_suite_passes_on_the_trefoil() {
    let out = run(&["check", fixture("trefoil").to_str().unwrap(), "--suite", "mirror"]);
    assert_eq!(exit_code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("ok      mirror trefoil"), "report line, got {err:?}");
}

#[test]
fn check_requires_a_suite_selection() {
    let out = run(&["check", fixture("trefoil").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn check_all_fixtures_passes() {
    let dir = fixture("trefoil");
    let dir = dir.parent().unwrap();
    let out = run(&["check", dir.to_str().unwrap(), "--all"]);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(exit_code(&out), 0, "all suites pass, report:\n{err}");
    assert!(err.contains("0 failed, 0 errored"), "summary line, got {err:?}");
}

// ---------------------------------------------------------------------------
// Mirror.
// ---------------------------------------------------------------------------

#[test]
fn mirror_round_trips_and_negates_the_sign_census() {
    let out = run(&["mirror", fixture("trefoil").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let mirrored_text = stdout_of(&out);
    let mirrored = ikh::diagram::parse_diagram(&mirrored_text).expect("emitted IKD parses");
    let original = ikh::diagram::parse_diagram(
        &std::fs::read_to_string(fixture("trefoil")).unwrap(),
    )
    .unwrap();
    let positives = |d: &ikh::diagram::InvolutiveDiagram| {
        d.crossings.iter().filter(|c| c.sign > 0).count()
    };
    assert_eq!(positives(&original), 3);
    assert_eq!(positives(&mirrored), 0);
    assert_eq!(mirrored.mirror(), original, "mirroring twice returns the diagram");
}

#[test]
fn computing_on_mirror_output_satisfies_duality() {
    let out = run(&["mirror", fixture("trefoil").to_str().unwrap()]);
    let mirror_path = temp_file("trefoil_mirror.ikd", &stdout_of(&out));

    let table_of = |path: &Path| {
        let out = run(&["compute", path.to_str().unwrap(), "--json"]);
        assert_eq!(exit_code(&out), 0);
        let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
        json_table(&doc, "unreduced")
    };
    let original = table_of(&fixture("trefoil"));
    let mirrored = table_of(&mirror_path);
    let reflected: BTreeMap<(i32, i32, i32), u64> =
        original.iter().map(|(&(i, j, k2), &dim)| ((-i, -j, -k2), dim)).collect();
    assert_eq!(mirrored, reflected);
}
