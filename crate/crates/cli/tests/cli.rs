use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kakeya(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kakeya"))
        .args(args)
        .env_remove("KAKEYA_BUDGET")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn bounds_profile_for_17() {
    let out = kakeya(&["bounds", "--q", "17"]);
    assert!(out.status.success());
    let p = json(&out);
    assert_eq!(p["theorem_size_cutoff"], 238);
    assert_eq!(p["corollary_cutoff"], 241);
    assert_eq!(p["theorem_min"], "52");
    assert_eq!(p["kappa_floor"], 3);
    let ivs: Vec<(u64, u64)> = p["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| (i["lo"].as_u64().unwrap(), i["hi"].as_u64().unwrap()))
        .collect();
    assert_eq!(ivs, vec![(289, 289), (273, 273), (258, 259), (244, 247)]);
}

#[test]
fn bounds_table_is_csv() {
    let out = kakeya(&["bounds", "--q", "5", "--table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,f,g,h,lo,hi");
    assert_eq!(rows.len(), 7);
    // k = 2: f = 10/4, g = 6, h = 7, interval [18, 19].
    assert_eq!(rows[3], "2,5/2,6,7,18,19");
}

#[test]
fn bounds_lemmas_pass() {
    let out = kakeya(&["bounds", "--q", "12", "--lemmas"]);
    assert!(out.status.success());
    let r = json(&out);
    assert!(r["items"]
        .as_array()
        .unwrap()
        .iter()
        .all(|i| i["status"] == "pass"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(kakeya(&["bounds"]).status.code(), Some(2));
    assert_eq!(
        kakeya(&["search", "--q", "3", "--mode", "sample"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kakeya(&["plane", "--q", "3", "--plane", "x"]).status.code(),
        Some(2)
    );
    let out = kakeya(&["search", "--q", "3", "--jobs", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--jobs"));
}

#[test]
fn domain_errors_exit_1_with_kind() {
    let out = kakeya(&["plane", "--q", "6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("NotAPrimePower"), "{}", stderr(&out));

    let out = kakeya(&["construct", "--family", "dual_hyperoval", "--q", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("OddOrder"), "{}", stderr(&out));

    let out = kakeya(&["construct", "--family", "spiral", "--q", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("UnknownFamily"));
}

#[test]
fn parallel_lines_in_selection_are_rejected() {
    // Lines 0 and 1 are both in class 0 of AG(2,3).
    let sel = tmp("parallel.sel");
    std::fs::write(&sel, "0 1 6 9\n").unwrap();
    let out = kakeya(&["analyze", "--q", "3", "--selection", sel.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("SelectionClassMismatch"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn construct_writes_files_and_analysis() {
    let sel = tmp("dho8.sel");
    let plane = tmp("dho8.plane");
    let out = kakeya(&[
        "construct",
        "--family",
        "dual-hyperoval",
        "--q",
        "8",
        "--out",
        sel.to_str().unwrap(),
        "--plane-out",
        plane.to_str().unwrap(),
        "--emit-json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["analysis"]["size"], 36);
    assert_eq!(v["expected_size"], 36);
    assert_eq!(v["family"], "dual_hyperoval");

    let again = kakeya(&[
        "analyze",
        "--plane",
        plane.to_str().unwrap(),
        "--selection",
        sel.to_str().unwrap(),
    ]);
    assert!(again.status.success());
    let a = json(&again);
    assert_eq!(a["size"], 36);
    assert_eq!(a["identities"]["pairs"], true);
    assert_eq!(a["verdict"]["verdict"], "unclassified");
    // Every covered point is a 2-knot.
    assert_eq!(a["spectrum"][1], 0);
    assert_eq!(a["spectrum"][2], 36);
}

#[test]
fn baer_selection_needs_its_own_plane() {
    let sel = tmp("baer9.sel");
    let plane = tmp("baer9.plane");
    let out = kakeya(&[
        "construct",
        "--family",
        "baer",
        "--q",
        "9",
        "--m-choice",
        "2",
        "--out",
        sel.to_str().unwrap(),
        "--plane-out",
        plane.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let a = json(&kakeya(&[
        "analyze",
        "--plane",
        plane.to_str().unwrap(),
        "--selection",
        sel.to_str().unwrap(),
    ]));
    assert_eq!(a["size"], 63);
    assert_eq!(a["max_knot"]["j"], 4);
    assert_eq!(a["verdict"]["verdict"], "unclassified");
}

#[test]
fn analyze_reports_point_views() {
    let sel = tmp("pencil4.sel");
    kakeya(&[
        "construct",
        "--family",
        "near_pencil",
        "--q",
        "4",
        "--out",
        sel.to_str().unwrap(),
    ]);
    let a = json(&kakeya(&[
        "analyze",
        "--q",
        "4",
        "--selection",
        sel.to_str().unwrap(),
        "--point",
        "0",
    ]));
    assert_eq!(a["size"], 13);
    assert_eq!(
        a["verdict"],
        serde_json::json!({"verdict": "conforms", "k": 1})
    );
    assert_eq!(a["point"]["incidence"], 4);
    assert_eq!(a["point"]["missing_p"].as_array().unwrap().len(), 1);
    assert_eq!(
        a["point"]["unchosen_through_p"].as_array().unwrap().len(),
        1
    );
}

#[test]
fn search_report_schema() {
    let out = kakeya(&["search", "--q", "4"]);
    assert!(out.status.success());
    let r = json(&out);
    for key in [
        "q",
        "mode",
        "reduced",
        "attained",
        "witnesses",
        "max_knots",
        "conformance",
        "gaps",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["mode"], "exhaustive");
    assert_eq!(r["gaps"], serde_json::json!([14, 15]));
    assert_eq!(r["witnesses"]["13"].as_array().unwrap().len(), 5);

    let s = json(&kakeya(&[
        "search", "--q", "4", "--mode", "sample", "--n", "10", "--seed", "3",
    ]));
    assert_eq!(
        s["mode"],
        serde_json::json!({"sampled": {"n": 10, "seed": 3}})
    );
    assert_eq!(s["evaluations"], 10);
}

#[test]
fn search_keys_are_sorted() {
    let out = kakeya(&["search", "--q", "3", "--pretty"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
}

#[test]
fn budget_env_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_kakeya"))
        .args(["search", "--q", "4"])
        .env("KAKEYA_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("BudgetExceeded"));
    let out = Command::new(env!("CARGO_BIN_EXE_kakeya"))
        .args(["search", "--q", "4", "--reduce"])
        .env("KAKEYA_BUDGET", "1000")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn big_search_needs_opt_in() {
    let out = kakeya(&["search", "--q", "9", "--reduce"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("BigSearchNotAllowed"));
}

#[test]
fn reduction_refused_for_loaded_planes() {
    let plane = tmp("ag3.plane");
    kakeya(&["plane", "--q", "3", "--out", plane.to_str().unwrap()]);
    let out = kakeya(&["search", "--plane", plane.to_str().unwrap(), "--reduce"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ReductionUnavailable"));
}

#[test]
fn malformed_plane_files() {
    let plane = tmp("broken.plane");
    std::fs::write(&plane, "q 2\nL zero 0 1\n").unwrap();
    let out = kakeya(&["plane", "--plane", plane.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Parse"), "{}", stderr(&out));

    std::fs::write(&plane, "q 2\nL 0 0 1\nL 0 2 3\n").unwrap();
    let out = kakeya(&["plane", "--plane", plane.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("AxiomViolation"), "{}", stderr(&out));
}

#[test]
fn verify_q4() {
    let out = kakeya(&["verify", "--q", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let dho = v["constructions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["family"] == "dual_hyperoval")
        .unwrap();
    assert_eq!(dho["size"], 10);
    let conf: Vec<u64> = v["search"]["summary"]["conforming"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p[0].as_u64().unwrap())
        .collect();
    assert_eq!(conf, vec![13, 16]);
    // Idempotent.
    assert_eq!(kakeya(&["verify", "--q", "4"]).stdout, out.stdout);
}

#[test]
fn verify_q9_skips_search_without_big() {
    let out = kakeya(&["verify", "--q", "9"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["search"]["status"], "skipped");
    assert_eq!(v["search"]["reason"], "BigSearchNotAllowed");
    let baer = v["constructions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["family"] == "baer")
        .unwrap();
    assert_eq!(baer["size"], 63);
}
