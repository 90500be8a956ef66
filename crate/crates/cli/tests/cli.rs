use std::path::PathBuf;

use fcl_cli::{run, run_with_env_seed, Outcome};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn fcl(args: &[&str]) -> Outcome {
    run(std::iter::once("fcl").chain(args.iter().copied()))
}

fn fcl_json(args: &[&str]) -> Value {
    let mut argv = vec!["--json"];
    argv.extend_from_slice(args);
    let out = fcl(&argv);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

/// Machine output never carries floating-point numbers.
fn assert_exact(v: &Value) {
    match v {
        Value::Number(n) => assert!(n.is_i64() || n.is_u64(), "non-integer number {n}"),
        Value::Array(a) => a.iter().for_each(assert_exact),
        Value::Object(o) => o.values().for_each(assert_exact),
        _ => {}
    }
}

#[test]
fn kollar_mld_bound_on_the_even_case() {
    let even2 = data("even2.json");
    let r = fcl_json(&["kollar", "--input", &even2, "--mld-bound"]);
    assert_eq!(r["results"]["mld_bound"]["branch"], "vertical-2d-1");
    assert_eq!(r["results"]["mld_bound"]["discrepancy"], "2");
    assert_eq!(r["results"]["mld_bound"]["bound"], "5");
    assert_eq!(r["certificates"]["mld_bound"]["certified"], true);
    assert_exact(&r);
    let human = fcl(&["kollar", "--input", &even2, "--mld-bound"]);
    assert!(human.stdout.contains("vertical-2d-1"), "{}", human.stdout);
}

#[test]
fn nvol_minimizes_the_toric_example() {
    let rays = "[[0,0,1],[0,2,1],[1,0,0]]";
    let out = fcl(&["nvol", "--rays", rays, "--minimize"]);
    assert_eq!(out.code, 0);
    assert!(
        out.stdout.contains("(1,2,2)") && out.stdout.contains("27/2 ≈ 13.5"),
        "{}",
        out.stdout
    );
    let r = fcl_json(&["nvol", "--rays", rays, "--minimize"]);
    assert_eq!(r["results"]["minimum"]["value"], "27/2");
    assert_eq!(r["results"]["minimum"]["xi_star"], serde_json::json!(["1", "2", "2"]));
    assert_exact(&r);
}

#[test]
fn nvol_evaluates_at_a_reeb_vector() {
    let r = fcl_json(&[
        "nvol",
        "--input",
        &data("example_cone.json"),
        "--xi",
        "1,2,2",
        "--xi",
        "(1,1,1)",
    ]);
    let evals = r["results"]["evaluations"].as_array().unwrap();
    assert_eq!(evals[0]["nvol"], "27/2");
    assert_eq!(evals[0]["volume"], "1/2");
    assert!(r["results"].get("minimum").is_none());
}

#[test]
fn hyper_screen_lists_the_quadric() {
    let out = fcl(&["hyper", "screen", "--dim", "3", "--volume", "16", "--max-degree", "12"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("(1,1,1,1;2)"));
    let csv = fcl(&[
        "hyper",
        "screen",
        "--dim",
        "3",
        "--volume",
        "16",
        "--max-degree",
        "12",
        "--csv",
    ]);
    assert!(csv.stdout.starts_with("weights,degree,nvol\n"));
    assert!(csv.stdout.contains("\"1,1,1,1\",2,16\n"));
    let r = fcl_json(&["hyper", "screen", "--dim", "3", "--volume", "16", "--max-degree", "12"]);
    assert_exact(&r);
}

#[test]
fn hyper_nvol_and_conditions() {
    let r = fcl_json(&["hyper", "nvol", "--weights", "(1,1,1,1;2)"]);
    assert_eq!(r["results"]["nvol"], "16");
    let r = fcl_json(&["hyper", "nvol", "--input", &data("quadric.json")]);
    assert_eq!(r["results"]["minimum"]["value"], "27/2");
    let r = fcl_json(&["hyper", "nvol", "--input", &data("quadric.json"), "--xi", "1,2,2"]);
    assert_eq!(r["results"]["evaluations"][0]["nvol"], "27/2");
    let r = fcl_json(&["hyper", "conditions", "--weights", "(1,1,2,3;4)", "--volume", "16"]);
    assert_eq!(r["results"]["all"], true);
    assert_eq!(r["results"]["conditions"]["nvol"], "18");
    let r = fcl_json(&["hyper", "conditions", "--weights", "(1,1,1,1;3)", "--volume", "16"]);
    assert_eq!(r["results"]["all"], false);
}

#[test]
fn hyper_degeneration_reports_both_thresholds() {
    let r = fcl_json(&["hyper", "degeneration", "--max-exponent", "6"]);
    assert_eq!(r["results"]["computed_threshold"], 5);
    assert_eq!(r["results"]["stated_threshold"], 5);
    let fires: Vec<bool> = r["results"]["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["obstruction"]["fires"].as_bool().unwrap())
        .collect();
    assert_eq!(fires, vec![false, false, false, false, true, true]);
    let r = fcl_json(&[
        "hyper",
        "degeneration",
        "--input",
        &data("quadric.json"),
        "--kernel",
        "[[5,0,-2]]",
        "--xi",
        "1,2,2",
    ]);
    assert_eq!(r["results"]["obstruction"]["fires"], true);
    let r = fcl_json(&[
        "hyper",
        "degeneration",
        "--input",
        &data("quadric.json"),
        "--kernel",
        "[[4,0,-2]]",
    ]);
    assert_eq!(r["results"]["obstruction"]["fires"], false);
}

#[test]
fn pdiv_and_discrepancy() {
    let r = fcl_json(&["pdiv", "--input", &data("non_klt.json")]);
    assert_eq!(r["results"]["type"], "(2,3,7)");
    assert_eq!(r["results"]["klt"], false);
    let r = fcl_json(&["pdiv", "--input", &data("type123.json")]);
    assert_eq!(r["results"]["klt"], true);
    for p in r["results"]["prime_divisors"].as_array().unwrap() {
        assert!(p["a"] == "1" || p["a"] == "1/3", "{p}");
    }
    let r = fcl_json(&[
        "discrepancy",
        "--input",
        &data("type123.json"),
        "--divisor",
        r#"{"horizontal": [1, 1]}"#,
        "--canonical",
        r#"{"1": -2}"#,
    ]);
    assert_eq!(r["results"]["discrepancies"][0]["a"], "1");
    assert_eq!(r["input"]["canonical"]["1"], -2);
}

#[test]
fn kollar_explicit_components() {
    let even2 = data("even2.json");
    let r = fcl_json(&[
        "kollar",
        "--input",
        &even2,
        "--vertical",
        "∞:1,1",
        "--horizontal",
        "1,1",
        "--sigma",
        "∞",
    ]);
    assert_eq!(r["results"]["vertical"][0]["component"]["discrepancy"], "2");
    assert_eq!(r["results"]["horizontal"][0]["is_kollar"], true);
    assert!(r["results"]["sigma"]["∞"].is_object());
    assert!(r["results"].get("mld_bound").is_none());
}

#[test]
fn echoed_inputs_round_trip() {
    let dir = std::env::temp_dir().join(format!("fcl-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["pdiv"], "type123.json"),
        (&["kollar"], "even2.json"),
        (&["nvol"], "example_cone.json"),
        (&["hyper", "nvol"], "quadric.json"),
    ];
    for (i, (cmd, file)) in cases.iter().enumerate() {
        let mut argv = cmd.to_vec();
        let src = data(file);
        argv.extend(["--input", src.as_str()]);
        let first = fcl_json(&argv);
        let echoed = dir.join(format!("{i}.json"));
        std::fs::write(&echoed, serde_json::to_string(&first["input"]).unwrap()).unwrap();
        let mut argv = cmd.to_vec();
        let path = echoed.display().to_string();
        argv.extend(["--input", path.as_str()]);
        let second = fcl_json(&argv);
        assert_eq!(first["input"], second["input"], "{file}");
        assert_eq!(first["input_digest"], second["input_digest"], "{file}");
        assert_eq!(first["results"], second["results"], "{file}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_are_deterministic() {
    let args = ["--json", "kollar", "--input", &data("type123.json")];
    assert_eq!(fcl(&args), fcl(&args));
    let r = fcl_json(&["--timing", "hyper", "nvol", "--weights", "(1,1,1,1;2)"]);
    assert!(r["timing_ms"].is_u64());
    let r = fcl_json(&["hyper", "nvol", "--weights", "(1,1,1,1;2)"]);
    assert!(r.get("timing_ms").is_none());
}

#[test]
fn exit_codes() {
    assert_eq!(fcl(&["--help"]).code, 0);
    assert_eq!(fcl(&["--version"]).code, 0);
    assert_eq!(fcl(&["bogus"]).code, 1);
    assert_eq!(fcl(&["nvol"]).code, 1);
    let bad = fcl(&["pdiv", "--input", &data("malformed.json")]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("line 4"), "{}", bad.stderr);
    assert_eq!(fcl(&["pdiv", "--input", &data("missing.json")]).code, 1);
    assert_eq!(fcl(&["nvol", "--rays", "[[1, 0.5]]"]).code, 1);
    assert_eq!(fcl(&["hyper", "nvol", "--weights", "(1,1;x)"]).code, 1);
    // Mathematical failures exit with 2.
    let non_klt = fcl(&["kollar", "--input", &data("non_klt.json")]);
    assert_eq!(non_klt.code, 2);
    assert!(non_klt.stderr.contains("Σ b_y < 2"), "{}", non_klt.stderr);
    let r = fcl(&["--json", "kollar", "--input", &data("non_klt.json")]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["exit_code"], 2);
    assert_eq!(fcl(&["hyper", "nvol", "--weights", "(1,1,1;4)"]).code, 2);
}

#[test]
fn selftest_filters_and_seeds() {
    let out = fcl(&["selftest", "--filter", "toric"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("[PASS] 1 ") && lines[1].starts_with("[PASS] 2 "));
    assert_eq!(fcl(&["selftest", "--filter", "nonsense"]).code, 1);
    let argv = [
        "fcl", "--json", "--seed", "3", "selftest", "--filter", "disc", "--n", "5",
    ];
    let seeded: Value = serde_json::from_str(&run_with_env_seed(argv, Some("42".into())).stdout).unwrap();
    assert_eq!(seeded["results"]["seed"], 42);
    assert_eq!(seeded["results"]["criteria"][0]["passed"], true);
    let plain: Value = serde_json::from_str(&run_with_env_seed(argv, None).stdout).unwrap();
    assert_eq!(plain["results"]["seed"], 3);
}
