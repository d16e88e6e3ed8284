use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use modelprior::{exact_posterior, load_csv, LoadOptions, PosteriorSummary, PriorFamily, SearchOptions};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modelprior"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(dir: &Path) -> PathBuf {
    let path = dir.join("fx.csv");
    let p = path.to_str().unwrap();
    ok(&["synthesize", "-n", "100", "-k", "10", "--support", "3,8", "--coefficient", "5", "--seed", "21", "-o", p]);
    path
}

fn inclusions(json: &str) -> Vec<f64> {
    let v: Value = serde_json::from_str(json).unwrap();
    v["variables"].as_array().unwrap().iter().map(|r| r["inclusion_probability"].as_f64().unwrap()).collect()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn analyze_round_trips_the_exact_summary() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = ok(&["analyze", data.to_str().unwrap(), "--prior", "jeffreys", "--method", "exact"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["summary"]["method"], "exact");
    let probs = inclusions(&out);
    assert_eq!(probs.len(), 10);
    let parsed: PosteriorSummary<f64> = serde_json::from_value(v["summary"].clone()).unwrap();
    let ds = load_csv::<f64>(&data, &LoadOptions::new("y")).unwrap();
    let direct = exact_posterior(&ds, &PriorFamily::jeffreys(), &SearchOptions::default()).unwrap();
    assert_eq!(parsed, direct);
    assert!(probs[2] > 0.9 && probs[7] > 0.9);
    assert_eq!(v["variables"][2]["annotation"], "HM");
    assert_eq!(v["hpm"]["variables"], serde_json::json!(["x3", "x8"]));
}

#[test]
fn uniform_inclusion_probabilities_exceed_jeffreys() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let p = data.to_str().unwrap();
    let u = inclusions(&ok(&["analyze", p, "--prior", "uniform"]));
    let j = inclusions(&ok(&["analyze", p, "--prior", "jeffreys"]));
    for (a, b) in u.iter().zip(&j) {
        assert!(a + 1e-6 >= *b, "{a} < {b}");
    }
}

#[test]
fn gibbs_output_is_reproducible_and_records_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let args = ["analyze", data.to_str().unwrap(), "--method", "gibbs", "--iterations", "3000", "--burn-in", "300", "--seed", "8"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["sampler"]["seed"], 8);
    assert_eq!(v["summary"]["hpm_is_exact"], false);
    assert_eq!(v["variables"][0]["mc_standard_error"].is_number(), true);
}

#[test]
fn bnb_method_reports_an_exact_hpm() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = ok(&["analyze", data.to_str().unwrap(), "--method", "bnb", "--enumeration-cap", "5", "--iterations", "2000", "--burn-in", "200"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["method"], "gibbs");
    assert_eq!(v["summary"]["hpm_is_exact"], true);
    assert_eq!(v["hpm"]["indices"], serde_json::json!([2, 7]));
}

#[test]
fn exit_codes_distinguish_data_and_numeric_failures() {
    let missing = run(&["analyze", "/nonexistent/file.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("loading data"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y,x1,x2\n1,2,3\n2,NA,1\n3,1,1\n4,5,2\n").unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));

    let exact = dir.path().join("exact.csv");
    let rows: String = (0..12).map(|i| format!("{},{},{}\n", 1 + 2 * i, i, (i * i) % 7)).collect();
    std::fs::write(&exact, format!("y,x1,x2\n{rows}")).unwrap();
    let out = run(&["analyze", exact.to_str().unwrap(), "--method", "exact"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(run(&["priors-table", "--priors", "nonsense"]).status.code(), Some(2));
}

#[test]
fn priors_table_is_deterministic_and_cacheable() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let first = bin().args(["figure1"]).env("MODELPRIOR_CACHE_DIR", &cache).output().unwrap();
    assert!(first.status.success());
    assert!(cache.join("cmg-k49.json").exists());
    let second = bin().args(["figure1"]).env("MODELPRIOR_CACHE_DIR", &cache).output().unwrap();
    let plain = bin().args(["figure1"]).env_remove("MODELPRIOR_CACHE_DIR").output().unwrap();
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, plain.stdout);

    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.starts_with("family,k,d,mass,log_per_model_prior\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 8 * 50);
    for r in rows.iter().filter(|r| r[0] == "jeffreys") {
        assert_eq!(r[3], "2.00000000000e-2");
    }
    let all = ok(&["priors-table", "-k", "12"]);
    assert_eq!(csv_rows(&all).len(), 9 * 13);
}

#[test]
fn inclusion_table_reports_exact_and_approximate_values() {
    let text = ok(&["inclusion-table"]);
    let rows = csv_rows(&text);
    let cell = |fam: &str, k: &str, col: usize| -> f64 {
        rows.iter().find(|r| r[0] == fam && r[1] == k).unwrap()[col].parse().unwrap()
    };
    assert!((cell("cmg", "5", 3) - 0.43).abs() <= 0.005);
    assert!((cell("harmonic", "20", 4) - 0.24).abs() <= 0.005);
    for k in ["1", "3", "5", "7", "9", "20", "200"] {
        assert!((cell("beta-binomial:1:2", k, 2) - 1.0 / 3.0).abs() < 1e-9);
    }
    let json: Value = serde_json::from_str(&ok(&["inclusion-table", "--format", "json", "--ks", "4"])).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn profile_peaks_at_the_true_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let text = ok(&["profile", data.to_str().unwrap(), "--priors", "uniform,jeffreys,cmg,half-p,half-k"]);
    let rows = csv_rows(&text);
    let ratios = |fam: &str| -> Vec<f64> { rows.iter().filter(|r| r[0] == fam).map(|r| r[2].parse().unwrap()).collect() };
    for fam in ["jeffreys", "cmg", "half-p", "half-k"] {
        let r = ratios(fam);
        assert_eq!(r[0], 0.0);
        let peak = r.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(peak, 2, "{fam}");
    }
    let two = rows.iter().find(|r| r[0] == "cmg" && r[1] == "2").unwrap();
    assert_eq!(two[5], "x3+x8");
    assert_eq!(two[4], "true");
}
