use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_yaml::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morsecover"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

/// Value of a `key  value` line.
fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).filter(|r| r.starts_with(' ')).map(str::trim))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn pack_in_one_dimension_is_tight() {
    let o = run(&["pack", "--d", "1", "--container", "2", "--mindist", "1", "--anchored"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().skip_while(|l| !l.starts_with("lower")).nth(1).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols, ["5", "5", "true"]);
}

#[test]
fn pack_grid_witness_in_the_max_norm() {
    let o = run(&["pack", "--d", "2", "--norm", "linf", "--container", "2", "--mindist", "1", "--anchored"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().skip_while(|l| !l.starts_with("lower")).nth(1).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[0], "25");
    assert!(cols[1].parse::<u128>().unwrap() >= 25);
}

#[test]
fn pv_demo_approaches_minus_log_two() {
    let o = run(&["pv-demo", "--n", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("min")).unwrap().split_whitespace().collect();
    let sum: f64 = row[3].parse().unwrap();
    assert!((sum + std::f64::consts::LN_2).abs() < 1e-3, "{sum}");
    assert_eq!(field(&text, "abs_sum_increasing"), "true");
}

#[test]
fn integrate_square_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.yaml");
    let o = run(&["integrate", "--builtin", "square", "--eps", "1e-3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_yaml::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let v = cert["value"].as_f64().unwrap();
    assert!((0.33233..=0.33433).contains(&v), "{v}");
    assert_eq!(cert["verified"].as_bool(), Some(true));
    let listed = cert["cover"]["listing"].as_sequence().unwrap();
    assert!(!listed.is_empty());
    assert!(listed[0]["kind"].as_str().is_some());
    assert!(listed[0]["payload"]["radius"].as_f64().is_some());
}

#[test]
fn integrate_expression_in_two_dimensions() {
    let o = run(&["integrate", "--expr", "x*y", "--dim", "2", "--norm", "linf", "--eps", "2e-2", "--tol", "1e-4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_yaml::from_str(&stdout(&o)).unwrap();
    let v = cert["value"].as_f64().unwrap();
    assert!((v - 0.25).abs() < 2e-2 + 1e-4, "{v}");
}

#[test]
fn integrate_from_config_mixes_atom_and_density() {
    let o = run(&["integrate", "--config", &config("atom_jump.yaml")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_yaml::from_str(&stdout(&o)).unwrap();
    assert!((cert["value"].as_f64().unwrap() - 7.5).abs() < 1e-3);
    assert_eq!(cert["seed"].as_u64(), Some(3));
}

#[test]
fn reports_are_byte_identical_for_a_fixed_seed() {
    for args in [
        vec!["integrate", "--builtin", "sin_pi", "--seed", "5"],
        vec!["cover", "--config", &config("cover_square.yaml")],
        vec!["pack", "--d", "2", "--container", "2", "--mindist", "1", "--seed", "9", "--budget", "200"],
    ] {
        let (a, b) = (run(&args), run(&args));
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn single_thread_matches_default() {
    let args = ["integrate", "--builtin", "square", "--seed", "2"];
    let a = run(&args);
    let b = bin().args(args).env("MORSECOVER_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ae_cover_with_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("c.svg");
    let o = run(&["cover", "--config", &config("cover_square.yaml"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(field(&text, "verified"), "true");
    assert_eq!(field(&text, "m"), "1");
    let sets: usize = field(&text, "sets").parse().unwrap();
    let drawing = std::fs::read_to_string(svg).unwrap();
    assert_eq!(drawing.matches("<polygon").count(), sets);
}

fn colors(svg: &str) -> std::collections::BTreeSet<String> {
    svg.split("fill=\"").skip(1).map(|s| s.split('"').next().unwrap().to_string()).filter(|c| c != "black").collect()
}

#[test]
fn explicit_partition_colors_at_most_m_families() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("s.svg");
    let o = run(&["cover", "--config", &config("select_balls.yaml"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "uncovered_tags"), "[]");
    let m: usize = field(&text, "m").parse().unwrap();
    let drawing = std::fs::read_to_string(svg).unwrap();
    assert!(colors(&drawing).len() <= m);
    let selected: usize = field(&text, "selected").parse().unwrap();
    assert_eq!(drawing.matches("<polygon").count(), selected);
}

#[test]
fn validate_reports_a_failed_satellite_test() {
    let o = run(&["validate", "--config", &config("validate_shapes.yaml")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(field(&text, "valid"), "false");
    assert!(text.lines().filter(|l| l.contains(" true ")).count() >= 3);
}

#[test]
fn validate_accepts_a_satellite_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sat.yaml");
    std::fs::write(
        &cfg,
        "space: {dim: 2}\nsets:\n  - ball: {center: [0, 0], radius: 1}\n  - ball: {center: [1.3, 0], radius: 0.6}\n  - ball: {center: [1.05, 0.9], radius: 0.4}\nsatellite: {tau: 1.5}\n",
    )
    .unwrap();
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn malformed_config_is_line_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.yaml");
    std::fs::write(&cfg, "space:\n  dim: 2\nfamily:\n  kind: hexagons\n").unwrap();
    let o = run(&["cover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(&format!("{}:4:", cfg.display())), "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(run(&["cover"]).status.code(), Some(2));
    assert_eq!(run(&["integrate"]).status.code(), Some(2));
    assert_eq!(run(&["integrate", "--builtin", "cube"]).status.code(), Some(2));
    assert_eq!(run(&["integrate", "--builtin", "inv_sqrt"]).status.code(), Some(2));
    assert_eq!(run(&["pack", "--mindist", "0"]).status.code(), Some(2));
    assert_eq!(run(&["pv-demo", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn outputs_named_in_the_config_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("cover_square.yaml")).unwrap();
    let base = configs().display().to_string();
    let text = text.replace("unit_square", &format!("{base}/unit_square")) + "out: report.txt\nsvg: cover.svg\n";
    let cfg = dir.path().join("run.yaml");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["cover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(dir.path().join("report.txt")).unwrap(), o.stdout);
    assert!(dir.path().join("cover.svg").exists());
}
