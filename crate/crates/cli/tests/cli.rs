use std::path::PathBuf;
use std::process::{Command, Output};

fn confocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confocal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = confocal(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Header and data rows of a CSV, metadata lines dropped.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("confocal-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn lower_bounds_for_three_dimensions() {
    let (header, rows) = table(&stdout(&["lower-bounds", "--n", "2"]));
    assert_eq!(header, ["sigma", "bits", "kappa"]);
    let got: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[2].as_str())).collect();
    assert_eq!(got, [("EH1", "5"), ("EH2", "5"), ("H1H1", "4"), ("H1H2", "6")]);
}

#[test]
fn cayley_detects_period_two_on_the_hyperbola() {
    // lambda = 0.8 gives period two when b = 4a / 9, up to the rounding of 4/9
    let (_, rows) = table(&stdout(&[
        "cayley", "--axes", "1,4/9", "--lambda", "0.8", "--mmax", "4",
    ]));
    let residual = |m: &str| rows.iter().find(|r| r[0] == m).unwrap()[3].parse::<f64>().unwrap();
    assert!(residual("2") < 1e-14, "{}", residual("2"));
    assert!(residual("3") > 1e-3, "{}", residual("3"));
}

#[test]
fn bifurcation_curve_of_the_period_four_frequency() {
    let (header, rows) = table(&stdout(&[
        "bifurcate",
        "--sigma",
        "h1h1",
        "--omega",
        "3/8,1/4",
        "--b",
        "0.1:0.9:5",
    ]));
    assert_eq!(header, ["b", "c", "full", "status"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let (b, c): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert_eq!(r[3], "ok");
        assert!((c - b / (1.0 + b)).abs() < 1e-8, "g({b}) = {c}");
    }
}

#[test]
fn periodic_recovers_winding_numbers() {
    let out = stdout(&[
        "periodic",
        "--axes",
        "0.25,0.5,1",
        "--sigma",
        "h1h1",
        "--omega",
        "3/8,1/4",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "confocal/1");
    assert_eq!(v["command"], "periodic");
    assert_eq!(v["winding"], serde_json::json!([4, 3, 2]));
    assert!(v["closure_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn orbit_rows_and_metadata() {
    let csv = stdout(&["orbit", "--axes", "0.25,0.5,1", "--lambda", "0.1,0.3", "--steps", "500"]);
    assert!(csv.lines().any(|l| l == "# sigma=EH1"));
    let (header, rows) = table(&csv);
    assert_eq!(header.len(), 1 + 3 + 3 + 2);
    assert_eq!(rows.len(), 501);
    for r in &rows {
        let l1: f64 = r[7].parse().unwrap();
        assert!((l1 - 0.1).abs() < 1e-9);
    }
}

#[test]
fn random_orbits_depend_only_on_the_seed() {
    let run = |seed: &str| confocal(&["orbit", "--axes", "0.3,0.6,1", "--steps", "50", "--seed", seed]).stdout;
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn freq_reports_the_schema() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["freq", "--axes", "4/9,1", "--lambda", "0.8"])).unwrap();
    assert_eq!(v["schema"], "confocal/1");
    assert_eq!(v["sigma"], "H");
    assert!((v["omega"][0].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn out_prefix_writes_every_artifact() {
    let dir = scratch("range");
    let prefix = dir.join("ranges");
    let out = confocal(&[
        "range",
        "--axes",
        "0.25,0.5,1",
        "--sigma",
        "eh1",
        "-o",
        prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    for ext in ["csv", "svg", "json"] {
        let text = std::fs::read_to_string(prefix.with_extension(ext)).unwrap();
        assert!(!text.is_empty(), "{ext}");
    }
    let svg = std::fs::read_to_string(prefix.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    // clap usage errors
    assert_eq!(confocal(&["orbit"]).status.code(), Some(2));
    // domain errors from the library
    assert_eq!(
        confocal(&["freq", "--axes", "1,1,0.5", "--lambda", "0.1,0.7"])
            .status
            .code(),
        Some(2)
    );
    let outside = confocal(&[
        "periodic",
        "--axes",
        "0.25,0.5,1",
        "--sigma",
        "eh1",
        "--omega",
        "0.49,0.01",
    ]);
    assert_eq!(outside.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&outside.stderr).starts_with("confocal: "));
    // unwritable output
    assert_eq!(
        confocal(&["lower-bounds", "--n", "1", "-o", "/dev/null/x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn planar_orbit_keeps_its_caustic() {
    let csv = stdout(&[
        "orbit",
        "--axes",
        "1,0.444444",
        "--phi",
        "0.3",
        "--r",
        "0.1",
        "--steps",
        "500",
    ]);
    let (header, rows) = table(&csv);
    assert_eq!(header, ["step", "q1", "q2", "p1", "p2", "lambda1"]);
    assert_eq!(rows.len(), 501);
    let lambda: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(lambda.iter().all(|l| (l - lambda[0]).abs() < 1e-12));
}

#[test]
fn tangent_start_is_rejected() {
    let out = confocal(&["orbit", "--axes", "1,0.5", "--phi", "0", "--r", "0.7071067811865476"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn frequency_on_the_geodesic_edge() {
    // lambda_1 = c puts omega_1 at its upper limit
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["freq", "--axes", "0.25,0.5,1", "--lambda", "0.25,0.7"])).unwrap();
    assert_eq!(v["omega"][0].as_f64().unwrap(), 0.5);
    assert_ne!(v["edge"], "Interior");
}

#[test]
fn bifurcation_curve_ends_at_one_half() {
    let (_, rows) = table(&stdout(&[
        "bifurcate",
        "--sigma",
        "h1h1",
        "--omega",
        "3/8,1/4",
        "--b",
        "0.999:0.999:1",
    ]));
    let c: f64 = rows[0][1].parse().unwrap();
    assert!((c - 0.5).abs() < 1e-3, "{c}");
}
