use std::fs;
use std::process::Command;

use approx::assert_relative_eq;
use rupture_analysis::{fit_exponent, Field};
use rupture_cli::config::Mode;
use rupture_cli::output::{read_csv, read_trace};
use rupture_cli::{parse_config, parse_config_with, run_in, serialize_config, ConfigError};

const TWO_STAGE: &str = r#"
mode = "simulate"
[model]
B = 1e-5
m = 3
n = 3
L = 2
[ic]
hbar = 0.5
delta = 0.01
[numerics]
N = 200
[output]
dir = "out"
"#;

fn quick_b1(dir: &str) -> String {
    format!(
        r#"
mode = "analyze"
[model]
B = 1.0
m = 3.0
n = 3.0
L = 0.6
[ic]
hbar = 0.1
delta = 0.01
[numerics]
N = 300
snapshots_fourth = []
snapshots_sixth = [1e-2, 5e-3]
[analysis]
family_steps = 8
[output]
dir = "{dir}"
"#
    )
}

#[test]
fn two_stage_document_parses() {
    let cfg = parse_config(TWO_STAGE).unwrap();
    assert_eq!(cfg.mode, Mode::Simulate);
    assert_eq!(cfg.model.bending, 1e-5);
    assert_eq!((cfg.model.m, cfg.model.n, cfg.model.length), (3.0, 3.0, 2.0));
    assert_eq!((cfg.ic.hbar, cfg.ic.delta, cfg.ic.mode), (0.5, 0.01, 1));
    let p = cfg.params().unwrap();
    assert_eq!(p.cells, 200);
    assert_eq!(p.disjoining_exp, 3.0);
}

#[test]
fn negative_exponent_names_the_field() {
    let err = parse_config(&TWO_STAGE.replace("m = 3\n", "m = -1\n")).unwrap_err();
    match &err {
        ConfigError::Invalid { field, .. } => assert_eq!(field, "model.m"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("model.m"));
}

#[test]
fn typos_and_missing_keys_are_errors() {
    assert!(matches!(parse_config(&TWO_STAGE.replace("hbar", "hbra")), Err(ConfigError::Schema(_))));
    assert!(matches!(parse_config(&TWO_STAGE.replace("L = 2\n", "")), Err(ConfigError::Schema(_))));
    assert!(matches!(parse_config(&TWO_STAGE.replace("N = 200", "N = \"many\"")), Err(ConfigError::Schema(_))));
    assert!(matches!(parse_config("mode = "), Err(ConfigError::Syntax(_))));
    assert!(parse_config(&TWO_STAGE.replace("delta = 0.01", "delta = 0.6")).is_err());
}

#[test]
fn round_trip_is_lossless() {
    let cfg = parse_config(TWO_STAGE).unwrap();
    let text = serialize_config(&cfg);
    assert_eq!(parse_config(&text).unwrap(), cfg);
    assert_eq!(serialize_config(&parse_config(&text).unwrap()), text);
}

#[test]
fn dotted_overrides_replace_keys() {
    let cfg = parse_config_with(
        TWO_STAGE,
        &["model.B=1".to_string(), "mode=stability".to_string(), "output.dir=elsewhere".to_string()],
    )
    .unwrap();
    assert_eq!(cfg.model.bending, 1.0);
    assert_eq!(cfg.mode, Mode::Stability);
    assert_eq!(cfg.output.dir, "elsewhere");
    assert!(matches!(parse_config_with(TWO_STAGE, &["model.B".to_string()]), Err(ConfigError::Override(_))));
    assert!(parse_config_with(TWO_STAGE, &["model.bogus=1".to_string()]).is_err());
}

#[test]
fn stability_table_covers_twenty_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_with(TWO_STAGE, &["mode=\"stability\"".to_string()]).unwrap();
    let done = run_in(&cfg, dir.path()).unwrap();
    assert_eq!(done.exit_code, 0);
    let t = read_csv(&dir.path().join("dispersion.csv")).unwrap();
    assert_eq!(t.columns, ["k", "lambda", "h_c"]);
    assert_eq!(t.rows.len(), 21);
    assert_eq!(t.rows[0][1], 0.0);
    // mode k grows iff hbar is below its critical thickness
    for r in &t.rows[1..] {
        assert_eq!(r[1] > 0.0, 0.5 < r[2]);
    }
    assert!(t.metadata.iter().any(|(k, v)| k == "model.B" && v.parse::<f64>().unwrap() == 1e-5));
}

#[test]
fn stable_film_reports_no_rupture_and_keeps_its_trace() {
    let dir = tempfile::tempdir().unwrap();
    let text = TWO_STAGE.replace("hbar = 0.5", "hbar = 1.5").replace("[output]", "t_max = 0.05\n[output]");
    let cfg = parse_config(&text).unwrap();
    let done = run_in(&cfg, dir.path()).unwrap();
    assert_eq!(done.exit_code, 0);
    let report = fs::read_to_string(dir.path().join("report.toml")).unwrap();
    let parsed: toml::Table = report.parse().unwrap();
    assert_eq!(parsed["run"]["status"].as_str(), Some("no rupture"));
    let trace = read_trace(&dir.path().join("trace.csv")).unwrap();
    assert!(trace.len() > 2);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = parse_config(&TWO_STAGE.replace("N = 200", "N = 100\nh_stop = 0.2")).unwrap();
    run_in(&cfg, a.path()).unwrap();
    run_in(&cfg, b.path()).unwrap();
    for f in ["trace.csv", "report.toml"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn report_exponents_match_the_written_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&quick_b1("unused")).unwrap();
    let done = run_in(&cfg, dir.path()).unwrap();
    assert_eq!(done.exit_code, 0);
    let report: toml::Table = fs::read_to_string(dir.path().join("report.toml")).unwrap().parse().unwrap();
    let late = &report["fit"]["late"]["nu"];
    let window = late["window"].as_array().unwrap();
    let (lo, hi) = (window[0].as_float().unwrap(), window[1].as_float().unwrap());
    let trace = read_trace(&dir.path().join("trace.csv")).unwrap();
    let refit = fit_exponent(&trace, Field::Hxx, (lo, hi)).unwrap();
    assert_eq!(refit.exponent, late["exponent"].as_float().unwrap());
    assert_relative_eq!(refit.coeff, late["coeff"].as_float().unwrap(), max_relative = 1e-15);
    assert!(dir.path().join("profile_sixth.csv").exists());
    let prof = read_csv(&dir.path().join("profile_sixth.csv")).unwrap();
    assert_eq!(prof.columns, ["eta", "H", "dH", "d2H"]);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, TWO_STAGE.replace("m = 3\n", "m = -1\n")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rupture")).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.m"));

    let good = dir.path().join("good.toml");
    fs::write(&good, TWO_STAGE).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rupture"))
        .arg(&good)
        .args(["--mode", "stability", "--out"])
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("run/dispersion.csv").exists());
}
