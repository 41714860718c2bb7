use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use rupture_analysis::{
    collapse_error, detect_transition, fit_exponent, AnalysisError, CollapseMetric, Field, ScalingFit,
    TransitionReport,
};
use rupture_core::{make_initial_condition, FilmState, Grid};
use rupture_linear::{dispersion_table, DispersionPoint};
use rupture_pde::{run_to_rupture, RunOutcome, RunStatus};
use rupture_similarity::{enumerate_family, scalings, Order, SimilarityError, SimilarityProfile};

use crate::config::{serialize_config, sweep_run_id, Mode, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_csv, write_profile, write_snapshot, write_trace, Report, Value};

/// Relative slack allowed on a single energy increase.
pub const ENERGY_SLACK: f64 = 1e-10;

/// Mass drift and energy monotonicity over a whole trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    /// max |M(t) - M(0)| / M(0)
    pub mass_drift: f64,
    /// Accepted steps whose energy rose by more than the slack.
    pub energy_violations: usize,
    /// Largest relative energy rise seen (0 if it never rose).
    pub max_energy_rise: f64,
}

pub fn conservation(outcome: &RunOutcome) -> Conservation {
    let recs = &outcome.trace.records;
    let m0 = recs.first().map_or(0.0, |r| r.mass);
    let mass_drift = recs.iter().fold(0.0f64, |a, r| a.max((r.mass - m0).abs() / m0.abs()));
    let mut energy_violations = 0;
    let mut max_energy_rise = 0.0f64;
    for w in recs.windows(2) {
        let rise = (w[1].energy - w[0].energy) / w[0].energy.abs().max(f64::MIN_POSITIVE);
        max_energy_rise = max_energy_rise.max(rise);
        if rise > ENERGY_SLACK {
            energy_violations += 1;
        }
    }
    Conservation {
        mass_drift,
        energy_violations,
        max_energy_rise,
    }
}

pub fn initial_state(cfg: &RunConfig) -> Result<FilmState, CliError> {
    let params = cfg.params()?;
    let grid = Grid::new(params.length, params.cells).map_err(crate::ConfigError::from)?;
    Ok(make_initial_condition(&cfg.initial_condition()?, &grid).map_err(crate::ConfigError::from)?)
}

pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let params = cfg.params()?;
    let ic = initial_state(cfg)?;
    let mut schedule = cfg.numerics.snapshots_fourth.clone();
    schedule.extend(&cfg.numerics.snapshots_sixth);
    Ok(run_to_rupture(&ic, &params, &schedule)?)
}

/// Distinct solutions of one order, primary first. `None` when the
/// order's scalings do not apply to (m, n).
pub fn similarity_family(cfg: &RunConfig, order: Order) -> Result<Option<Vec<SimilarityProfile>>, CliError> {
    match scalings(order, cfg.model.m, cfg.model.n) {
        Ok(s) if s.regime_valid => {}
        Ok(_) | Err(SimilarityError::InvalidRegime { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let pb = cfg.analysis.similarity_problem(order, &cfg.model);
    let [lo, hi] = cfg.analysis.h0_range;
    Ok(Some(enumerate_family(&pb, (lo, hi), cfg.analysis.family_steps)?))
}

#[derive(Debug, Clone)]
pub struct ExponentFits {
    pub nu: ScalingFit,
    pub mu: ScalingFit,
}

fn fit_pair(outcome: &RunOutcome, window: (f64, f64)) -> Result<ExponentFits, AnalysisError> {
    Ok(ExponentFits {
        nu: fit_exponent(&outcome.trace, Field::Hxx, window)?,
        mu: fit_exponent(&outcome.trace, Field::Hxxxx, window)?,
    })
}

/// Everything derived from one simulation.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub conservation: Conservation,
    pub fourth_family: Option<Vec<SimilarityProfile>>,
    pub sixth_family: Vec<SimilarityProfile>,
    pub transition: Result<TransitionReport, AnalysisError>,
    pub early: Option<Result<ExponentFits, AnalysisError>>,
    pub late: Result<ExponentFits, AnalysisError>,
    pub collapse_fourth: Option<Result<Vec<CollapseMetric>, AnalysisError>>,
    pub collapse_sixth: Result<Vec<CollapseMetric>, AnalysisError>,
}

fn snapshots_for(outcome: &RunOutcome, thresholds: &[f64]) -> Vec<FilmState> {
    outcome
        .snapshots
        .iter()
        .filter(|(th, _)| thresholds.contains(th))
        .map(|(_, s)| s.clone())
        .collect()
}

pub fn analyze(cfg: &RunConfig, outcome: &RunOutcome) -> Result<Analysis, CliError> {
    let (m, n) = (cfg.model.m, cfg.model.n);
    let fourth_family = similarity_family(cfg, Order::Fourth)?;
    let sixth_family = similarity_family(cfg, Order::Sixth)?
        .ok_or_else(|| CliError::Analysis(format!("no sixth-order similarity regime for m = {m}, n = {n}")))?;

    let transition = detect_transition(&outcome.trace, m, n, cfg.model.bending, outcome.t_c_estimate, &cfg.analysis.transition());
    let early_window = cfg
        .analysis
        .early_window
        .map(|[lo, hi]| (lo, hi))
        .or_else(|| transition.as_ref().ok().and_then(|t| t.fourth_plateau));
    let early = early_window.map(|w| fit_pair(outcome, w));
    let h_end = outcome.trace.last().map_or(f64::NAN, |r| r.h_min);
    let late = fit_pair(outcome, (h_end, h_end * 10f64.powf(cfg.analysis.late_decades)));

    // the final location is the best estimate of the rupture point
    let x_c = outcome.trace.last().map_or(0.0, |r| r.x_c);
    let collapse = |profile: &SimilarityProfile, thresholds: &[f64]| {
        let snaps = snapshots_for(outcome, thresholds);
        collapse_error(&snaps, profile, &profile.scalings, x_c)
    };
    let collapse_fourth = fourth_family
        .as_ref()
        .map(|f| collapse(&f[0], &cfg.numerics.snapshots_fourth));
    let collapse_sixth = collapse(&sixth_family[0], &cfg.numerics.snapshots_sixth);
    Ok(Analysis {
        conservation: conservation(outcome),
        fourth_family,
        sixth_family,
        transition,
        early,
        late,
        collapse_fourth,
        collapse_sixth,
    })
}

/// What a finished invocation produced.
#[derive(Debug, Clone)]
pub struct Completed {
    pub report: Report,
    pub files: Vec<PathBuf>,
    /// Set when artifacts are partial; the process should exit nonzero.
    pub failure: Option<String>,
    pub exit_code: i32,
}

/// Flattened `section.key` pairs of the full configuration.
fn config_entries(cfg: &RunConfig) -> Vec<(String, toml::Value)> {
    let table: toml::Table = toml::from_str(&serialize_config(cfg)).expect("serialized config parses");
    let mut out = Vec::new();
    for (k, v) in table {
        match v {
            toml::Value::Table(t) => out.extend(t.into_iter().map(|(k2, v2)| (format!("{k}.{k2}"), v2))),
            other => out.push((k, other)),
        }
    }
    out
}

/// Metadata lines for artifact headers: enough to rerun the experiment.
fn provenance(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut meta = vec![("code".to_string(), format!("rupture {}", env!("CARGO_PKG_VERSION")))];
    meta.extend(config_entries(cfg).into_iter().map(|(k, v)| (k, v.to_string())));
    meta.push(("h_stop_used".to_string(), num(cfg.h_stop())));
    meta
}

fn report_value(v: toml::Value) -> Value {
    match v {
        toml::Value::Float(f) => Value::Num(f),
        toml::Value::Integer(i) => Value::Int(i),
        toml::Value::Boolean(b) => Value::Bool(b),
        toml::Value::String(s) => Value::Str(s),
        toml::Value::Array(a) if a.iter().all(|x| x.as_float().is_some()) => {
            Value::Nums(a.iter().filter_map(|x| x.as_float()).collect())
        }
        other => Value::Str(other.to_string()),
    }
}

fn config_report(cfg: &RunConfig) -> Report {
    let mut r = Report::new();
    r.set("provenance", "code", format!("rupture {}", env!("CARGO_PKG_VERSION")));
    r.set("provenance", "cells", cfg.numerics.cells);
    r.set("provenance", "dx", cfg.model.length / cfg.numerics.cells as f64);
    r.set("provenance", "h_stop_used", cfg.h_stop());
    for (k, v) in config_entries(cfg) {
        let (section, key) = match k.split_once('.') {
            Some((s, key)) => (format!("config.{s}"), key.to_string()),
            None => ("config".to_string(), k),
        };
        r.set(&section, &key, report_value(v));
    }
    r
}

fn fits_into(report: &mut Report, section: &str, fits: &Result<ExponentFits, AnalysisError>) {
    match fits {
        Ok(f) => {
            for (name, fit) in [("nu", &f.nu), ("mu", &f.mu)] {
                let s = format!("{section}.{name}");
                report.set(&s, "exponent", fit.exponent);
                report.set(&s, "coeff", fit.coeff);
                report.set(&s, "window", fit.window);
                report.set(&s, "rms_residual", fit.rms_residual);
                report.set(&s, "points", fit.points);
            }
        }
        Err(e) => {
            report.set(section, "error", e.to_string());
        }
    }
}

fn family_into(report: &mut Report, section: &str, family: &[SimilarityProfile]) {
    let p = &family[0];
    report.set(section, "primary_h0", p.h0);
    report.set(section, "primary_rule", "largest H(0) among distinct valid solutions");
    report.set(section, "branch_h0", family.iter().map(|f| f.h0).collect::<Vec<_>>());
    report.set(section, "residual", p.residual_norm);
    report.set(section, "farfield_coeff", p.farfield_coeff());
    report.set(section, "d2h_sign_changes", p.d2h_sign_changes());
    report.set(section, "alpha", p.scalings.alpha);
    report.set(section, "beta", p.scalings.beta);
    report.set(section, "eta_max", p.eta_max());
    report.set(section, "B", p.bending);
}

fn collapse_into(report: &mut Report, section: &str, metrics: &Result<Vec<CollapseMetric>, AnalysisError>) {
    match metrics {
        Ok(ms) => {
            report.set(section, "h_min", ms.iter().map(|c| c.h_min).collect::<Vec<_>>());
            report.set(section, "t", ms.iter().map(|c| c.t).collect::<Vec<_>>());
            report.set(section, "error", ms.iter().map(|c| c.error).collect::<Vec<_>>());
            report.set(section, "eta_window", ms.iter().map(|c| c.eta_window).collect::<Vec<_>>());
            report.set(section, "shrunk", ms.iter().any(|c| c.shrunk));
        }
        Err(e) => {
            report.set(section, "error_message", e.to_string());
        }
    }
}

fn run_into(report: &mut Report, outcome: &RunOutcome) {
    report.set("run", "status", outcome.status.name());
    report.set("run", "partial", outcome.status == RunStatus::Stalled);
    if let Some(f) = &outcome.failure {
        report.set("run", "failure", f.to_string());
    }
    if let Some(tc) = outcome.t_c_estimate {
        report.set("run", "t_c_estimate", tc);
    }
    if let Some(last) = outcome.trace.last() {
        report.set("run", "t_final", last.t);
        report.set("run", "h_min_final", last.h_min);
        report.set("run", "x_c", last.x_c);
    }
    report.set("run", "accepted_steps", outcome.accepted_steps);
    report.set("run", "rejected_steps", outcome.rejected_steps);
    report.set("run", "newton_iterations", outcome.newton_iterations);
    let c = conservation(outcome);
    report.set("conservation", "mass_drift", c.mass_drift);
    report.set("conservation", "energy_violations", c.energy_violations);
    report.set("conservation", "max_energy_rise", c.max_energy_rise);
}

fn write_run_files(dir: &Path, cfg: &RunConfig, outcome: &RunOutcome) -> Result<Vec<PathBuf>, CliError> {
    let mut meta = provenance(cfg);
    meta.push(("status".to_string(), outcome.status.name().to_string()));
    let mut files = Vec::new();
    let trace = dir.join("trace.csv");
    write_trace(&trace, &meta, &outcome.trace)?;
    files.push(trace);
    for (i, (th, state)) in outcome.snapshots.iter().enumerate() {
        let mut m = meta.clone();
        m.push(("threshold".to_string(), num(*th)));
        m.push(("t".to_string(), num(state.t)));
        let path = dir.join(format!("snapshot_{i:02}.csv"));
        write_snapshot(&path, &m, state)?;
        files.push(path);
    }
    Ok(files)
}

fn write_family_files(dir: &Path, cfg: &RunConfig, order: Order, family: &[SimilarityProfile]) -> Result<PathBuf, CliError> {
    let mut meta = provenance(cfg);
    let p = &family[0];
    meta.push(("order".to_string(), order.to_string()));
    meta.push(("branch_index".to_string(), p.branch_index.to_string()));
    meta.push(("primary_rule".to_string(), "largest H(0)".to_string()));
    meta.push(("H0".to_string(), num(p.h0)));
    let path = dir.join(format!("profile_{order}.csv"));
    write_profile(&path, &meta, p)?;
    Ok(path)
}

fn simulate_mode(cfg: &RunConfig, dir: &Path) -> Result<Completed, CliError> {
    let outcome = simulate(cfg)?;
    let mut report = config_report(cfg);
    run_into(&mut report, &outcome);
    let mut files = write_run_files(dir, cfg, &outcome)?;
    finish(dir, report, &mut files, &outcome)
}

fn finish(dir: &Path, report: Report, files: &mut Vec<PathBuf>, outcome: &RunOutcome) -> Result<Completed, CliError> {
    let path = dir.join("report.toml");
    report.write(&path)?;
    files.push(path);
    let failure = outcome.failure.as_ref().map(|e| e.to_string());
    let exit_code = if failure.is_some() { 3 } else { 0 };
    Ok(Completed {
        report,
        files: std::mem::take(files),
        failure,
        exit_code,
    })
}

fn similarity_mode(cfg: &RunConfig, dir: &Path) -> Result<Completed, CliError> {
    let mut report = config_report(cfg);
    let mut files = Vec::new();
    for order in [Order::Fourth, Order::Sixth] {
        let section = format!("similarity.{order}");
        match similarity_family(cfg, order)? {
            Some(family) => {
                family_into(&mut report, &section, &family);
                files.push(write_family_files(dir, cfg, order, &family)?);
            }
            None => {
                report.set(&section, "skipped", "scalings do not apply to (m, n)");
            }
        }
    }
    let path = dir.join("report.toml");
    report.write(&path)?;
    files.push(path);
    Ok(Completed {
        report,
        files,
        failure: None,
        exit_code: 0,
    })
}

/// Report sections for a finished analysis.
pub fn analysis_report(cfg: &RunConfig, outcome: &RunOutcome, a: &Analysis) -> Report {
    let mut report = config_report(cfg);
    run_into(&mut report, outcome);
    if let Some(f) = &a.fourth_family {
        family_into(&mut report, "similarity.fourth", f);
    }
    family_into(&mut report, "similarity.sixth", &a.sixth_family);
    if let Some(early) = &a.early {
        fits_into(&mut report, "fit.early", early);
    }
    fits_into(&mut report, "fit.late", &a.late);
    match &a.transition {
        Ok(t) => {
            report.set("transition", "outcome", t.outcome.name());
            report.set("transition", "nu4", t.nu4);
            report.set("transition", "nu6", t.nu6);
            if let Some(p) = t.fourth_plateau {
                report.set("transition", "fourth_plateau", p);
            }
            if let Some(p) = t.sixth_plateau {
                report.set("transition", "sixth_plateau", p);
            }
            if let Some(b) = t.transition_band {
                report.set("transition", "band", b);
            }
            if let Some(r) = t.crossover_ratio {
                report.set("transition", "crossover_ratio", r);
            }
            report.set("transition", "monotone", t.monotone);
            report.set("transition", "window_h_low", t.windows.iter().map(|w| w.window.0).collect::<Vec<_>>());
            report.set("transition", "window_slope", t.windows.iter().map(|w| w.slope).collect::<Vec<_>>());
        }
        Err(e) => {
            report.set("transition", "error", e.to_string());
        }
    }
    if let Some(c) = &a.collapse_fourth {
        collapse_into(&mut report, "collapse.fourth", c);
    }
    collapse_into(&mut report, "collapse.sixth", &a.collapse_sixth);
    report
}

fn analyze_mode(cfg: &RunConfig, dir: &Path) -> Result<Completed, CliError> {
    let outcome = simulate(cfg)?;
    let mut files = write_run_files(dir, cfg, &outcome)?;
    let a = match analyze(cfg, &outcome) {
        Ok(a) => a,
        Err(e) => {
            // keep what the solver produced before reporting the failure
            let mut report = config_report(cfg);
            run_into(&mut report, &outcome);
            report.set("analysis", "error", e.to_string());
            report.write(&dir.join("report.toml"))?;
            return Err(e);
        }
    };
    if let Some(f) = &a.fourth_family {
        files.push(write_family_files(dir, cfg, Order::Fourth, f)?);
    }
    files.push(write_family_files(dir, cfg, Order::Sixth, &a.sixth_family)?);
    let report = analysis_report(cfg, &outcome, &a);
    finish(dir, report, &mut files, &outcome)
}

fn stability_mode(cfg: &RunConfig, dir: &Path) -> Result<Completed, CliError> {
    let params = cfg.params()?;
    let table: Vec<DispersionPoint> = dispersion_table(cfg.ic.hbar, &params, cfg.analysis.stability_k_max);
    let rows: Vec<Vec<f64>> = table.iter().map(|p| vec![p.k as f64, p.rate, p.h_c]).collect();
    let path = dir.join("dispersion.csv");
    write_csv(&path, &provenance(cfg), &["k", "lambda", "h_c"], &rows)?;
    let mut report = config_report(cfg);
    let unstable: Vec<f64> = table.iter().filter(|p| p.rate > 0.0).map(|p| p.k as f64).collect();
    report.set("stability", "unstable_modes", unstable);
    if let Some(best) = table.iter().max_by(|a, b| a.rate.total_cmp(&b.rate)) {
        report.set("stability", "fastest_mode", best.k as usize);
        report.set("stability", "fastest_rate", best.rate);
    }
    let rpath = dir.join("report.toml");
    report.write(&rpath)?;
    Ok(Completed {
        report,
        files: vec![path, rpath],
        failure: None,
        exit_code: 0,
    })
}

fn sweep_mode(cfg: &RunConfig, dir: &Path) -> Result<Completed, CliError> {
    let members: Vec<(String, RunConfig)> = cfg
        .sweep
        .cases
        .iter()
        .flat_map(|&case| cfg.sweep.m.iter().map(move |&m| (sweep_run_id(m, case), cfg.sweep_member(m, case))))
        .collect();
    let results: Vec<(String, Result<Completed, CliError>)> = members
        .par_iter()
        .map(|(id, member)| (id.clone(), run_in(member, &dir.join(id))))
        .collect();
    let mut report = config_report(cfg);
    let mut files = Vec::new();
    let mut worst = 0;
    for (id, res) in &results {
        let section = format!("sweep.{id}");
        match res {
            Ok(c) => {
                report.set(&section, "exit_code", c.exit_code as usize);
                for key in ["outcome"] {
                    if let Some(v) = c.report.get("transition", key) {
                        report.set(&section, key, v.clone());
                    }
                }
                if let Some(v) = c.report.get("fit.late.nu", "exponent") {
                    report.set(&section, "late_nu", v.clone());
                }
                files.extend(c.files.iter().cloned());
                worst = worst.max(c.exit_code);
            }
            Err(e) => {
                report.set(&section, "exit_code", e.exit_code() as usize);
                report.set(&section, "error", e.to_string());
                worst = worst.max(e.exit_code());
            }
        }
    }
    let path = dir.join("sweep.toml");
    report.write(&path)?;
    files.push(path);
    Ok(Completed {
        report,
        files,
        failure: (worst != 0).then(|| "at least one sweep member failed".to_string()),
        exit_code: worst,
    })
}

/// Runs `cfg` writing artifacts under `dir`.
pub fn run_in(cfg: &RunConfig, dir: &Path) -> Result<Completed, CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), serialize_config(cfg))?;
    match cfg.mode {
        Mode::Simulate => simulate_mode(cfg, dir),
        Mode::Similarity => similarity_mode(cfg, dir),
        Mode::Analyze => analyze_mode(cfg, dir),
        Mode::Sweep => sweep_mode(cfg, dir),
        Mode::Stability => stability_mode(cfg, dir),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Completed, CliError> {
    run_in(cfg, Path::new(&cfg.output.dir))
}
