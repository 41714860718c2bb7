use serde::{Deserialize, Serialize};

use rupture_analysis::TransitionConfig;
use rupture_core::{InitialCondition, ModelParams};
use rupture_similarity::{SimilarityProblem, Order};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Similarity,
    Analyze,
    Sweep,
    Stability,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Similarity => "similarity",
            Mode::Analyze => "analyze",
            Mode::Sweep => "sweep",
            Mode::Stability => "stability",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "B")]
    pub bending: f64,
    pub m: f64,
    pub n: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    #[serde(default = "IcSection::default_kind")]
    pub kind: IcKind,
    pub hbar: f64,
    pub delta: f64,
    /// Half-periods of the cosine across the domain.
    #[serde(default = "IcSection::default_mode")]
    pub mode: u32,
}

impl IcSection {
    fn default_kind() -> IcKind {
        IcKind::Cosine
    }
    fn default_mode() -> u32 {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    #[serde(rename = "N")]
    pub cells: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub dt_init: f64,
    /// Stop once min h reaches this. When absent the run stops where the
    /// rupture core narrows to `resolve_cells` grid cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_stop: Option<f64>,
    pub resolve_cells: f64,
    pub dt_cap_coeff: f64,
    pub max_rel_change: f64,
    pub time_tol: f64,
    pub t_max: f64,
    /// h(x_c) thresholds for profile snapshots compared with the fourth-order profile.
    pub snapshots_fourth: Vec<f64>,
    /// Thresholds compared with the sixth-order profile.
    pub snapshots_sixth: Vec<f64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            cells: 2000,
            newton_tol: 1e-10,
            newton_max_iter: 25,
            dt_init: 1e-6,
            h_stop: None,
            resolve_cells: 1.2,
            dt_cap_coeff: 0.5,
            max_rel_change: 0.05,
            time_tol: 1e-5,
            t_max: 10.0,
            snapshots_fourth: vec![0.3, 0.2, 0.15, 0.1],
            snapshots_sixth: vec![1e-2, 5e-3, 2e-3, 1e-3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// h(x_c) window for the early (fourth-order) fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_window: Option<[f64; 2]>,
    /// Width in decades of the late fit window ending at the deepest record.
    pub late_decades: f64,
    pub eta_max_fourth: f64,
    pub eta_max_sixth: f64,
    pub eta_intervals: usize,
    /// Range of H(0) guesses swept when enumerating similarity families.
    pub h0_range: [f64; 2],
    pub family_steps: usize,
    pub window_decades: f64,
    pub step_decades: f64,
    pub plateau_decades: f64,
    pub onset_fraction: f64,
    pub stability_k_max: u32,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let t = TransitionConfig::default();
        AnalysisSection {
            early_window: None,
            late_decades: 1.0,
            eta_max_fourth: 40.0,
            eta_max_sixth: 60.0,
            eta_intervals: 2000,
            h0_range: [0.1, 20.0],
            family_steps: 24,
            window_decades: t.window_decades,
            step_decades: t.step_decades,
            plateau_decades: t.plateau_decades,
            onset_fraction: t.onset_fraction,
            stability_k_max: 20,
        }
    }
}

impl AnalysisSection {
    pub fn transition(&self) -> TransitionConfig {
        TransitionConfig {
            window_decades: self.window_decades,
            step_decades: self.step_decades,
            plateau_decades: self.plateau_decades,
            onset_fraction: self.onset_fraction,
            ..TransitionConfig::default()
        }
    }

    pub fn similarity_problem(&self, order: Order, model: &ModelSection) -> SimilarityProblem {
        let eta_max = match order {
            Order::Fourth => self.eta_max_fourth,
            Order::Sixth => self.eta_max_sixth,
        };
        SimilarityProblem::new(order, model.m, model.n, model.bending)
            .with_eta_max(eta_max)
            .with_intervals(self.eta_intervals)
    }
}

/// One sweep case: a bending coefficient with its mean thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub m: Vec<f64>,
    /// Pairs [B, hbar].
    pub cases: Vec<[f64; 2]>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            m: vec![2.0, 3.0, 4.0],
            cases: vec![[1.0, 0.1], [1e-5, 0.3]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: ModelSection,
    pub ic: IcSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn h_stop(&self) -> f64 {
        self.numerics
            .h_stop
            .unwrap_or_else(|| resolved_thickness(&self.model, self.numerics.resolve_cells * self.model.length / self.numerics.cells as f64))
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let p = ModelParams {
            bending: self.model.bending,
            disjoining_exp: self.model.m,
            mobility_exp: self.model.n,
            length: self.model.length,
            cells: self.numerics.cells,
            newton_tol: self.numerics.newton_tol,
            newton_max_iter: self.numerics.newton_max_iter,
            dt_init: self.numerics.dt_init,
            h_stop: self.h_stop(),
            dt_cap_coeff: self.numerics.dt_cap_coeff,
            max_rel_change: self.numerics.max_rel_change,
            time_tol: self.numerics.time_tol,
            t_max: self.numerics.t_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn initial_condition(&self) -> Result<InitialCondition, ConfigError> {
        let ic = InitialCondition::cosine(self.ic.hbar, self.ic.delta).with_mode(self.ic.mode);
        ic.validate()?;
        if self.ic.mode == 0 {
            return Err(ConfigError::invalid("ic.mode", "must be at least 1"));
        }
        Ok(ic)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        self.initial_condition()?;
        if self.h_stop() >= self.ic.hbar - self.ic.delta.abs() {
            return Err(ConfigError::invalid(
                "numerics.h_stop",
                format!("{:.3e} is not below the initial minimum thickness; refine N or set h_stop", self.h_stop()),
            ));
        }
        for (name, list) in [
            ("numerics.snapshots_fourth", &self.numerics.snapshots_fourth),
            ("numerics.snapshots_sixth", &self.numerics.snapshots_sixth),
        ] {
            if list.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(ConfigError::invalid(name, "thresholds must be finite and > 0"));
            }
        }
        let a = &self.analysis;
        if let Some([lo, hi]) = a.early_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(ConfigError::invalid("analysis.early_window", "need 0 < low < high"));
            }
        }
        let [lo, hi] = a.h0_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(ConfigError::invalid("analysis.h0_range", "need 0 < low <= high"));
        }
        for (name, v) in [
            ("analysis.late_decades", a.late_decades),
            ("analysis.eta_max_fourth", a.eta_max_fourth),
            ("analysis.eta_max_sixth", a.eta_max_sixth),
            ("analysis.window_decades", a.window_decades),
            ("analysis.step_decades", a.step_decades),
            ("analysis.plateau_decades", a.plateau_decades),
            ("analysis.onset_fraction", a.onset_fraction),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if a.family_steps == 0 || a.eta_intervals < 20 {
            return Err(ConfigError::invalid("analysis.family_steps", "need at least one guess and 20 intervals"));
        }
        if self.mode == Mode::Sweep {
            if self.sweep.m.is_empty() || self.sweep.cases.is_empty() {
                return Err(ConfigError::invalid("sweep", "needs at least one m and one case"));
            }
            for &m in &self.sweep.m {
                self.sweep_member(m, self.sweep.cases[0]).validate()?;
            }
            for &case in &self.sweep.cases {
                self.sweep_member(self.sweep.m[0], case).validate()?;
            }
        }
        Ok(())
    }

    /// Configuration of one sweep member run in analyze mode.
    pub fn sweep_member(&self, m: f64, case: [f64; 2]) -> RunConfig {
        let mut c = self.clone();
        c.mode = Mode::Analyze;
        c.model.m = m;
        c.model.bending = case[0];
        c.ic.hbar = case[1];
        c.output.dir = format!("{}/{}", self.output.dir, sweep_run_id(m, case));
        c
    }
}

/// Thinnest film whose rupture core is still `width` wide.
///
/// The core is h^((m+1)/2) wide while the second-order term balances the
/// disjoining pressure and (B h^(m+1))^(1/4) once bending takes over; the
/// wider of the two applies.
pub fn resolved_thickness(model: &ModelSection, width: f64) -> f64 {
    let e = 1.0 / (model.m + 1.0);
    let fourth = width.powf(2.0 * e);
    let sixth = (width.powi(4) / model.bending).powf(e);
    fourth.min(sixth)
}

pub fn sweep_run_id(m: f64, case: [f64; 2]) -> String {
    format!("m{}_B{:e}_hbar{}", m, case[0], case[1])
}

/// Parses a sectioned `key = value` document, applying `overrides`
/// (`section.key=value`) before validation.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Schema(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config always serializes")
}

/// Sets `section.key` (or a top-level `key`) from `path=value`. The value is
/// read as a TOML literal and falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(format!("`{assignment}` is not of the form key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = path.split('.').collect();
    match parts.as_slice() {
        [key] => {
            table.insert((*key).to_string(), value);
        }
        [section, key] => {
            let entry = table
                .entry((*section).to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match entry {
                toml::Value::Table(t) => {
                    t.insert((*key).to_string(), value);
                }
                _ => return Err(ConfigError::Override(format!("`{section}` is not a section"))),
            }
        }
        _ => return Err(ConfigError::Override(format!("bad key path `{path}`"))),
    }
    Ok(())
}
