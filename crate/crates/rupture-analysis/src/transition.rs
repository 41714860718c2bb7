use rupture_similarity::{critical_exponents, scalings, Order};

use crate::error::AnalysisError;
use crate::fit::{fit_exponent, Field};
use crate::trace::RuptureTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Fourth,
    Sixth,
    Transitional,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Fourth => "fourth",
            Regime::Sixth => "sixth",
            Regime::Transitional => "transitional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionOutcome {
    BothPlateaus,
    SixthOnly,
    FourthOnly,
    NoTransientRegime,
    Inconclusive,
}

impl TransitionOutcome {
    pub fn name(self) -> &'static str {
        match self {
            TransitionOutcome::BothPlateaus => "both plateaus",
            TransitionOutcome::SixthOnly => "sixth-order only",
            TransitionOutcome::FourthOnly => "fourth-order only",
            TransitionOutcome::NoTransientRegime => "no transient regime",
            TransitionOutcome::Inconclusive => "inconclusive",
        }
    }
}

/// Sliding-window settings. Windows move from thick to thin films.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionConfig {
    pub window_decades: f64,
    pub step_decades: f64,
    /// Relative slope tolerance around nu4.
    pub fourth_tol: f64,
    /// Relative and absolute slope tolerance around nu6.
    pub sixth_tol: f64,
    pub sixth_abs: f64,
    /// A plateau is a run of equally classified windows covering at least this span.
    pub plateau_decades: f64,
    /// Ignore records before h(x_c) first drops below this fraction of its initial value.
    pub onset_fraction: f64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            window_decades: 0.55,
            step_decades: 0.1,
            fourth_tol: 0.15,
            sixth_tol: 0.15,
            sixth_abs: 0.1,
            plateau_decades: 0.5,
            onset_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowClass {
    /// (low, high) h(x_c) covered by the fitted records.
    pub window: (f64, f64),
    pub slope: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub nu4: f64,
    pub nu6: f64,
    pub windows: Vec<WindowClass>,
    /// h(x_c) ranges (low, high) of the detected plateaus.
    pub fourth_plateau: Option<(f64, f64)>,
    pub sixth_plateau: Option<(f64, f64)>,
    /// h(x_c) band (low, high) between the two plateaus.
    pub transition_band: Option<(f64, f64)>,
    pub outcome: TransitionOutcome,
    /// No fourth-order window follows the first sixth-order window.
    pub monotone: bool,
    /// B / tau^(2 beta4) at the centre of the transition band.
    pub crossover_ratio: Option<f64>,
}

fn classify(slope: f64, nu4: f64, nu6: f64, cfg: &TransitionConfig) -> Regime {
    if (slope - nu6).abs() < cfg.sixth_tol * nu6.abs() + cfg.sixth_abs {
        Regime::Sixth
    } else if (slope - nu4).abs() < cfg.fourth_tol * nu4.abs() {
        Regime::Fourth
    } else {
        Regime::Transitional
    }
}

// Longest run of consecutive windows in `regime`, as an h range, if it is long enough.
fn plateau(windows: &[WindowClass], regime: Regime, min_decades: f64, first: bool) -> Option<(f64, f64)> {
    let mut runs: Vec<(f64, f64)> = Vec::new();
    let mut cur: Option<(f64, f64)> = None;
    for w in windows {
        if w.regime == regime {
            cur = Some(match cur {
                Some((lo, hi)) => (lo.min(w.window.0), hi.max(w.window.1)),
                None => w.window,
            });
        } else if let Some(r) = cur.take() {
            runs.push(r);
        }
    }
    runs.extend(cur);
    let mut good = runs.into_iter().filter(|(lo, hi)| (hi / lo).log10() >= min_decades);
    if first {
        good.next()
    } else {
        good.last()
    }
}

/// Classifies sliding windows of the curvature exponent and reports where
/// the fourth-order plateau gives way to the sixth-order one.
pub fn detect_transition(
    trace: &RuptureTrace,
    m: f64,
    n: f64,
    bending: f64,
    t_c: Option<f64>,
    cfg: &TransitionConfig,
) -> Result<TransitionReport, AnalysisError> {
    let (nu4, nu6) = critical_exponents(m);
    let first = trace
        .records
        .first()
        .ok_or_else(|| AnalysisError::ShortTrace("empty trace".into()))?
        .h_min;
    let onset = trace
        .records
        .iter()
        .position(|r| r.h_min <= cfg.onset_fraction * first)
        .ok_or_else(|| AnalysisError::ShortTrace("film never thinned past the onset fraction".into()))?;
    let tail = RuptureTrace {
        records: trace.records[onset..].to_vec(),
    };
    let top = tail.records.iter().map(|r| r.h_min).fold(f64::NEG_INFINITY, f64::max);
    let bottom = tail.records.iter().map(|r| r.h_min).fold(f64::INFINITY, f64::min);
    let mut windows = Vec::new();
    let mut upper = top.log10();
    while upper - cfg.window_decades >= bottom.log10() - 1e-12 {
        let w = (10f64.powf(upper - cfg.window_decades), 10f64.powf(upper));
        if let Ok(fit) = fit_exponent(&tail, Field::Hxx, w) {
            windows.push(WindowClass {
                window: fit.window,
                slope: fit.exponent,
                regime: classify(fit.exponent, nu4, nu6, cfg),
            });
        }
        upper -= cfg.step_decades;
    }
    if windows.is_empty() {
        return Err(AnalysisError::ShortTrace("no window could be fitted".into()));
    }
    let sixth_plateau = plateau(&windows, Regime::Sixth, cfg.plateau_decades, false);
    // the fourth-order plateau must precede the sixth-order one
    let before_sixth: Vec<WindowClass> = match sixth_plateau {
        Some((_, hi)) => windows.iter().copied().filter(|w| w.window.0 >= hi * 0.999_999).collect(),
        None => windows.clone(),
    };
    let fourth_plateau = plateau(&before_sixth, Regime::Fourth, cfg.plateau_decades, true);
    let outcome = match (fourth_plateau, sixth_plateau) {
        (Some(_), Some(_)) => TransitionOutcome::BothPlateaus,
        (None, Some(_)) if n > m => TransitionOutcome::NoTransientRegime,
        (None, Some(_)) => TransitionOutcome::SixthOnly,
        (Some(_), None) => TransitionOutcome::FourthOnly,
        (None, None) if n > m => TransitionOutcome::NoTransientRegime,
        (None, None) => TransitionOutcome::Inconclusive,
    };
    let transition_band = match (fourth_plateau, sixth_plateau) {
        (Some((f_lo, _)), Some((_, s_hi))) => Some((f_lo.min(s_hi), f_lo.max(s_hi))),
        _ => None,
    };
    let first_sixth = windows.iter().position(|w| w.regime == Regime::Sixth);
    let monotone = first_sixth.is_none_or(|i| windows[i..].iter().all(|w| w.regime != Regime::Fourth));
    let crossover_ratio = match (transition_band, t_c) {
        (Some((lo, hi)), Some(tc)) => {
            let mid = (lo * hi).sqrt();
            let beta4 = scalings(Order::Fourth, m, n).ok().map(|s| s.beta);
            let t_mid = trace.records.iter().find(|r| r.h_min <= mid).map(|r| r.t);
            match (beta4, t_mid) {
                (Some(b4), Some(t)) if tc > t => Some(bending / (tc - t).powf(2.0 * b4)),
                _ => None,
            }
        }
        _ => None,
    };
    Ok(TransitionReport {
        nu4,
        nu6,
        windows,
        fourth_plateau,
        sixth_plateau,
        transition_band,
        outcome,
        monotone,
        crossover_ratio,
    })
}
