use crate::error::AnalysisError;
use crate::trace::RuptureTrace;

pub const MIN_FIT_POINTS: usize = 10;
pub const MIN_FIT_DECADES: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Hxx,
    Hxxxx,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Hxx => "hxx",
            Field::Hxxxx => "hxxxx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub field: Field,
    /// Slope of log|field| against log h(x_c).
    pub exponent: f64,
    /// Signed prefactor: field ~ coeff * h^exponent.
    pub coeff: f64,
    /// Range of h(x_c) actually covered by the fitted records.
    pub window: (f64, f64),
    pub rms_residual: f64,
    pub points: usize,
}

impl ScalingFit {
    pub fn decades(&self) -> f64 {
        (self.window.1 / self.window.0).log10()
    }
}

/// Least-squares line through (ln x, ln y); returns (slope, intercept, rms).
pub(crate) fn loglog_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (slope, icpt) = line(&lx, &ly);
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - icpt).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icpt, rms)
}

pub(crate) fn line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits |field| = C h^exponent over records whose h(x_c) lies in `window`.
pub fn fit_exponent(trace: &RuptureTrace, field: Field, window: (f64, f64)) -> Result<ScalingFit, AnalysisError> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut signed = Vec::new();
    for r in &trace.records {
        let v = match field {
            Field::Hxx => r.hxx_c,
            Field::Hxxxx => r.hxxxx_c,
        };
        if r.h_min >= lo && r.h_min <= hi && r.h_min > 0.0 && v.is_finite() && v != 0.0 {
            xs.push(r.h_min);
            ys.push(v.abs());
            signed.push(v);
        }
    }
    let (dlo, dhi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let decades = if xs.is_empty() { 0.0 } else { (dhi / dlo).log10() };
    if xs.len() < MIN_FIT_POINTS || decades < MIN_FIT_DECADES {
        return Err(AnalysisError::InsufficientSpan {
            lo,
            hi,
            points: xs.len(),
            decades,
            min_points: MIN_FIT_POINTS,
            min_decades: MIN_FIT_DECADES,
        });
    }
    let (slope, icpt, rms) = loglog_line(&xs, &ys);
    let positive = signed.iter().filter(|v| **v > 0.0).count();
    let sign = if 2 * positive >= signed.len() { 1.0 } else { -1.0 };
    Ok(ScalingFit {
        field,
        exponent: slope,
        coeff: sign * icpt.exp(),
        window: (dlo, dhi),
        rms_residual: rms,
        points: xs.len(),
    })
}

/// Critical time from a straight-line fit of h(x_c)^(1/alpha) against t
/// over the final decade of h(x_c).
pub fn estimate_tc(trace: &RuptureTrace, alpha: f64) -> Result<f64, AnalysisError> {
    let last = trace
        .last()
        .ok_or_else(|| AnalysisError::ShortTrace("empty trace".into()))?
        .h_min;
    let cut = 10.0 * last;
    let start = trace
        .records
        .iter()
        .rposition(|r| r.h_min > cut)
        .map_or(0, |i| i + 1);
    let tail = &trace.records[start..];
    if tail.len() < 3 {
        return Err(AnalysisError::ShortTrace(format!(
            "{} records in the final decade",
            tail.len()
        )));
    }
    let t: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.h_min.powf(1.0 / alpha)).collect();
    let (slope, icpt) = line(&t, &y);
    if !(slope < 0.0) {
        return Err(AnalysisError::ShortTrace("h(x_c) is not decreasing in the final decade".into()));
    }
    Ok(-icpt / slope)
}
