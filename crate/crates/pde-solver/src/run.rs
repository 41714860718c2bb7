use rupture_analysis::{estimate_tc, locate_critical_point, RuptureTrace, TraceRecord};
use rupture_core::{mass, FilmState, ModelParams};
use rupture_linear::energy;

use crate::error::PdeError;
use crate::fields::check_positive;
use crate::newton::newton_step;
use crate::timestep::{adapt_dt, singular_time_exponent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ruptured,
    NoRupture,
    /// The step size collapsed or a step failed; the outcome is partial.
    Stalled,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ruptured => "ruptured",
            RunStatus::NoRupture => "no rupture",
            RunStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub trace: RuptureTrace,
    /// Snapshots paired with the threshold that triggered them.
    pub snapshots: Vec<(f64, FilmState)>,
    pub final_state: FilmState,
    pub t_c_estimate: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Newton iterations over all attempted steps.
    pub newton_iterations: usize,
    /// Why the run stopped early, for [`RunStatus::Stalled`].
    pub failure: Option<PdeError>,
}

/// Steps with a relative change above this multiple of the target are redone.
const CHANGE_REJECT_FACTOR: f64 = 2.0;

fn record(state: &FilmState, params: &ModelParams, dt: f64) -> Result<TraceRecord, PdeError> {
    let cp = locate_critical_point(state).map_err(|_| PdeError::NonPositive {
        index: 0,
        value: state.h_min(),
    })?;
    Ok(TraceRecord {
        t: state.t,
        h_min: cp.h,
        x_c: cp.x_c,
        hxx_c: cp.hxx,
        hxxxx_c: cp.hxxxx,
        dt,
        energy: energy(state, params),
        mass: mass(state),
    })
}

fn stalled(state: &FilmState, e: PdeError) -> PdeError {
    PdeError::Stalled {
        t: state.t,
        h_min: state.h_min(),
        source: Box::new(e),
    }
}

/// Backward-Euler local error from the gap between the solution and the
/// linear extrapolation of the two previous levels, scaled by the size of
/// the film's departure from flat.
fn truncation_error(prev: &[f64], dt_prev: f64, cur: &[f64], new: &[f64], dt: f64) -> f64 {
    let mean = cur.iter().sum::<f64>() / cur.len() as f64;
    let dev = cur.iter().fold(0.0f64, |a, v| a.max((v - mean).abs()));
    if dev == 0.0 {
        return 0.0;
    }
    let w = dt / dt_prev;
    let gap = prev
        .iter()
        .zip(cur)
        .zip(new)
        .fold(0.0f64, |a, ((p, c), n)| a.max((n - c - w * (c - p)).abs()));
    gap * dt / (dt + dt_prev) / dev
}

/// Evolves `ic` until min h reaches `h_stop` (or t reaches `t_max`).
///
/// One trace record is written for the initial state and for every accepted
/// step. A snapshot is stored the first time h(x_c) falls to each threshold
/// of `snapshot_schedule`. Failures after the first step end the run with
/// status [`RunStatus::Stalled`] so the partial trace is kept.
pub fn run_to_rupture(ic: &FilmState, params: &ModelParams, snapshot_schedule: &[f64]) -> Result<RunOutcome, PdeError> {
    params.validate()?;
    if ic.h.len() != params.cells {
        return Err(PdeError::Mismatch(ic.h.len(), params.cells));
    }
    check_positive(&ic.h)?;
    let mut schedule: Vec<f64> = snapshot_schedule.to_vec();
    schedule.sort_by(|a, b| b.total_cmp(a));
    let mut next_snap = 0;

    let mut state = ic.clone();
    let mut dt = params.dt_init;
    let mut trace = RuptureTrace::new();
    trace.push(record(&state, params, 0.0)?);
    let mut snapshots = Vec::new();
    let (mut accepted, mut rejected, mut iterations) = (0, 0, 0);
    let mut history: Option<(Vec<f64>, f64)> = None;
    let mut failure = None;
    let status = loop {
        let h_min = state.h_min();
        if h_min <= params.h_stop {
            break RunStatus::Ruptured;
        }
        if state.t >= params.t_max {
            break RunStatus::NoRupture;
        }
        let (h_new, mut rep) = match newton_step(&state.h, dt, params) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(stalled(&state, e));
                break RunStatus::Stalled;
            }
        };
        iterations += rep.newton_iters;
        if rep.accepted && rep.max_rel_change > CHANGE_REJECT_FACTOR * params.max_rel_change {
            rep.accepted = false;
        }
        if rep.accepted {
            if let Some((prev, dt_prev)) = &history {
                rep.time_error = truncation_error(prev, *dt_prev, &state.h, &h_new, dt);
            }
            accepted += 1;
            history = Some((std::mem::replace(&mut state.h, h_new), dt));
            state.t += dt;
            let rec = match record(&state, params, dt) {
                Ok(r) => r,
                Err(e) => {
                    failure = Some(stalled(&state, e));
                    break RunStatus::Stalled;
                }
            };
            while next_snap < schedule.len() && rec.h_min <= schedule[next_snap] {
                snapshots.push((schedule[next_snap], state.clone()));
                next_snap += 1;
            }
            trace.push(rec);
        } else {
            rejected += 1;
        }
        dt = match adapt_dt(&rep, dt, state.h_min(), params) {
            Ok(dt) => dt,
            Err(e) => {
                failure = Some(stalled(&state, e));
                break RunStatus::Stalled;
            }
        };
    };
    let t_c_estimate = match status {
        RunStatus::Ruptured => estimate_tc(&trace, 1.0 / singular_time_exponent(params)).ok(),
        RunStatus::NoRupture | RunStatus::Stalled => None,
    };
    Ok(RunOutcome {
        status,
        trace,
        snapshots,
        final_state: state,
        t_c_estimate,
        accepted_steps: accepted,
        rejected_steps: rejected,
        newton_iterations: iterations,
        failure,
    })
}
