use rayon::prelude::*;

use crate::bvp::{solve_similarity, SimilarityProblem};
use crate::error::SimilarityError;
use crate::profile::SimilarityProfile;

/// Two solutions are the same branch unless H(0) differs by more than this.
pub const DISTINCT_H0: f64 = 1e-3;
/// Converged profiles must satisfy these to join the family.
pub const MAX_RESIDUAL: f64 = 1e-8;
pub const MAX_FARFIELD_DRIFT: f64 = 0.02;

/// Solves from `steps` geometrically spaced H(0) guesses across `h0_range`
/// and returns the distinct valid solutions ordered by decreasing H(0).
///
/// Branch 0, the largest H(0), is the primary solution: it is the one that
/// PDE runs are attracted to.
pub fn enumerate_family(
    pb: &SimilarityProblem,
    h0_range: (f64, f64),
    steps: usize,
) -> Result<Vec<SimilarityProfile>, SimilarityError> {
    let (lo, hi) = h0_range;
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) || steps == 0 {
        return Err(SimilarityError::InvalidInput(format!(
            "bad guess range ({lo}, {hi}) with {steps} steps"
        )));
    }
    let guesses: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                lo
            } else {
                lo * (hi / lo).powf(i as f64 / (steps - 1) as f64)
            }
        })
        .collect();
    let solved: Vec<Option<SimilarityProfile>> = guesses
        .par_iter()
        .map(|&g| solve_similarity(&pb.clone().with_guess(g)).ok())
        .collect();
    let converged: Vec<SimilarityProfile> = solved.into_iter().flatten().collect();
    let mut valid: Vec<SimilarityProfile> = converged
        .iter()
        .filter(|p| is_valid(p))
        .cloned()
        .collect();
    if valid.is_empty() {
        return Err(SimilarityError::EmptyFamily {
            attempts: steps,
            rejected: converged.len(),
        });
    }
    // deterministic merge: order by H(0) then residual, keep the first of each cluster
    valid.sort_by(|a, b| b.h0.total_cmp(&a.h0).then(a.residual_norm.total_cmp(&b.residual_norm)));
    let mut family: Vec<SimilarityProfile> = Vec::new();
    for p in valid {
        if family.iter().all(|q| (q.h0 - p.h0).abs() > DISTINCT_H0) {
            family.push(p);
        }
    }
    for (i, p) in family.iter_mut().enumerate() {
        p.branch_index = i;
    }
    Ok(family)
}

fn is_valid(p: &SimilarityProfile) -> bool {
    p.min_h() > 0.0 && p.residual_norm <= MAX_RESIDUAL && p.farfield_drift() < MAX_FARFIELD_DRIFT && p.farfield_coeff() > 0.0
}
