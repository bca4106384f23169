use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iv::{build_sigma, sample_diagonal, CvProfile, PerturbOptions};
use crate::learners::Classifier;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub estimate: f64,
    /// Standard deviation of the per-replicate gaps over `sqrt(R)`; absent for `R = 1`.
    pub std_error: Option<f64>,
    pub repeats: usize,
}

/// Monte-Carlo estimate of the extra 0-1 loss incurred when each instance is
/// replaced by a draw from its IV distribution.
///
/// Replicate `r` draws one `x'` per instance and records the mean of
/// `loss(h(x'), y) - loss(h(x), y)`; the estimate is the replicate mean.
pub fn estimate_iv_gap<C: Classifier + ?Sized, R: Rng + ?Sized>(
    model: &C,
    x: ArrayView2<'_, f64>,
    y: &[Label],
    profile: &CvProfile,
    repeats: usize,
    options: PerturbOptions,
    rng: &mut R,
) -> Result<GapEstimate> {
    if repeats == 0 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::Empty("no instances".into()));
    }
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let sigmas = rows
        .iter()
        .zip(y)
        .map(|(r, &l)| build_sigma(r, l, profile))
        .collect::<Result<Vec<_>>>()?;
    let base_loss: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(r, &l)| f64::from(model.predict_row(r) != l))
        .collect();
    let n = rows.len() as f64;
    let mut gaps = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut total = 0.0;
        for ((r, s), (&l, b)) in rows.iter().zip(&sigmas).zip(y.iter().zip(&base_loss)) {
            let xp = sample_diagonal(r, s, options, rng);
            total += f64::from(model.predict_row(&xp) != l) - b;
        }
        gaps.push(total / n);
    }
    let r = repeats as f64;
    let estimate = gaps.iter().sum::<f64>() / r;
    let std_error = (repeats > 1).then(|| {
        let var = gaps.iter().map(|g| (g - estimate).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    });
    Ok(GapEstimate {
        estimate,
        std_error,
        repeats,
    })
}
