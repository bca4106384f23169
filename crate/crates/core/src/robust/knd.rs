//! k-nearest distributions under a Mahalanobis-type distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::knn::k_nearest;
use crate::robust::ImpreciseInstance;

/// Added to every variance so zero scales stay invertible.
pub const VARIANCE_EPSILON: f64 = 1e-12;

/// `sum_j d_j^2 (1/v1_j + 1/v2_j) / 2` with `v = scale^2 + eps` (no square root).
pub fn knd_distance(a: &ImpreciseInstance, b: &ImpreciseInstance) -> f64 {
    a.center
        .iter()
        .zip(&b.center)
        .zip(a.scale.iter().zip(&b.scale))
        .map(|((x1, x2), (s1, s2))| {
            let d = x1 - x2;
            let v1 = s1 * s1 + VARIANCE_EPSILON;
            let v2 = s2 * s2 + VARIANCE_EPSILON;
            d * d * (1.0 / v1 + 1.0 / v2) / 2.0
        })
        .sum()
}

/// True when the epsilon regularization changes the result materially,
/// i.e. some scale entry is zero.
pub fn needs_regularization(inst: &ImpreciseInstance) -> bool {
    inst.scale.iter().any(|&s| s == 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KndModel {
    pub k: usize,
    pub train: Vec<ImpreciseInstance>,
    /// Set when any training scale was zero.
    pub regularized: bool,
}

pub fn fit_knd(train: Vec<ImpreciseInstance>, k: usize) -> Result<KndModel> {
    if train.is_empty() {
        return Err(Error::Empty(
            "KND needs at least one training instance".into(),
        ));
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} must lie in 1..={}",
            train.len()
        )));
    }
    let d = train[0].dim();
    if let Some(bad) = train.iter().find(|t| t.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.dim(),
        });
    }
    let regularized = train.iter().any(needs_regularization);
    Ok(KndModel {
        k,
        train,
        regularized,
    })
}

impl KndModel {
    pub fn dim(&self) -> usize {
        self.train[0].dim()
    }

    pub fn neighbors(&self, query: &ImpreciseInstance) -> Vec<usize> {
        let dist: Vec<f64> = self.train.iter().map(|t| knd_distance(t, query)).collect();
        k_nearest(&dist, self.k)
    }

    /// Fraction of the `k` nearest training distributions labelled 1.
    pub fn vote_share(&self, query: &ImpreciseInstance) -> f64 {
        let nn = self.neighbors(query);
        nn.iter().filter(|&&i| self.train[i].label == 1).count() as f64 / nn.len() as f64
    }
}
