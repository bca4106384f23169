//! Support measure machine: an SVM over Gaussian instances using the
//! expected RBF kernel between the two distributions.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::smo::{self, PrecomputedRows, SmoConfig};
use crate::learners::standardize::Standardizer;
use crate::robust::{ImpreciseInstance, Scheme};

pub const GRAM_JITTER: f64 = 1e-8;

/// `E[exp(-gamma |u - v|^2 / 2)]` for `u ~ N(c1, diag(s1^2))`, `v ~ N(c2, diag(s2^2))`:
///
/// ```text
/// exp(-1/2 d'(S1 + S2 + I/gamma)^-1 d) / sqrt(det(gamma S1 + gamma S2 + I))
/// ```
///
/// evaluated in log space.
pub fn smm_kernel(a: &ImpreciseInstance, b: &ImpreciseInstance, gamma: f64) -> f64 {
    kernel_parts(&a.center, &a.scale, &b.center, &b.scale, gamma)
}

fn kernel_parts(c1: &[f64], s1: &[f64], c2: &[f64], s2: &[f64], gamma: f64) -> f64 {
    let inv = 1.0 / gamma;
    let mut log_k = 0.0;
    for j in 0..c1.len() {
        let v = s1[j] * s1[j] + s2[j] * s2[j];
        let d = c1[j] - c2[j];
        log_k -= 0.5 * d * d / (v + inv);
        if v > 0.0 {
            log_k -= 0.5 * (gamma * v).ln_1p();
        }
    }
    log_k.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmmParams {
    /// `None` means `1 / d`.
    pub gamma: Option<f64>,
    pub c: f64,
    pub tol: f64,
    /// Express centers and scales in training z-score units first.
    pub standardize: bool,
}

impl Default for SmmParams {
    fn default() -> Self {
        SmmParams {
            gamma: None,
            c: 1.0,
            tol: 1e-3,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmmModel {
    pub standardizer: Standardizer,
    pub gamma: f64,
    pub centers: Vec<Vec<f64>>,
    pub scales: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support distribution.
    pub coef: Vec<f64>,
    pub rho: f64,
    /// Set when the Gram matrix needed diagonal jitter.
    pub jittered: bool,
}

fn check_prob(train: &[ImpreciseInstance]) -> Result<usize> {
    let first = train
        .first()
        .ok_or_else(|| Error::Empty("SMM needs training instances".into()))?;
    let d = first.dim();
    for t in train {
        if t.scheme != Scheme::Prob {
            return Err(Error::InvalidInput(
                "SMM needs probabilistic instances".into(),
            ));
        }
        if t.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: t.dim(),
            });
        }
    }
    Ok(d)
}

pub fn fit_smm(train: &[ImpreciseInstance], params: &SmmParams) -> Result<SmmModel> {
    let d = check_prob(train)?;
    if !(params.c > 0.0) {
        return Err(Error::InvalidInput("SMM: C must be positive".into()));
    }
    let gamma = params.gamma.unwrap_or(1.0 / d as f64);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput("SMM: gamma must be positive".into()));
    }
    let n = train.len();
    let standardizer = if params.standardize {
        let flat: Vec<f64> = train
            .iter()
            .flat_map(|t| t.center.iter().copied())
            .collect();
        let centers = ArrayView2::from_shape((n, d), &flat).expect("rectangular");
        Standardizer::fit(centers)
    } else {
        Standardizer::identity(d)
    };
    let centers: Vec<Vec<f64>> = train
        .iter()
        .map(|t| standardizer.transform_row(&t.center))
        .collect();
    let scales: Vec<Vec<f64>> = train
        .iter()
        .map(|t| standardizer.transform_scale(&t.scale))
        .collect();

    let mut gram = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let k = kernel_parts(&centers[i], &scales[i], &centers[j], &scales[j], gamma);
            gram[[i, j]] = k;
            gram[[j, i]] = k;
        }
    }
    if gram.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "SMM Gram matrix has non-finite entries".into(),
        ));
    }
    let dm = DMatrix::from_fn(n, n, |i, j| gram[[i, j]]);
    let jittered = dm.cholesky().is_none();
    if jittered {
        log::warn!(
            "SMM Gram matrix is numerically indefinite; adding {GRAM_JITTER} to the diagonal"
        );
        for i in 0..n {
            gram[[i, i]] += GRAM_JITTER;
        }
    }
    let signs: Vec<f64> = train
        .iter()
        .map(|t| if t.label == 1 { 1.0 } else { -1.0 })
        .collect();
    let mut rows = PrecomputedRows::new(&gram);
    let sol = smo::solve(
        &mut rows,
        &signs,
        &SmoConfig {
            c: params.c,
            tol: params.tol,
            ..Default::default()
        },
    )?;
    let mut model = SmmModel {
        standardizer,
        gamma,
        centers: Vec::new(),
        scales: Vec::new(),
        coef: Vec::new(),
        rho: sol.rho,
        jittered,
    };
    for i in 0..n {
        if sol.alpha[i] > 0.0 {
            model.centers.push(centers[i].clone());
            model.scales.push(scales[i].clone());
            model.coef.push(sol.alpha[i] * signs[i]);
        }
    }
    Ok(model)
}

impl SmmModel {
    pub fn dim(&self) -> usize {
        self.standardizer.mean.len()
    }

    pub fn decision(&self, query: &ImpreciseInstance) -> f64 {
        let c = self.standardizer.transform_row(&query.center);
        let s = self.standardizer.transform_scale(&query.scale);
        self.coef
            .iter()
            .zip(self.centers.iter().zip(&self.scales))
            .map(|(a, (ci, si))| a * kernel_parts(ci, si, &c, &s, self.gamma))
            .sum::<f64>()
            - self.rho
    }
}
