//! L2-regularized logistic regression fitted by damped Newton iterations.
//!
//! Minimizes `C * sum_i logloss_i + |w|^2 / 2` (intercept unpenalized).

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::standardize::Standardizer;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub c: f64,
    /// Stop when the gradient's max-norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub standardize: bool,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            tol: 1e-8,
            max_iter: 100,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective value after each accepted step, starting from the origin.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<f64>,
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl LogisticModel {
    /// A model on raw (unstandardized) features.
    pub fn from_parts(weights: Vec<f64>, bias: f64) -> Self {
        let d = weights.len();
        LogisticModel {
            standardizer: Standardizer::identity(d),
            weights,
            bias,
            loss_history: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.transform_row(x);
        z.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

struct Problem<'a> {
    z: &'a [Vec<f64>],
    y: &'a [f64],
    c: f64,
}

impl Problem<'_> {
    fn objective(&self, theta: &DVector<f64>) -> f64 {
        let d = theta.len() - 1;
        let mut loss = 0.0;
        for (row, &yi) in self.z.iter().zip(self.y) {
            let t = row
                .iter()
                .zip(theta.iter())
                .map(|(a, w)| a * w)
                .sum::<f64>()
                + theta[d];
            loss += softplus(t) - yi * t;
        }
        self.c * loss + 0.5 * theta.rows(0, d).norm_squared()
    }

    fn gradient_hessian(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = theta.len() - 1;
        let mut g = DVector::zeros(d + 1);
        let mut h = DMatrix::zeros(d + 1, d + 1);
        for (row, &yi) in self.z.iter().zip(self.y) {
            let t = row
                .iter()
                .zip(theta.iter())
                .map(|(a, w)| a * w)
                .sum::<f64>()
                + theta[d];
            let p = sigmoid(t);
            let r = self.c * (p - yi);
            let w = self.c * p * (1.0 - p);
            for a in 0..d {
                g[a] += r * row[a];
                for b in 0..=a {
                    h[(a, b)] += w * row[a] * row[b];
                }
                h[(d, a)] += w * row[a];
            }
            g[d] += r;
            h[(d, d)] += w;
        }
        for a in 0..=d {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        for a in 0..d {
            g[a] += theta[a];
            h[(a, a)] += 1.0;
        }
        (g, h)
    }
}

pub fn fit_logistic(
    x: ArrayView2<'_, f64>,
    y: &[Label],
    params: &LogisticParams,
) -> Result<LogisticModel> {
    if !(params.c > 0.0) {
        return Err(Error::InvalidInput(
            "regularization C must be positive".into(),
        ));
    }
    let d = x.ncols();
    let standardizer = if params.standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(d)
    };
    let z: Vec<Vec<f64>> = standardizer
        .transform(x)
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    let targets: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let problem = Problem {
        z: &z,
        y: &targets,
        c: params.c,
    };

    let mut theta = DVector::zeros(d + 1);
    let mut f = problem.objective(&theta);
    let mut history = vec![f];
    for _ in 0..params.max_iter {
        let (g, h) = problem.gradient_hessian(&theta);
        if g.amax() < params.tol {
            break;
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand = &theta - &step * t;
            let fc = problem.objective(&cand);
            if fc <= f - 1e-4 * t * slope {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(f);
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    Ok(LogisticModel {
        standardizer,
        weights: theta.rows(0, d).iter().copied().collect(),
        bias: theta[d],
        loss_history: history,
    })
}
