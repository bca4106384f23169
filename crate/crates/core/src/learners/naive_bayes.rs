use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    /// Fraction of the largest feature variance added to every variance.
    pub var_smoothing: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            var_smoothing: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
}

fn column_moments(x: ArrayView2<'_, f64>, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let d = x.ncols();
    let mut mean = vec![0.0; d];
    let mut var = vec![0.0; d];
    for &i in rows {
        for j in 0..d {
            mean[j] += x[[i, j]];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    for &i in rows {
        for j in 0..d {
            var[j] += (x[[i, j]] - mean[j]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    (mean, var)
}

pub fn fit_naive_bayes(
    x: ArrayView2<'_, f64>,
    y: &[Label],
    params: &NaiveBayesParams,
) -> Result<GaussianNbModel> {
    let all: Vec<usize> = (0..y.len()).collect();
    let (_, overall_var) = column_moments(x, &all);
    let eps = params.var_smoothing * overall_var.iter().cloned().fold(0.0, f64::max);
    let mut means: [Vec<f64>; 2] = Default::default();
    let mut variances: [Vec<f64>; 2] = Default::default();
    let mut log_priors = [0.0; 2];
    for class in 0..2u8 {
        let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        let (m, v) = column_moments(x, &rows);
        means[class as usize] = m;
        variances[class as usize] = v.into_iter().map(|v| v + eps).collect();
        log_priors[class as usize] = (rows.len() as f64 / y.len() as f64).ln();
    }
    Ok(GaussianNbModel {
        means,
        variances,
        log_priors,
    })
}

impl GaussianNbModel {
    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn joint_log_likelihood(&self, x: &[f64]) -> [f64; 2] {
        let mut out = self.log_priors;
        for (c, o) in out.iter_mut().enumerate() {
            for ((xj, m), v) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                *o -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (xj - m).powi(2) / (2.0 * v);
            }
        }
        out
    }

    /// Posterior probability of class 1.
    pub fn posterior(&self, x: &[f64]) -> f64 {
        let [l0, l1] = self.joint_log_likelihood(x);
        crate::learners::logistic::sigmoid(l1 - l0)
    }
}
