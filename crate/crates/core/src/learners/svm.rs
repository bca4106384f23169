//! C-SVM with an RBF kernel `exp(-gamma * |x - x'|^2)` trained by SMO.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learners::smo::{self, CachedRows, SmoConfig};
use crate::learners::standardize::Standardizer;
use crate::learners::tree::RowMatrix;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// `None` means `1 / d` on standardized features.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub standardize: bool,
    pub cache_bytes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            standardize: true,
            cache_bytes: 256 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub standardizer: Standardizer,
    pub gamma: f64,
    /// Support vectors in standardized coordinates, row-major.
    pub support: Vec<f64>,
    /// `alpha_i * y_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub dim: usize,
    /// Dual multipliers of every training point (for diagnostics).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    pub kkt_violation: f64,
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn fit_svm(x: ArrayView2<'_, f64>, y: &[Label], params: &SvmParams) -> Result<SvmModel> {
    let d = x.ncols();
    let standardizer = if params.standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(d)
    };
    let z = standardizer.transform(x);
    let gamma = params.gamma.unwrap_or(1.0 / d as f64);
    let m = RowMatrix::from_array(&z);
    let n = m.rows;
    let norms: Vec<f64> = (0..n).map(|i| sq_norm(m.row(i))).collect();
    let signs: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut rows = CachedRows::new(n, vec![1.0; n], params.cache_bytes, |i, out: &mut [f64]| {
        let xi = m.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            let d2 = (norms[i] + norms[j] - 2.0 * dot(xi, m.row(j))).max(0.0);
            *o = (-gamma * d2).exp();
        }
        out[i] = 1.0;
    });
    let sol = smo::solve(
        &mut rows,
        &signs,
        &SmoConfig {
            c: params.c,
            tol: params.tol,
            ..Default::default()
        },
    )?;
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for i in 0..n {
        if sol.alpha[i] > 0.0 {
            support.extend_from_slice(m.row(i));
            coef.push(sol.alpha[i] * signs[i]);
        }
    }
    Ok(SvmModel {
        standardizer,
        gamma,
        support,
        coef,
        rho: sol.rho,
        dim: d,
        alpha: sol.alpha,
        kkt_violation: sol.violation,
    })
}

impl SvmModel {
    pub fn n_support(&self) -> usize {
        self.coef.len()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.transform_row(x);
        let sv = RowMatrix::new(&self.support, self.coef.len(), self.dim);
        self.coef
            .iter()
            .enumerate()
            .map(|(i, c)| c * rbf(self.gamma, sv.row(i), &z))
            .sum::<f64>()
            - self.rho
    }
}
