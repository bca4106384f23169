//! Gradient boosting for binary classification under the logistic loss.
//!
//! Each stage fits a regression tree to the negative gradient `y - p` and
//! sets every leaf to the Newton step `sum(y - p) / sum(p (1 - p))`.

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::logistic::sigmoid;
use crate::learners::tree::{
    fit_tree_presorted, MaxFeatures, Presorted, RowMatrix, Splitter, Tree, TreeParams,
};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: Some(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostingModel {
    /// Prior log-odds.
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    pub dim: usize,
}

pub fn fit_boosting<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: &[Label],
    params: &BoostingParams,
    rng: &mut R,
) -> Result<BoostingModel> {
    if params.n_estimators == 0 {
        return Err(Error::InvalidInput(
            "ensemble size must be at least 1".into(),
        ));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::InvalidInput("learning rate must be positive".into()));
    }
    let owned = x.as_standard_layout();
    let m = RowMatrix::new(owned.as_slice().unwrap(), x.nrows(), x.ncols());
    let n = y.len();
    let rows: Vec<usize> = (0..n).collect();
    let presorted = Presorted::new(m, &rows);
    let targets: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let prior = targets.iter().sum::<f64>() / n as f64;
    let init = (prior / (1.0 - prior)).ln();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        max_features: MaxFeatures::All,
        splitter: Splitter::Best,
        ..Default::default()
    };
    let mut raw = vec![init; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    for _ in 0..params.n_estimators {
        let prob: Vec<f64> = raw.iter().map(|&f| sigmoid(f)).collect();
        let residual: Vec<f64> = targets.iter().zip(&prob).map(|(t, p)| t - p).collect();
        let fitted = fit_tree_presorted(m, &rows, &presorted, &residual, &tree_params, rng)?;
        let mut tree = fitted.tree;
        let mut num = vec![0.0; tree.nodes.len()];
        let mut den = vec![0.0; tree.nodes.len()];
        for (s, &leaf) in fitted.leaf_of_slot.iter().enumerate() {
            num[leaf] += residual[s];
            den[leaf] += prob[s] * (1.0 - prob[s]);
        }
        let step: Vec<f64> = num
            .iter()
            .zip(&den)
            .map(|(a, b)| if b.abs() < 1e-150 { 0.0 } else { a / b })
            .collect();
        for (leaf, &v) in step.iter().enumerate() {
            tree.set_leaf_value(leaf, v);
        }
        for (s, &leaf) in fitted.leaf_of_slot.iter().enumerate() {
            raw[s] += params.learning_rate * step[leaf];
        }
        trees.push(tree);
    }
    Ok(BoostingModel {
        init,
        learning_rate: params.learning_rate,
        trees,
        dim: x.ncols(),
    })
}

impl BoostingModel {
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw_score(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use ndarray::array;

    #[test]
    fn prior_log_odds_initialization() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0, 1, 1, 1];
        let p = BoostingParams {
            n_estimators: 1,
            learning_rate: 0.1,
            max_depth: Some(1),
        };
        let m = fit_boosting(x.view(), &y, &p, &mut rng_from_seed(0)).unwrap();
        assert!((m.init - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn single_stage_leaf_is_newton_step() {
        // a depth-1 stump splits {0} from {1,2,3}; the left leaf holds one
        // negative with p = 3/4: step = (0 - 3/4) / (3/4 * 1/4) = -4
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0, 1, 1, 1];
        let p = BoostingParams {
            n_estimators: 1,
            learning_rate: 0.5,
            max_depth: Some(1),
        };
        let m = fit_boosting(x.view(), &y, &p, &mut rng_from_seed(0)).unwrap();
        assert!((m.raw_score(&[0.0]) - (3f64.ln() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn training_loss_falls_with_more_stages() {
        let x = array![
            [0.0, 1.0],
            [1.0, 0.0],
            [2.0, 2.0],
            [3.0, 1.0],
            [4.0, 3.0],
            [5.0, 0.5]
        ];
        let y = [0, 1, 0, 1, 1, 0];
        let loss = |stages| {
            let p = BoostingParams {
                n_estimators: stages,
                learning_rate: 0.1,
                max_depth: Some(2),
            };
            let m = fit_boosting(x.view(), &y, &p, &mut rng_from_seed(1)).unwrap();
            x.rows()
                .into_iter()
                .zip(&y)
                .map(|(r, &l)| {
                    let q = m.probability(&r.to_vec());
                    -(if l == 1 { q } else { 1.0 - q }).ln()
                })
                .sum::<f64>()
        };
        assert!(loss(20) < loss(5));
    }
}
