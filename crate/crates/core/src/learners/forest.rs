//! Bagged tree ensembles: random forest and extremely randomized trees.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::tree::{fit_tree, RowMatrix, Tree, TreeParams};
use crate::rng::{derive_rng, derive_seed, SeededRng};
use crate::Label;

/// Stream tags for the per-tree random sources.
pub(crate) const STREAM_BOOTSTRAP: u64 = 0;
pub(crate) const STREAM_TREE: u64 = 1;
pub(crate) const STREAM_ALPHA: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

/// A fitted ensemble of classification trees; each leaf stores the class-1
/// fraction and a tree votes 1 when that fraction exceeds one half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// Seed each tree's random streams were derived from.
    pub tree_seeds: Vec<u64>,
    /// Training indices not drawn into each tree's bootstrap sample.
    pub out_of_bag: Vec<Vec<usize>>,
    pub dim: usize,
}

pub fn tree_vote(tree: &Tree, x: &[f64]) -> Label {
    u8::from(tree.predict(x) > 0.5)
}

impl Forest {
    /// Fraction of trees voting for class 1.
    pub fn vote_share(&self, x: &[f64]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| tree_vote(t, x) as usize).sum();
        votes as f64 / self.trees.len() as f64
    }
}

/// Draws `n` indices with replacement and returns them with the indices
/// never drawn.
pub fn bootstrap_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let drawn: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut seen = vec![false; n];
    for &i in &drawn {
        seen[i] = true;
    }
    let oob = (0..n).filter(|&i| !seen[i]).collect();
    (drawn, oob)
}

pub(crate) fn tree_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, &[index as u64])
}

pub(crate) fn stream(tree_seed: u64, tag: u64) -> SeededRng {
    derive_rng(tree_seed, &[tag])
}

pub fn fit_forest(
    x: RowMatrix<'_>,
    y: &[Label],
    params: &ForestParams,
    seed: u64,
) -> Result<Forest> {
    if params.n_trees == 0 {
        return Err(Error::InvalidInput(
            "ensemble size must be at least 1".into(),
        ));
    }
    let n = x.rows;
    let targets_all: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut tree_seeds = Vec::with_capacity(params.n_trees);
    let mut out_of_bag = Vec::with_capacity(params.n_trees);
    for i in 0..params.n_trees {
        let ts = tree_seed(seed, i);
        let (rows, oob) = if params.bootstrap {
            bootstrap_sample(n, &mut stream(ts, STREAM_BOOTSTRAP))
        } else {
            ((0..n).collect(), Vec::new())
        };
        let targets: Vec<f64> = rows.iter().map(|&r| targets_all[r]).collect();
        let fitted = fit_tree(
            x,
            &rows,
            &targets,
            &params.tree,
            &mut stream(ts, STREAM_TREE),
        )?;
        trees.push(fitted.tree);
        tree_seeds.push(ts);
        out_of_bag.push(oob);
    }
    Ok(Forest {
        trees,
        tree_seeds,
        out_of_bag,
        dim: x.cols,
    })
}
