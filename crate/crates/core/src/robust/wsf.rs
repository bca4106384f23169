//! Weighted re-sampling forest: a bagged ensemble of extremely randomized
//! trees where every bootstrap draw of a fuzzy instance is realized by
//! alpha-cut sampling before the tree is grown.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::forest::{
    bootstrap_sample, stream, tree_seed, tree_vote, Forest, STREAM_ALPHA, STREAM_BOOTSTRAP,
    STREAM_TREE,
};
use crate::learners::tree::{fit_tree, MaxFeatures, RowMatrix, Splitter, TreeParams};
use crate::robust::{alpha_cut_sample, ImpreciseInstance, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsfParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for WsfParams {
    fn default() -> Self {
        WsfParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams {
                max_depth: None,
                max_features: MaxFeatures::Sqrt,
                splitter: Splitter::Random,
                ..Default::default()
            },
        }
    }
}

/// Trees, their seeds and out-of-bag index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WsfEnsemble {
    pub forest: Forest,
}

pub fn fit_wsf(train: &[ImpreciseInstance], params: &WsfParams, seed: u64) -> Result<WsfEnsemble> {
    if params.n_trees == 0 {
        return Err(Error::InvalidInput(
            "ensemble size must be at least 1".into(),
        ));
    }
    let first = train
        .first()
        .ok_or_else(|| Error::Empty("WSF needs training instances".into()))?;
    let d = first.dim();
    for t in train {
        if t.scheme != Scheme::Poss {
            return Err(Error::InvalidInput(
                "WSF needs possibilistic instances".into(),
            ));
        }
        if t.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: t.dim(),
            });
        }
    }
    let n = train.len();
    let mut forest = Forest {
        trees: Vec::new(),
        tree_seeds: Vec::new(),
        out_of_bag: Vec::new(),
        dim: d,
    };
    let mut realized = Vec::with_capacity(n * d);
    for i in 0..params.n_trees {
        let ts = tree_seed(seed, i);
        let (drawn, oob) = if params.bootstrap {
            bootstrap_sample(n, &mut stream(ts, STREAM_BOOTSTRAP))
        } else {
            ((0..n).collect(), Vec::new())
        };
        let mut alpha_rng = stream(ts, STREAM_ALPHA);
        realized.clear();
        let mut targets = Vec::with_capacity(n);
        for &r in &drawn {
            let (point, label, _) = alpha_cut_sample(&train[r], &mut alpha_rng);
            realized.extend(point);
            targets.push(label as f64);
        }
        let x = RowMatrix::new(&realized, drawn.len(), d);
        let slots: Vec<usize> = (0..drawn.len()).collect();
        let fitted = fit_tree(
            x,
            &slots,
            &targets,
            &params.tree,
            &mut stream(ts, STREAM_TREE),
        )?;
        forest.trees.push(fitted.tree);
        forest.tree_seeds.push(ts);
        forest.out_of_bag.push(oob);
    }
    Ok(WsfEnsemble { forest })
}

impl WsfEnsemble {
    pub fn n_trees(&self) -> usize {
        self.forest.trees.len()
    }

    pub fn dim(&self) -> usize {
        self.forest.dim
    }

    /// Fraction of trees voting 1 at a crisp point.
    pub fn vote_share(&self, x: &[f64]) -> f64 {
        self.forest.vote_share(x)
    }

    /// Per-tree `(error rate, |V_i|)` on the out-of-bag instances, judged at
    /// their centers. Trees with an empty out-of-bag set are skipped.
    pub fn oob_errors(&self, train: &[ImpreciseInstance]) -> Vec<(f64, usize)> {
        self.forest
            .trees
            .iter()
            .zip(&self.forest.out_of_bag)
            .filter(|(_, oob)| !oob.is_empty())
            .map(|(tree, oob)| {
                let wrong = oob
                    .iter()
                    .filter(|&&i| tree_vote(tree, &train[i].center) != train[i].label)
                    .count();
                (wrong as f64 / oob.len() as f64, oob.len())
            })
            .collect()
    }
}

/// `KL(a || b)` between Bernoulli distributions.
pub fn bernoulli_kl(a: f64, b: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub bound: f64,
    /// `p >= 1/2`: the bound carries no information and is reported as 1.
    pub vacuous: bool,
}

/// `exp(-n KL(1/2 || p))`.
pub fn bound_from_p(p: f64, n: usize) -> Result<BoundReport> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "p must be a finite non-negative number, got {p}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput(
            "ensemble size must be at least 1".into(),
        ));
    }
    Ok(if p >= 0.5 {
        BoundReport {
            p,
            bound: 1.0,
            vacuous: true,
        }
    } else if p == 0.0 {
        BoundReport {
            p,
            bound: 0.0,
            vacuous: false,
        }
    } else {
        BoundReport {
            p,
            bound: (-(n as f64) * bernoulli_kl(0.5, p)).exp(),
            vacuous: false,
        }
    })
}

/// Sums each tree's out-of-bag error plus its Hoeffding slack
/// `sqrt(ln(2|V|/delta) / (2|V|))` into `p`, then applies [`bound_from_p`].
pub fn wsf_generalization_bound(oob: &[(f64, usize)], n: usize, delta: f64) -> Result<BoundReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let mut p = 0.0;
    for &(err, size) in oob {
        if size == 0 {
            return Err(Error::InvalidInput("out-of-bag set is empty".into()));
        }
        if !(0.0..=1.0).contains(&err) {
            return Err(Error::InvalidInput(format!(
                "error rate {err} outside [0, 1]"
            )));
        }
        let v = size as f64;
        p += err + ((2.0 * v / delta).ln() / (2.0 * v)).sqrt();
    }
    bound_from_p(p, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_value_at_quarter() {
        let kl = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((bernoulli_kl(0.5, 0.25) - kl).abs() < 1e-15);
        let r = bound_from_p(0.25, 10).unwrap();
        assert!((r.bound - (-10.0 * kl).exp()).abs() < 1e-12);
        assert!((r.bound - 0.2373).abs() < 1e-4);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(
            bound_from_p(0.5, 10).unwrap(),
            BoundReport {
                p: 0.5,
                bound: 1.0,
                vacuous: true
            }
        );
        assert!(bound_from_p(0.7, 3).unwrap().vacuous);
        assert_eq!(bound_from_p(0.0, 3).unwrap().bound, 0.0);
        assert!(bound_from_p(0.2, 0).is_err());
        assert!(wsf_generalization_bound(&[(0.1, 0)], 1, 0.05).is_err());
    }

    #[test]
    fn slack_enters_p() {
        let delta = 0.05;
        let r = wsf_generalization_bound(&[(0.01, 1000), (0.02, 800)], 2, delta).unwrap();
        let s = |v: f64| ((2.0 * v / delta).ln() / (2.0 * v)).sqrt();
        assert!((r.p - (0.03 + s(1000.0) + s(800.0))).abs() < 1e-15);
    }
}
