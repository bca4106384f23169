//! IV-aware learners: augmentation, k-nearest distributions (KND),
//! support measure machines (SMM) and weighted re-sampling forests (WSF).

mod augment;
mod imprecise;
pub mod knd;
pub mod smm;
pub mod wsf;

pub use augment::augment;
pub use imprecise::{
    alpha_cut_sample, cut_half_width, gauss_membership, imprecisiate, imprecisiate_all, sample_cut,
    ImpreciseInstance, Scheme,
};
pub use knd::{fit_knd, knd_distance, KndModel};
pub use smm::{fit_smm, smm_kernel, SmmModel, SmmParams};
pub use wsf::{
    bound_from_p, fit_wsf, wsf_generalization_bound, BoundReport, WsfEnsemble, WsfParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::DecisionRule;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustKind {
    Knd,
    Smm,
    Wsf,
}

impl RobustKind {
    pub const ALL: [RobustKind; 3] = [RobustKind::Knd, RobustKind::Smm, RobustKind::Wsf];

    pub fn abbreviation(self) -> &'static str {
        match self {
            RobustKind::Knd => "KND",
            RobustKind::Smm => "SMM",
            RobustKind::Wsf => "WSF",
        }
    }

    /// The imprecisiation scheme the method consumes.
    pub fn scheme(self) -> Scheme {
        match self {
            RobustKind::Knd | RobustKind::Smm => Scheme::Prob,
            RobustKind::Wsf => Scheme::Poss,
        }
    }
}

/// Settings for the three imprecise-instance learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustConfig {
    pub knd_k: usize,
    pub smm: SmmParams,
    pub wsf: WsfParams,
}

impl Default for RobustConfig {
    fn default() -> Self {
        RobustConfig {
            knd_k: 5,
            smm: SmmParams::default(),
            wsf: WsfParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RobustModel {
    Knd(KndModel),
    Smm(SmmModel),
    Wsf(WsfEnsemble),
}

impl RobustModel {
    pub fn kind(&self) -> RobustKind {
        match self {
            RobustModel::Knd(_) => RobustKind::Knd,
            RobustModel::Smm(_) => RobustKind::Smm,
            RobustModel::Wsf(_) => RobustKind::Wsf,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RobustModel::Knd(m) => m.dim(),
            RobustModel::Smm(m) => m.dim(),
            RobustModel::Wsf(m) => m.dim(),
        }
    }

    /// KND: neighbour vote share; SMM: decision value; WSF: tree vote
    /// share at the query's center.
    pub fn score(&self, query: &ImpreciseInstance) -> Result<f64> {
        if query.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: query.dim(),
            });
        }
        Ok(match self {
            RobustModel::Knd(m) => m.vote_share(query),
            RobustModel::Smm(m) => m.decision(query),
            RobustModel::Wsf(m) => m.vote_share(&query.center),
        })
    }

    pub fn rule(&self) -> DecisionRule {
        match self {
            RobustModel::Smm(_) => DecisionRule::AtLeast(0.0),
            RobustModel::Knd(_) | RobustModel::Wsf(_) => DecisionRule::Above(0.5),
        }
    }

    pub fn predict(&self, query: &ImpreciseInstance) -> Result<Label> {
        Ok(self.rule().apply(self.score(query)?))
    }
}

/// Fits one imprecise-instance learner; `train` must use `kind.scheme()`.
pub fn fit_robust(
    kind: RobustKind,
    train: &[ImpreciseInstance],
    config: &RobustConfig,
    seed: u64,
) -> Result<RobustModel> {
    if !(train.iter().any(|t| t.label == 0) && train.iter().any(|t| t.label == 1)) {
        return Err(Error::SingleClass);
    }
    Ok(match kind {
        RobustKind::Knd => RobustModel::Knd(fit_knd(train.to_vec(), config.knd_k)?),
        RobustKind::Smm => RobustModel::Smm(fit_smm(train, &config.smm)?),
        RobustKind::Wsf => RobustModel::Wsf(fit_wsf(train, &config.wsf, seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::forest::{fit_forest, ForestParams};
    use crate::learners::knn::{fit_knn, KnnParams};
    use crate::learners::svm::{fit_svm, SvmParams};
    use crate::learners::tree::RowMatrix;
    use crate::rng::rng_from_seed;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn fixture(n: usize, d: usize, seed: u64) -> (Array2<f64>, Vec<Label>) {
        let mut rng = rng_from_seed(seed);
        let x = Array2::from_shape_fn((n, d), |_| StandardNormal.sample(&mut rng));
        let y = (0..n)
            .map(|i| u8::from(x[[i, 0]] + 0.5 * x[[i, 1]] + 0.3 * rng.random::<f64>() > 0.1))
            .collect();
        (x, y)
    }

    fn crisp(x: &Array2<f64>, y: &[Label], scheme: Scheme) -> Vec<ImpreciseInstance> {
        x.rows()
            .into_iter()
            .zip(y)
            .map(|(r, &l)| ImpreciseInstance::crisp(r.to_vec(), l, scheme))
            .collect()
    }

    #[test]
    fn membership_values() {
        let g = ImpreciseInstance::new(vec![0.0], vec![1.0], 0, Scheme::Poss).unwrap();
        assert_eq!(g.membership(&[0.0]), 1.0);
        assert!((g.membership(&[1.0]) - (-1f64).exp()).abs() < 1e-15);
        assert!(ImpreciseInstance::new(vec![0.0], vec![-1.0], 0, Scheme::Poss).is_err());
        assert!(ImpreciseInstance::new(vec![0.0, 1.0], vec![1.0], 0, Scheme::Poss).is_err());
    }

    #[test]
    fn alpha_cut_at_inverse_e_is_unit_interval() {
        let g = ImpreciseInstance::new(vec![0.0], vec![1.0], 1, Scheme::Poss).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..1000 {
            let p = sample_cut(&g, (-1f64).exp(), &mut rng);
            assert!(p[0].abs() <= 1.0 + 1e-12);
        }
        let c = ImpreciseInstance::crisp(vec![2.5, -1.0], 1, Scheme::Poss);
        let (p, l, _) = alpha_cut_sample(&c, &mut rng);
        assert_eq!((p, l), (vec![2.5, -1.0], 1));
    }

    #[test]
    fn knd_with_zero_scales_matches_euclidean_knn() {
        let (x, y) = fixture(60, 3, 1);
        let (xt, yt) = fixture(40, 3, 2);
        let knd = fit_knd(crisp(&x, &y, Scheme::Prob), 5).unwrap();
        assert!(knd.regularized);
        let knn = fit_knn(
            x.view(),
            &y,
            &KnnParams {
                k: 5,
                standardize: false,
            },
        )
        .unwrap();
        for q in crisp(&xt, &yt, Scheme::Prob) {
            assert_eq!(knd.neighbors(&q), knn.neighbors(&q.center));
        }
    }

    #[test]
    fn smm_with_zero_scales_matches_crisp_svm() {
        let (x, y) = fixture(80, 3, 3);
        let (xt, yt) = fixture(40, 3, 4);
        let gamma = 0.4;
        let smm = fit_smm(
            &crisp(&x, &y, Scheme::Prob),
            &SmmParams {
                gamma: Some(gamma),
                ..Default::default()
            },
        )
        .unwrap();
        // the embedding kernel at zero covariance is exp(-gamma |d|^2 / 2)
        let svm = fit_svm(
            x.view(),
            &y,
            &SvmParams {
                gamma: Some(gamma / 2.0),
                ..Default::default()
            },
        )
        .unwrap();
        for q in crisp(&xt, &yt, Scheme::Prob) {
            let a = smm.decision(&q);
            let b = svm.decision(&q.center);
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            assert_eq!(u8::from(a >= 0.0), u8::from(b >= 0.0));
        }
    }

    #[test]
    fn wsf_with_zero_scales_matches_bootstrapped_extra_trees() {
        let (x, y) = fixture(70, 4, 5);
        let (xt, _) = fixture(30, 4, 6);
        let params = WsfParams {
            n_trees: 15,
            ..Default::default()
        };
        let wsf = fit_wsf(&crisp(&x, &y, Scheme::Poss), &params, 99).unwrap();
        let m = RowMatrix::from_array(&x);
        let fp = ForestParams {
            n_trees: 15,
            bootstrap: true,
            tree: params.tree,
        };
        let et = fit_forest(m, &y, &fp, 99).unwrap();
        assert_eq!(wsf.forest, et);
        for r in xt.rows() {
            assert_eq!(wsf.vote_share(&r.to_vec()), et.vote_share(&r.to_vec()));
        }
    }

    #[test]
    fn wsf_has_distinct_tree_seeds_and_low_oob_error_on_separable_data() {
        let mut rng = rng_from_seed(7);
        let n = 200;
        let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
        let y: Vec<Label> = (0..n)
            .map(|i| u8::from(x[[i, 0]] + x[[i, 1]] > 0.0))
            .collect();
        let wsf = fit_wsf(&crisp(&x, &y, Scheme::Poss), &WsfParams::default(), 99).unwrap();
        assert_eq!(wsf.n_trees(), 100);
        let mut seeds = wsf.forest.tree_seeds.clone();
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 100);
        let train = crisp(&x, &y, Scheme::Poss);
        // ensemble out-of-bag error: each point voted on by trees that never saw it
        let mut wrong = 0;
        let mut counted = 0;
        for i in 0..n {
            let voters: Vec<_> = (0..100)
                .filter(|&t| wsf.forest.out_of_bag[t].contains(&i))
                .collect();
            if voters.is_empty() {
                continue;
            }
            let ones = voters
                .iter()
                .filter(|&&t| {
                    crate::learners::forest::tree_vote(&wsf.forest.trees[t], &train[i].center) == 1
                })
                .count();
            let pred = u8::from(2 * ones > voters.len());
            counted += 1;
            wrong += usize::from(pred != y[i]);
        }
        assert!((wrong as f64 / counted as f64) < 0.1);
    }

    #[test]
    fn wsf_tie_goes_to_class_zero() {
        let (x, y) = fixture(30, 2, 8);
        let mut wsf = fit_wsf(
            &crisp(&x, &y, Scheme::Poss),
            &WsfParams {
                n_trees: 2,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        use crate::learners::tree::{Node, Tree};
        wsf.forest.trees = vec![
            Tree {
                nodes: vec![Node::Leaf { value: 1.0 }],
            },
            Tree {
                nodes: vec![Node::Leaf { value: 0.0 }],
            },
        ];
        let model = RobustModel::Wsf(wsf);
        let q = ImpreciseInstance::crisp(vec![0.0, 0.0], 0, Scheme::Poss);
        assert_eq!(model.score(&q).unwrap(), 0.5);
        assert_eq!(model.predict(&q).unwrap(), 0);
        assert!(model
            .score(&ImpreciseInstance::crisp(vec![0.0], 0, Scheme::Poss))
            .is_err());
    }
}
