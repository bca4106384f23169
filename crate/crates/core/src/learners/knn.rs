use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::standardize::Standardizer;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub standardize: bool,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: 5,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub standardizer: Standardizer,
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<Label>,
    pub dim: usize,
}

/// Indices of the `k` smallest distances, ties broken by lower index.
pub fn k_nearest(distances: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..distances.len()).collect();
    let cmp = |a: &usize, b: &usize| distances[*a].total_cmp(&distances[*b]).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k, cmp);
        idx.truncate(k);
    }
    idx.sort_by(cmp);
    idx
}

pub fn fit_knn(x: ArrayView2<'_, f64>, y: &[Label], params: &KnnParams) -> Result<KnnModel> {
    if params.k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if params.k > y.len() {
        return Err(Error::InvalidInput(format!(
            "k = {} exceeds training size {}",
            params.k,
            y.len()
        )));
    }
    let d = x.ncols();
    let standardizer = if params.standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(d)
    };
    let z = standardizer.transform(x);
    Ok(KnnModel {
        standardizer,
        k: params.k,
        x: z.iter().copied().collect(),
        y: y.to_vec(),
        dim: d,
    })
}

impl KnnModel {
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let z = self.standardizer.transform_row(x);
        let dist: Vec<f64> = self
            .x
            .chunks_exact(self.dim)
            .map(|r| r.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        k_nearest(&dist, self.k)
    }

    /// Fraction of the `k` nearest neighbours labelled 1.
    pub fn vote_share(&self, x: &[f64]) -> f64 {
        let nn = self.neighbors(x);
        nn.iter().filter(|&&i| self.y[i] == 1).count() as f64 / nn.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_neighbour_recovers_training_labels() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0]];
        let y = [0, 1, 1, 0];
        let m = fit_knn(
            x.view(),
            &y,
            &KnnParams {
                k: 1,
                standardize: false,
            },
        )
        .unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            assert_eq!(m.neighbors(&row.to_vec()), vec![i]);
            assert_eq!(m.vote_share(&row.to_vec()), y[i] as f64);
        }
    }

    #[test]
    fn equal_distances_prefer_lower_index() {
        assert_eq!(k_nearest(&[2.0, 1.0, 1.0, 1.0, 0.5], 3), vec![4, 1, 2]);
    }

    #[test]
    fn vote_share_counts_positive_neighbours() {
        let x = array![[0.0], [1.0], [2.0], [10.0], [11.0]];
        let y = [1, 0, 1, 0, 0];
        let m = fit_knn(
            x.view(),
            &y,
            &KnnParams {
                k: 3,
                standardize: false,
            },
        )
        .unwrap();
        assert!((m.vote_share(&[0.9]) - 2.0 / 3.0).abs() < 1e-15);
        assert!(fit_knn(
            x.view(),
            &y,
            &KnnParams {
                k: 6,
                standardize: false
            }
        )
        .is_err());
    }
}
