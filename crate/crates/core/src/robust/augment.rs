use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::iv::{build_sigma, sample_diagonal, CvProfile, PerturbOptions};
use crate::Label;

/// `n` perturbed copies of every row (originals excluded), grouped by source
/// row: rows `i * n .. (i + 1) * n` come from row `i`.
pub fn augment<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: &[Label],
    profile: &CvProfile,
    n: usize,
    options: PerturbOptions,
    rng: &mut R,
) -> Result<(Array2<f64>, Vec<Label>)> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "augmentation count must be at least 1".into(),
        ));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let d = x.ncols();
    let mut data = Vec::with_capacity(x.nrows() * n * d);
    let mut labels = Vec::with_capacity(x.nrows() * n);
    for (row, &label) in x.rows().into_iter().zip(y) {
        let center = row.to_vec();
        let sigma = build_sigma(&center, label, profile)?;
        for _ in 0..n {
            data.extend(sample_diagonal(&center, &sigma, options, rng));
            labels.push(label);
        }
    }
    let xa = Array2::from_shape_vec((labels.len(), d), data).expect("shape matches buffer");
    Ok((xa, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn cardinality_and_labels() {
        let x = Array2::from_shape_fn((50, 3), |(i, j)| 1.0 + (i * 3 + j) as f64);
        let y: Vec<Label> = (0..50).map(|i| u8::from(i % 5 == 0)).collect();
        let profile = crate::iv::CvProfile::zero(&names(3), &[0, 1]);
        let mut p = profile.clone();
        p.cva = vec![0.1; 3];
        let (xa, ya) = augment(
            x.view(),
            &y,
            &p,
            100,
            PerturbOptions::default(),
            &mut rng_from_seed(1),
        )
        .unwrap();
        assert_eq!(xa.nrows(), 5000);
        assert_eq!(
            ya.iter().filter(|&&l| l == 1).count(),
            100 * y.iter().filter(|&&l| l == 1).count()
        );
        assert_ne!(xa.row(0), x.row(0));
    }

    #[test]
    fn zero_profile_copies_sources() {
        let x = Array2::from_shape_fn((4, 2), |(i, j)| (i + 2 * j) as f64 - 1.5);
        let y = [0, 1, 0, 1];
        let profile = crate::iv::CvProfile::zero(&names(2), &[0, 1]);
        let (xa, ya) = augment(
            x.view(),
            &y,
            &profile,
            3,
            PerturbOptions::default(),
            &mut rng_from_seed(1),
        )
        .unwrap();
        for k in 0..12 {
            assert_eq!(xa.row(k), x.row(k / 3));
            assert_eq!(ya[k], y[k / 3]);
        }
        assert!(augment(
            x.view(),
            &y,
            &profile,
            0,
            PerturbOptions::default(),
            &mut rng_from_seed(1)
        )
        .is_err());
    }
}
