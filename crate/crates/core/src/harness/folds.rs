use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::Label;

/// Fold index per row. Each class is shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes differ by at most one.
pub fn stratified_folds<R: Rng + ?Sized>(y: &[Label], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if y.len() < k {
        return Err(Error::InvalidInput(format!(
            "{} rows cannot fill {k} folds",
            y.len()
        )));
    }
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(rng);
        for i in idx {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Both classes appear in every test fold and every training complement.
pub fn folds_are_usable(y: &[Label], assignment: &[usize], k: usize) -> bool {
    let mut count = vec![[0usize; 2]; k];
    for (&f, &l) in assignment.iter().zip(y) {
        count[f][l as usize] += 1;
    }
    let total = [
        y.iter().filter(|&&l| l == 0).count(),
        y.iter().filter(|&&l| l == 1).count(),
    ];
    count
        .iter()
        .all(|c| c[0] > 0 && c[1] > 0 && total[0] > c[0] && total[1] > c[1])
}

/// `(train, test)` row indices of fold `f`.
pub fn split(assignment: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    let (test, train): (Vec<usize>, Vec<usize>) =
        (0..assignment.len()).partition(|&i| assignment[i] == f);
    (train, test)
}
