//! Synthetic stand-in for the blood-panel cohort.
//!
//! Each class draws its features from independent Gaussians. The default
//! specification reproduces the marginal mean and standard deviation of
//! every feature in the bundled table; the four most predictive features
//! (LY, WBC, NE, AST) carry a class-conditional mean shift.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iv::{CvProfile, Dataset};
use crate::rng::rng_from_seed;
use crate::Label;

/// Marginal means of the 18 blood-panel features, in table order.
pub const TABLE_A1_MEANS: [f64; 18] = [
    39.87, 46.90, 88.61, 67.48, 332.52, 184.47, 2.20, 119.12, 48.64, 1.19, 8.65, 4.55, 39.47,
    72.48, 18.58, 7.76, 0.82, 0.34,
];

/// Marginal standard deviations, in table order.
pub const TABLE_A1_SDS: [f64; 18] = [
    42.26, 51.90, 72.09, 140.52, 218.43, 382.02, 0.17, 55.80, 42.69, 1.01, 4.77, 0.72, 5.57, 13.35,
    11.11, 3.86, 1.59, 0.27,
];

pub const DEFAULT_PREVALENCE: f64 = 0.53;
pub const DEFAULT_INSTANCES: usize = 1422;
pub const DEFAULT_SEED: u64 = 99;

/// Positive-minus-negative class mean difference, in marginal SD units.
///
/// AST is shifted down for positives: with symmetric marginals, moving the
/// high-CVI class towards large |AST| makes the perturbed column visibly wider
/// than the original, which the skewed real measurand does not show.
pub const DEFAULT_CLASS_SHIFTS: [(&str, f64); 4] =
    [("LY", -0.7), ("WBC", -0.7), ("NE", 0.7), ("AST", -0.7)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub feature_names: Vec<String>,
    pub class_means: BTreeMap<Label, Vec<f64>>,
    pub class_sds: BTreeMap<Label, Vec<f64>>,
    /// Probability of label 1.
    pub prevalence: f64,
    pub instances: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Builds per-class Gaussians whose two-component mixture has the given
    /// marginal means and SDs. `shifts[j]` is the class-1 minus class-0 mean
    /// difference in units of `sds[j]`.
    pub fn from_marginals(
        feature_names: Vec<String>,
        means: &[f64],
        sds: &[f64],
        shifts: &[f64],
        prevalence: f64,
        instances: usize,
        seed: u64,
    ) -> Result<Self> {
        let d = feature_names.len();
        if means.len() != d || sds.len() != d || shifts.len() != d {
            return Err(Error::InvalidInput(
                "marginal vectors must match feature count".into(),
            ));
        }
        let p = prevalence;
        let mut m0 = Vec::with_capacity(d);
        let mut m1 = Vec::with_capacity(d);
        let mut within = Vec::with_capacity(d);
        for j in 0..d {
            let delta = shifts[j] * sds[j];
            let residual = sds[j] * sds[j] - p * (1.0 - p) * delta * delta;
            if !(residual > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "shift {} too large for feature {}",
                    shifts[j], feature_names[j]
                )));
            }
            m0.push(means[j] - p * delta);
            m1.push(means[j] + (1.0 - p) * delta);
            within.push(residual.sqrt());
        }
        let spec = SyntheticSpec {
            feature_names,
            class_means: BTreeMap::from([(0, m0), (1, m1)]),
            class_sds: BTreeMap::from([(0, within.clone()), (1, within)]),
            prevalence,
            instances,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The default benchmark: bundled-table marginals with shifts on LY, WBC,
    /// NE and AST, prevalence 0.53, 1422 instances, seed 99.
    pub fn table_a1_default() -> Self {
        Self::table_a1_with_shifts(&DEFAULT_CLASS_SHIFTS)
    }

    pub fn table_a1_with_shifts(shifts: &[(&str, f64)]) -> Self {
        let names = CvProfile::table_a1().feature_names;
        let shift: Vec<f64> = names
            .iter()
            .map(|n| shifts.iter().find(|(m, _)| m == n).map_or(0.0, |s| s.1))
            .collect();
        Self::from_marginals(
            names,
            &TABLE_A1_MEANS,
            &TABLE_A1_SDS,
            &shift,
            DEFAULT_PREVALENCE,
            DEFAULT_INSTANCES,
            DEFAULT_SEED,
        )
        .expect("default synthetic spec is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::InvalidInput(format!(
                "prevalence {} outside (0, 1)",
                self.prevalence
            )));
        }
        if self.instances == 0 {
            return Err(Error::InvalidInput(
                "instance count must be positive".into(),
            ));
        }
        for class in [0u8, 1] {
            let means = self
                .class_means
                .get(&class)
                .ok_or(Error::UnknownClass(class))?;
            let sds = self
                .class_sds
                .get(&class)
                .ok_or(Error::UnknownClass(class))?;
            if means.len() != d || sds.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: means.len().min(sds.len()),
                });
            }
            if sds.iter().any(|s| !(*s > 0.0 && s.is_finite()))
                || means.iter().any(|m| !m.is_finite())
            {
                return Err(Error::InvalidInput(
                    "class SDs must be positive and means finite".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SyntheticSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Generates the dataset with the spec's own seed.
    pub fn generate(&self) -> Result<Dataset> {
        synthesize_dataset(self, &mut rng_from_seed(self.seed))
    }
}

pub fn synthesize_dataset<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.feature_names.len();
    let n = spec.instances;
    let mut x = Array2::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label: Label = u8::from(rng.random::<f64>() < spec.prevalence);
        let means = &spec.class_means[&label];
        let sds = &spec.class_sds[&label];
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            x[[i, j]] = means[j] + sds[j] * z;
        }
        y.push(label);
    }
    Dataset::new(x, y, spec.feature_names.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_preserves_marginals() {
        let spec = SyntheticSpec::table_a1_default();
        let p = spec.prevalence;
        for j in 0..18 {
            let (m0, m1) = (spec.class_means[&0][j], spec.class_means[&1][j]);
            let s = spec.class_sds[&0][j];
            let mean = (1.0 - p) * m0 + p * m1;
            let var = s * s + p * (1.0 - p) * (m1 - m0).powi(2);
            assert!((mean - TABLE_A1_MEANS[j]).abs() < 1e-9);
            assert!((var.sqrt() - TABLE_A1_SDS[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn prevalence_within_binomial_interval() {
        let mut spec = SyntheticSpec::table_a1_default();
        spec.instances = 1000;
        let ds = spec.generate().unwrap();
        let positives = ds.class_counts()[1] as f64;
        // 99% normal-approximation interval around 530
        let half = 2.5758 * (1000.0f64 * 0.53 * 0.47).sqrt();
        assert!((positives - 530.0).abs() <= half, "{positives}");
    }

    #[test]
    fn class_zero_wbc_mean_near_spec() {
        let spec = SyntheticSpec::table_a1_with_shifts(&[]);
        let ds = spec.generate().unwrap();
        let wbc = ds.column_index("WBC").unwrap();
        let vals: Vec<f64> = (0..ds.len())
            .filter(|&i| ds.y[i] == 0)
            .map(|i| ds.x[[i, wbc]])
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let se = 4.77 / (vals.len() as f64).sqrt();
        assert!((mean - 8.65).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn reproducible_under_seed() {
        let spec = SyntheticSpec::table_a1_default();
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = SyntheticSpec::table_a1_default();
        spec.instances = 0;
        assert!(spec.generate().is_err());
        let mut spec = SyntheticSpec::table_a1_default();
        spec.prevalence = 1.0;
        assert!(spec.validate().is_err());
        assert!(SyntheticSpec::from_marginals(
            vec!["a".into()],
            &[0.0],
            &[1.0],
            &[3.0],
            0.5,
            10,
            1
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = SyntheticSpec::table_a1_default();
        assert_eq!(
            SyntheticSpec::from_json(&spec.to_json().unwrap()).unwrap(),
            spec
        );
    }
}
