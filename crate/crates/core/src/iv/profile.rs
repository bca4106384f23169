use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Label;

const TABLE_A1: &str = include_str!("../../data/table_a1_profile.json");

/// Per-feature analytical CV and per-class biological CV.
///
/// All entries are dimensionless fractions (0.03 means 3%).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvProfile {
    pub feature_names: Vec<String>,
    pub cva: Vec<f64>,
    pub cvi_by_class: BTreeMap<Label, Vec<f64>>,
    /// Directly estimated total CV, when the profile came from a study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvt_by_class: Option<BTreeMap<Label, Vec<f64>>>,
}

impl CvProfile {
    pub fn new(
        feature_names: Vec<String>,
        cva: Vec<f64>,
        cvi_by_class: BTreeMap<Label, Vec<f64>>,
    ) -> Result<Self> {
        let profile = CvProfile {
            feature_names,
            cva,
            cvi_by_class,
            cvt_by_class: None,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// The CVA/CVI values of the bundled blood-panel table (18 features).
    pub fn table_a1() -> Self {
        Self::from_json(TABLE_A1).expect("bundled profile is valid")
    }

    /// A profile with every coefficient zero, for the given classes.
    pub fn zero(feature_names: &[String], classes: &[Label]) -> Self {
        let d = feature_names.len();
        CvProfile {
            feature_names: feature_names.to_vec(),
            cva: vec![0.0; d],
            cvi_by_class: classes.iter().map(|&c| (c, vec![0.0; d])).collect(),
            cvt_by_class: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        let check = |what: &str, v: &[f64]| -> Result<()> {
            if v.len() != d {
                return Err(Error::InvalidInput(format!(
                    "{what} has {} entries for {d} features",
                    v.len()
                )));
            }
            if let Some(bad) = v.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "{what} contains invalid coefficient {bad}"
                )));
            }
            Ok(())
        };
        check("cva", &self.cva)?;
        if self.cvi_by_class.is_empty() {
            return Err(Error::InvalidInput("profile has no cvi classes".into()));
        }
        for (class, cvi) in &self.cvi_by_class {
            check(&format!("cvi[{class}]"), cvi)?;
        }
        if let Some(cvt) = &self.cvt_by_class {
            for (class, v) in cvt {
                check(&format!("cvt[{class}]"), v)?;
            }
        }
        Ok(())
    }

    pub fn cvi(&self, class: Label) -> Result<&[f64]> {
        self.cvi_by_class
            .get(&class)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownClass(class))
    }

    /// Total CV `sqrt(cva^2 + cvi_y^2)` per feature.
    pub fn cvt(&self, class: Label) -> Result<Vec<f64>> {
        let cvi = self.cvi(class)?;
        Ok(self
            .cva
            .iter()
            .zip(cvi)
            .map(|(a, i)| (a * a + i * i).sqrt())
            .collect())
    }

    pub fn is_zero(&self) -> bool {
        self.cva.iter().all(|&c| c == 0.0)
            && self.cvi_by_class.values().flatten().all(|&c| c == 0.0)
    }

    /// Replaces every class's CVI by the elementwise maximum over classes,
    /// so that scales no longer depend on the label.
    pub fn class_agnostic(&self) -> Self {
        let d = self.dim();
        let mut worst = vec![0.0f64; d];
        for cvi in self.cvi_by_class.values() {
            for (w, c) in worst.iter_mut().zip(cvi) {
                *w = w.max(*c);
            }
        }
        CvProfile {
            feature_names: self.feature_names.clone(),
            cva: self.cva.clone(),
            cvi_by_class: self
                .cvi_by_class
                .keys()
                .map(|&k| (k, worst.clone()))
                .collect(),
            cvt_by_class: None,
        }
    }

    /// Reorders the profile to follow `names`. Fails with the set differences
    /// when the two name sets disagree.
    pub fn aligned_to(&self, names: &[String]) -> Result<Self> {
        let missing_in_profile: Vec<String> = names
            .iter()
            .filter(|n| !self.feature_names.contains(n))
            .cloned()
            .collect();
        let missing_in_data: Vec<String> = self
            .feature_names
            .iter()
            .filter(|n| !names.contains(n))
            .cloned()
            .collect();
        if !missing_in_profile.is_empty() || !missing_in_data.is_empty() {
            return Err(Error::FeatureMismatch {
                missing_in_profile,
                missing_in_data,
            });
        }
        let index: Vec<usize> = names
            .iter()
            .map(|n| self.feature_names.iter().position(|m| m == n).unwrap())
            .collect();
        let pick = |v: &Vec<f64>| index.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Ok(CvProfile {
            feature_names: names.to_vec(),
            cva: pick(&self.cva),
            cvi_by_class: self
                .cvi_by_class
                .iter()
                .map(|(k, v)| (*k, pick(v)))
                .collect(),
            cvt_by_class: self
                .cvt_by_class
                .as_ref()
                .map(|m| m.iter().map(|(k, v)| (*k, pick(v))).collect()),
        })
    }

    /// Checks that every label in `classes` has a CVI entry.
    pub fn covers_classes(&self, classes: impl IntoIterator<Item = Label>) -> Result<()> {
        for c in classes {
            self.cvi(c)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let profile: CvProfile = serde_json::from_str(text)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
