//! Crisp binary classifiers behind one fit/score/predict interface.

pub mod boosting;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod naive_bayes;
pub mod smo;
pub mod standardize;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Label;
use boosting::{BoostingModel, BoostingParams};
use forest::{Forest, ForestParams};
use knn::{KnnModel, KnnParams};
use logistic::{LogisticModel, LogisticParams};
use naive_bayes::{GaussianNbModel, NaiveBayesParams};
use svm::{SvmModel, SvmParams};
use tree::{MaxFeatures, RowMatrix, Splitter, TreeParams};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SvmRbf,
    Logistic,
    Knn,
    GaussianNb,
    RandomForest,
    ExtraTrees,
    GradientBoosting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::SvmRbf,
        ModelKind::Logistic,
        ModelKind::Knn,
        ModelKind::GaussianNb,
        ModelKind::RandomForest,
        ModelKind::ExtraTrees,
        ModelKind::GradientBoosting,
    ];

    /// Short tag used in reports.
    pub fn abbreviation(self) -> &'static str {
        match self {
            ModelKind::SvmRbf => "SVM",
            ModelKind::Logistic => "LR",
            ModelKind::Knn => "KNN",
            ModelKind::GaussianNb => "NB",
            ModelKind::RandomForest => "RF",
            ModelKind::ExtraTrees => "ET",
            ModelKind::GradientBoosting => "GB",
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            ModelKind::SvmRbf => &["c", "gamma", "tol", "standardize"],
            ModelKind::Logistic => &["c", "tol", "max_iter", "standardize"],
            ModelKind::Knn => &["k", "standardize"],
            ModelKind::GaussianNb => &["var_smoothing"],
            ModelKind::RandomForest | ModelKind::ExtraTrees => {
                &["n_trees", "max_depth", "max_features", "bootstrap"]
            }
            ModelKind::GradientBoosting => &["n_estimators", "learning_rate", "max_depth"],
        }
    }

    fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::SvmRbf => &[("c", 1.0)],
            ModelKind::Logistic => &[("c", 1.0), ("max_iter", 100.0)],
            ModelKind::Knn => &[("k", 5.0)],
            ModelKind::GaussianNb => &[("var_smoothing", 1e-9)],
            ModelKind::RandomForest => &[("n_trees", 100.0), ("max_depth", 10.0)],
            ModelKind::ExtraTrees => &[("n_trees", 100.0)],
            ModelKind::GradientBoosting => &[
                ("n_estimators", 100.0),
                ("learning_rate", 0.1),
                ("max_depth", 10.0),
            ],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbreviation())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| {
                k.abbreviation().eq_ignore_ascii_case(&lower)
                    || serde_json::to_value(k)
                        .ok()
                        .and_then(|v| v.as_str().map(|t| t == lower))
                        == Some(true)
            })
            .ok_or_else(|| Error::InvalidInput(format!("unknown model '{s}'")))
    }
}

/// A model family plus hyperparameters. Absent optional keys (`gamma`,
/// `max_depth`, `max_features`) select the family's automatic behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        let hyperparameters = kind
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        ModelSpec {
            kind,
            hyperparameters,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.hyperparameters.insert(name.to_string(), value);
        self
    }

    pub fn without(mut self, name: &str) -> Self {
        self.hyperparameters.remove(name);
        self
    }

    pub fn all_defaults() -> Vec<ModelSpec> {
        ModelKind::ALL.into_iter().map(ModelSpec::new).collect()
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.hyperparameters.get(name).copied()
    }

    fn positive(&self, name: &str) -> Result<Option<f64>> {
        match self.get(name) {
            Some(v) if v.is_finite() && v > 0.0 => Ok(Some(v)),
            Some(v) => Err(Error::InvalidInput(format!(
                "{}: {name} must be positive, got {v}",
                self.kind
            ))),
            None => Ok(None),
        }
    }

    fn count(&self, name: &str, min: usize) -> Result<Option<usize>> {
        match self.get(name) {
            Some(v) if v.fract() == 0.0 && v >= min as f64 && v < 1e9 => Ok(Some(v as usize)),
            Some(v) => Err(Error::InvalidInput(format!(
                "{}: {name} must be an integer >= {min}, got {v}",
                self.kind
            ))),
            None => Ok(None),
        }
    }

    fn flag(&self, name: &str, default: bool) -> Result<bool> {
        match self.get(name) {
            None => Ok(default),
            Some(v) if v == 0.0 => Ok(false),
            Some(v) if v == 1.0 => Ok(true),
            Some(v) => Err(Error::InvalidInput(format!(
                "{}: {name} must be 0 or 1, got {v}",
                self.kind
            ))),
        }
    }

    /// Rejects unknown names and out-of-range values.
    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    fn resolve(&self) -> Result<Resolved> {
        for name in self.hyperparameters.keys() {
            if !self.kind.allowed().contains(&name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "{}: unknown hyperparameter '{name}'",
                    self.kind
                )));
            }
        }
        Ok(match self.kind {
            ModelKind::SvmRbf => {
                let d = SvmParams::default();
                Resolved::Svm(SvmParams {
                    c: self.positive("c")?.unwrap_or(d.c),
                    gamma: self.positive("gamma")?,
                    tol: self.positive("tol")?.unwrap_or(d.tol),
                    standardize: self.flag("standardize", true)?,
                    ..d
                })
            }
            ModelKind::Logistic => {
                let d = LogisticParams::default();
                Resolved::Logistic(LogisticParams {
                    c: self.positive("c")?.unwrap_or(d.c),
                    tol: self.positive("tol")?.unwrap_or(d.tol),
                    max_iter: self.count("max_iter", 1)?.unwrap_or(d.max_iter),
                    standardize: self.flag("standardize", true)?,
                })
            }
            ModelKind::Knn => Resolved::Knn(KnnParams {
                k: self.count("k", 1)?.unwrap_or(5),
                standardize: self.flag("standardize", true)?,
            }),
            ModelKind::GaussianNb => {
                let v = self.get("var_smoothing").unwrap_or(1e-9);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "NB: var_smoothing must be >= 0, got {v}"
                    )));
                }
                Resolved::NaiveBayes(NaiveBayesParams { var_smoothing: v })
            }
            ModelKind::RandomForest | ModelKind::ExtraTrees => {
                let extra = self.kind == ModelKind::ExtraTrees;
                let max_features = match self.count("max_features", 1)? {
                    Some(k) => MaxFeatures::Count(k),
                    None => MaxFeatures::Sqrt,
                };
                Resolved::Forest(ForestParams {
                    n_trees: self.count("n_trees", 1)?.unwrap_or(100),
                    bootstrap: self.flag("bootstrap", !extra)?,
                    tree: TreeParams {
                        max_depth: self.count("max_depth", 1)?,
                        max_features,
                        splitter: if extra {
                            Splitter::Random
                        } else {
                            Splitter::Best
                        },
                        ..Default::default()
                    },
                })
            }
            ModelKind::GradientBoosting => Resolved::Boosting(BoostingParams {
                n_estimators: self.count("n_estimators", 1)?.unwrap_or(100),
                learning_rate: self.positive("learning_rate")?.unwrap_or(0.1),
                max_depth: self.count("max_depth", 1)?,
            }),
        })
    }
}

enum Resolved {
    Svm(SvmParams),
    Logistic(LogisticParams),
    Knn(KnnParams),
    NaiveBayes(NaiveBayesParams),
    Forest(ForestParams),
    Boosting(BoostingParams),
}

/// How a score maps to a class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecisionRule {
    /// Class 1 iff `score >= t`.
    AtLeast(f64),
    /// Class 1 iff `score > t`.
    Above(f64),
}

impl DecisionRule {
    pub fn apply(self, score: f64) -> Label {
        match self {
            DecisionRule::AtLeast(t) => u8::from(score >= t),
            DecisionRule::Above(t) => u8::from(score > t),
        }
    }
}

/// Anything that scores feature rows for class 1.
pub trait Classifier {
    fn dim(&self) -> usize;

    /// Higher means more class 1.
    fn score_row(&self, x: &[f64]) -> f64;

    fn rule(&self) -> DecisionRule;

    fn predict_row(&self, x: &[f64]) -> Label {
        self.rule().apply(self.score_row(x))
    }

    fn scores(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        Ok(x.rows()
            .into_iter()
            .map(|r| self.score_row(&r.to_vec()))
            .collect())
    }

    fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        let rule = self.rule();
        Ok(self.scores(x)?.into_iter().map(|s| rule.apply(s)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    SvmRbf(SvmModel),
    Logistic(LogisticModel),
    Knn(KnnModel),
    GaussianNb(GaussianNbModel),
    RandomForest(Forest),
    ExtraTrees(Forest),
    GradientBoosting(BoostingModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::SvmRbf(_) => ModelKind::SvmRbf,
            TrainedModel::Logistic(_) => ModelKind::Logistic,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::GaussianNb(_) => ModelKind::GaussianNb,
            TrainedModel::RandomForest(_) => ModelKind::RandomForest,
            TrainedModel::ExtraTrees(_) => ModelKind::ExtraTrees,
            TrainedModel::GradientBoosting(_) => ModelKind::GradientBoosting,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SavedModel {
            schema_version: MODEL_SCHEMA_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let saved: SavedModel = serde_json::from_str(text)?;
        if saved.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "model schema version {} is not supported (expected {MODEL_SCHEMA_VERSION})",
                saved.schema_version
            )));
        }
        Ok(saved.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    schema_version: u32,
    model: TrainedModel,
}

impl Classifier for TrainedModel {
    fn dim(&self) -> usize {
        match self {
            TrainedModel::SvmRbf(m) => m.dim,
            TrainedModel::Logistic(m) => m.dim(),
            TrainedModel::Knn(m) => m.dim,
            TrainedModel::GaussianNb(m) => m.dim(),
            TrainedModel::RandomForest(m) | TrainedModel::ExtraTrees(m) => m.dim,
            TrainedModel::GradientBoosting(m) => m.dim,
        }
    }

    fn score_row(&self, x: &[f64]) -> f64 {
        match self {
            TrainedModel::SvmRbf(m) => m.decision(x),
            TrainedModel::Logistic(m) => m.probability(x),
            TrainedModel::Knn(m) => m.vote_share(x),
            TrainedModel::GaussianNb(m) => m.posterior(x),
            TrainedModel::RandomForest(m) | TrainedModel::ExtraTrees(m) => m.vote_share(x),
            TrainedModel::GradientBoosting(m) => m.probability(x),
        }
    }

    fn rule(&self) -> DecisionRule {
        match self {
            TrainedModel::SvmRbf(_) => DecisionRule::AtLeast(0.0),
            TrainedModel::Logistic(_)
            | TrainedModel::GaussianNb(_)
            | TrainedModel::GradientBoosting(_) => DecisionRule::AtLeast(0.5),
            // vote shares: an exact tie goes to class 0
            TrainedModel::Knn(_) | TrainedModel::RandomForest(_) | TrainedModel::ExtraTrees(_) => {
                DecisionRule::Above(0.5)
            }
        }
    }
}

/// Checks shapes, labels, finiteness and that both classes are present.
pub fn check_training(x: ArrayView2<'_, f64>, y: &[Label]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Empty("training set has no rows".into()));
    }
    if x.ncols() == 0 {
        return Err(Error::Empty("training set has no features".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::UnknownClass(bad));
    }
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column: col });
        }
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Fits `spec` on `(x, y)`. Randomized families take their seed from `rng`.
pub fn fit<R: Rng + ?Sized>(
    spec: &ModelSpec,
    x: ArrayView2<'_, f64>,
    y: &[Label],
    rng: &mut R,
) -> Result<TrainedModel> {
    check_training(x, y)?;
    let resolved = spec.resolve()?;
    Ok(match resolved {
        Resolved::Svm(p) => TrainedModel::SvmRbf(svm::fit_svm(x, y, &p)?),
        Resolved::Logistic(p) => TrainedModel::Logistic(logistic::fit_logistic(x, y, &p)?),
        Resolved::Knn(p) => TrainedModel::Knn(knn::fit_knn(x, y, &p)?),
        Resolved::NaiveBayes(p) => {
            TrainedModel::GaussianNb(naive_bayes::fit_naive_bayes(x, y, &p)?)
        }
        Resolved::Forest(p) => {
            let owned = x.as_standard_layout();
            let m = RowMatrix::new(
                owned.as_slice().expect("standard layout"),
                x.nrows(),
                x.ncols(),
            );
            let forest = forest::fit_forest(m, y, &p, rng.random())?;
            if spec.kind == ModelKind::ExtraTrees {
                TrainedModel::ExtraTrees(forest)
            } else {
                TrainedModel::RandomForest(forest)
            }
        }
        Resolved::Boosting(p) => {
            TrainedModel::GradientBoosting(boosting::fit_boosting(x, y, &p, rng)?)
        }
    })
}
